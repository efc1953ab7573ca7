// Copyright 2026 The Coopnode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coop/audit/audit_log.h"
#include "coop/common/ids.h"
#include "coop/common/status.h"
#include "coop/dsl/parser.h"
#include "coop/pds/key_vault.h"
#include "coop/pds/pds_service.h"
#include "coop/pds/store_file.h"
#include "gtest/gtest.h"

namespace coop::pds {
namespace {

namespace fs = std::filesystem;

const std::vector<FieldSpec> kSchema = {{"employer", FieldKind::kText, ""},
                                        {"amount", FieldKind::kNumber, "EUR"},
                                        {"paid_at", FieldKind::kTimestamp, ""},
                                        {"site", FieldKind::kGeo, ""}};

TEST(StoreFile, ValueEncodingRoundTrips) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<FieldValue> values = {
        std::string(rng() % 40, static_cast<char>('a' + rng() % 26)),
        std::ldexp(static_cast<double>(rng() % 1000000) - 500000, -7),
        TimestampValue{static_cast<Timestamp>(rng() % 4000000000)},
        GeoPoint{static_cast<double>(rng() % 180) - 90, static_cast<double>(rng() % 360) - 180}};
    const std::string bytes = EncodeValues(kSchema, values);
    absl::StatusOr<std::vector<FieldValue>> back = DecodeValues(kSchema, bytes);
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(*back, values);
    EXPECT_FALSE(DecodeValues(kSchema, bytes.substr(0, bytes.size() - 1)).ok());
    EXPECT_FALSE(DecodeValues(kSchema, bytes + "x").ok());
  }
}

TEST(StoreFile, FileLayoutRoundTrips) {
  StoreHeader h;
  h.store_id = "store-1";
  h.owner = "m1";
  h.schema = kSchema;
  h.created_at = 5;
  h.key_scope = "scope";
  h.wrapped_key = "wrapped";
  h.hosting = {HostingKind::kMember, "member://m1"};
  std::vector<SealedRecord> records = {{"r1", 7, std::string("\0\1\2\n", 4)},
                                       {"r2", 8, "cipher"}};
  absl::StatusOr<StoreFile> parsed = ParseStoreFile(SerializeStoreFile(h, records));
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ(parsed->header.ToJson(), h.ToJson());
  ASSERT_EQ(parsed->records.size(), 2u);
  EXPECT_EQ(parsed->records[0].ciphertext, records[0].ciphertext);
  EXPECT_EQ(parsed->records[1].record_id, "r2");
  EXPECT_FALSE(ParseStoreFile("garbage").ok());
  EXPECT_NE(RecordAad("s", "r1"), RecordAad("s", "r2"));
}

TEST(KeyVault, WrapsPerStoreAndPersists) {
  const fs::path dir = fs::temp_directory_path() / "coop-vault-test";
  fs::remove_all(dir);
  crypto::SecretBytes key = crypto::GenerateAeadKey();
  std::string wrapped;
  {
    auto vault = KeyVault::Open(dir, "scope-a");
    ASSERT_TRUE(vault.ok());
    wrapped = (*vault)->Wrap(key, "store-1");
    EXPECT_EQ((*vault)->Unwrap(wrapped, "store-1")->view(), key.view());
    EXPECT_FALSE((*vault)->Unwrap(wrapped, "store-2").ok());
  }
  auto reopened = KeyVault::Open(dir, "scope-a");
  ASSERT_TRUE(reopened.ok());
  EXPECT_EQ((*reopened)->Unwrap(wrapped, "store-1")->view(), key.view());
  auto other = KeyVault::Open("", "scope-a");
  EXPECT_FALSE((*other)->Unwrap(wrapped, "store-1").ok());
  fs::remove_all(dir);
}

class Members final : public MemberDirectory {
 public:
  bool IsMember(std::string_view id) const override { return id == "m1" || id == "m2"; }
};

// Accepts only "good:<algo_id>" and records the owners it was asked about.
class Validator final : public ExecutionValidator {
 public:
  absl::Status ValidateExecution(std::string_view credential, const AlgoRef& algo,
                                 const MemberId& owner) const override {
    owners.insert(owner);
    if (credential != "good:" + algo.algo_id) return PermissionDenied("invalid-token");
    return absl::OkStatus();
  }
  mutable std::set<std::string> owners;
};

class PdsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("coop-pds-" + std::string(::testing::UnitTest::GetInstance()
                                          ->current_test_info()
                                          ->name()));
    fs::remove_all(dir_);
    vault_ = *KeyVault::Open(dir_ / "keys", "scope");
    audit_ = *audit::AuditLog::Open("", &clock_, false);
    Reopen();
  }
  void TearDown() override { fs::remove_all(dir_); }

  void Reopen() {
    pds_.reset();
    PdsService::Options o;
    o.dir = dir_ / "stores";
    o.clock = &clock_;
    o.ids = &ids_;
    o.audit = audit_.get();
    o.vault = vault_.get();
    o.members = &members_;
    o.validator = &validator_;
    pds_ = *PdsService::Open(o);
  }

  Json Record(std::string employer, double amount) {
    return Json{{"employer", employer},
                {"amount", amount},
                {"paid_at", "2026-01-31T00:00:00Z"},
                {"site", {{"lat", 52.5}, {"lon", 13.4}}}};
  }

  std::string NewStore(Hosting hosting = {}) {
    absl::StatusOr<StoreInfo> info = pds_->CreateStore("m1", kSchema, hosting);
    EXPECT_TRUE(info.ok()) << info.status();
    return info->store_id;
  }

  dsl::CompiledAlgorithm Sum() {
    return dsl::CompiledAlgorithm::Make({"sum", 1}, dsl::Mode::kAggregate,
                                        *dsl::Parse("sum(amount)"),
                                        {{"amount", FieldKind::kNumber, ""}});
  }

  std::string AllFileBytes() {
    std::string out;
    for (const auto& e : fs::recursive_directory_iterator(dir_)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path(), std::ios::binary);
      std::stringstream b;
      b << in.rdbuf();
      out += b.str();
    }
    return out;
  }

  fs::path dir_;
  ManualClock clock_{1767225600};
  SequentialIdSource ids_;
  Members members_;
  Validator validator_;
  std::unique_ptr<KeyVault> vault_;
  std::unique_ptr<audit::AuditLog> audit_;
  std::unique_ptr<PdsService> pds_;
};

TEST_F(PdsTest, CreateStoreValidatesInput) {
  EXPECT_EQ(ErrorSlug(pds_->CreateStore("m9", kSchema, {}).status()), "unknown-member");
  EXPECT_EQ(ErrorSlug(pds_->CreateStore("m1", {}, {}).status()), "empty-schema");
  EXPECT_EQ(ErrorSlug(pds_->CreateStore("m1", {kSchema[0], kSchema[0]}, {}).status()),
            "duplicate-field");
  EXPECT_EQ(ErrorSlug(pds_->CreateStore("m1", kSchema, {HostingKind::kMember, ""}).status()),
            "bad-endpoint");
}

TEST_F(PdsTest, IngestIsOwnerOnlyAndAllOrNothing) {
  const std::string id = NewStore();
  EXPECT_EQ(ErrorSlug(pds_->Ingest("m2", id, {Record("acme", 1)}).status()), "not-owner");
  Json missing = Record("acme", 1);
  missing.erase("site");
  Json wrong = Record("acme", 1);
  wrong["amount"] = "lots";
  EXPECT_EQ(ErrorSlug(pds_->Ingest("m1", id, {Record("a", 1), missing}).status()),
            "schema-violation");
  EXPECT_EQ(ErrorSlug(pds_->Ingest("m1", id, {Record("a", 1), wrong}).status()),
            "schema-violation");
  Json extra = Record("acme", 1);
  extra["ssn"] = "x";
  EXPECT_EQ(ErrorSlug(pds_->Ingest("m1", id, {extra}).status()), "schema-violation");
  EXPECT_EQ(pds_->Info(id)->record_count, 0u);
  absl::StatusOr<std::vector<std::string>> ok =
      pds_->Ingest("m1", id, {Record("a", 1), Record("b", 2)});
  ASSERT_TRUE(ok.ok());
  EXPECT_EQ(ok->size(), 2u);
  EXPECT_EQ(pds_->Info(id)->record_count, 2u);
}

TEST_F(PdsTest, RecordsAreEncryptedAtRestAndSurviveReopen) {
  const std::string id = NewStore();
  ASSERT_TRUE(pds_->Ingest("m1", id, {Record("Zyxwvut Widgets GmbH", 1234.5)}).ok());
  const std::string bytes = AllFileBytes();
  EXPECT_EQ(bytes.find("Zyxwvut"), std::string::npos);
  EXPECT_EQ(bytes.find("1234.5"), std::string::npos);
  Reopen();
  absl::StatusOr<Json> records = pds_->ReadRecords("m1", id);
  ASSERT_TRUE(records.ok());
  ASSERT_EQ(records->size(), 1u);
  EXPECT_EQ((*records)[0]["values"]["employer"], "Zyxwvut Widgets GmbH");
  EXPECT_EQ(ErrorSlug(pds_->ReadRecords("m2", id).status()), "not-owner");
}

TEST_F(PdsTest, RemoveBySelector) {
  const std::string id = NewStore();
  auto ids = *pds_->Ingest("m1", id, {Record("a", 1), Record("b", 2), Record("c", 3)});
  EXPECT_EQ(*pds_->Remove("m1", id, {false, {ids[1]}}), 1u);
  EXPECT_EQ(ErrorSlug(pds_->Remove("m2", id, {true, {}}).status()), "not-owner");
  EXPECT_EQ(pds_->Info(id)->record_count, 2u);
  EXPECT_EQ(*pds_->Remove("m1", id, {true, {}}), 2u);
  Reopen();
  EXPECT_EQ(pds_->Info(id)->record_count, 0u);
}

TEST_F(PdsTest, LocalEvaluationNeedsValidCredential) {
  const std::string id = NewStore();
  ASSERT_TRUE(pds_->Ingest("m1", id, {Record("a", 1.5), Record("b", 2)}).ok());
  EXPECT_EQ(ErrorSlug(pds_->LocalEvaluate(id, Sum(), "bad").status()), "invalid-token");
  absl::StatusOr<dsl::LocalResult> r = pds_->LocalEvaluate(id, Sum(), "good:sum");
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->cells[""].sum.Value(), 3.5);
  EXPECT_EQ(r->owner, "m1");
  EXPECT_EQ(validator_.owners, std::set<std::string>{"m1"});
}

TEST_F(PdsTest, SuspendedStoresAreInvisibleToExecution) {
  const std::string id = NewStore();
  ASSERT_TRUE(pds_->Ingest("m1", id, {Record("a", 1)}).ok());
  ASSERT_TRUE(pds_->SetStatus("m1", id, StoreStatus::kSuspended).ok());
  EXPECT_EQ(ErrorSlug(pds_->LocalEvaluate(id, Sum(), "good:sum").status()), "store-suspended");
  EXPECT_EQ(ErrorSlug(pds_->Ingest("m1", id, {Record("a", 1)}).status()), "store-suspended");
  EXPECT_EQ(ErrorSlug(pds_->ExportArchive("m1", id).status()), "store-suspended");
  Reopen();
  EXPECT_EQ(pds_->Info(id)->status, StoreStatus::kSuspended);
  ASSERT_TRUE(pds_->SetStatus("m1", id, StoreStatus::kActive).ok());
  EXPECT_TRUE(pds_->LocalEvaluate(id, Sum(), "good:sum").ok());
}

TEST_F(PdsTest, MemberHostedStoresRecheckCredentials) {
  const std::string id = NewStore({HostingKind::kMember, "member://m1/pds"});
  ASSERT_TRUE(pds_->Ingest("m1", id, {Record("a", 4)}).ok());
  EXPECT_EQ(pds_->Info(id)->hosting.kind, HostingKind::kMember);
  EXPECT_EQ(ErrorSlug(pds_->LocalEvaluate(id, Sum(), "bad").status()), "invalid-token");
  absl::StatusOr<dsl::LocalResult> r = pds_->LocalEvaluate(id, Sum(), "good:sum");
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->cells[""].sum.Value(), 4.0);
}

TEST_F(PdsTest, UndeclaredFieldsAreRefused) {
  const std::string id = NewStore();
  dsl::CompiledAlgorithm sneaky = dsl::CompiledAlgorithm::Make(
      {"sum", 1}, dsl::Mode::kAggregate, *dsl::Parse("sum(amount)"), {});
  EXPECT_EQ(ErrorSlug(pds_->LocalEvaluate(id, sneaky, "good:sum").status()),
            "undeclared-field");
}

TEST_F(PdsTest, ArchiveExportAndImport) {
  const std::string id = NewStore();
  ASSERT_TRUE(pds_->Ingest("m1", id, {Record("Qwerty Holdings", 9)}).ok());
  const std::string archive = *pds_->ExportArchive("m1", id);
  EXPECT_EQ(archive.find("Qwerty"), std::string::npos);
  EXPECT_EQ(ErrorSlug(pds_->ExportArchive("m2", id).status()), "not-owner");
  EXPECT_EQ(ErrorSlug(pds_->ImportArchive("m1", archive).status()), "duplicate-store");

  fs::remove_all(dir_ / "stores");
  Reopen();
  EXPECT_FALSE(pds_->Info(id).ok());
  EXPECT_EQ(ErrorSlug(pds_->ImportArchive("m2", archive).status()), "not-owner");
  std::string tampered = archive;
  tampered[tampered.size() - 3] ^= 0x01;
  EXPECT_FALSE(pds_->ImportArchive("m1", tampered).ok());
  absl::StatusOr<StoreInfo> info = pds_->ImportArchive("m1", archive);
  ASSERT_TRUE(info.ok()) << info.status();
  EXPECT_EQ((*pds_->ReadRecords("m1", id))[0]["values"]["employer"], "Qwerty Holdings");
}

TEST_F(PdsTest, StoreOperationsAreAudited) {
  const std::string id = NewStore();
  ASSERT_TRUE(pds_->Ingest("m1", id, {Record("a", 1)}).ok());
  int store_ops = 0;
  for (const audit::Event& e : audit_->Snapshot()) {
    if (e.type == audit::EventType::kStoreOp) ++store_ops;
  }
  EXPECT_GE(store_ops, 2);
  EXPECT_EQ(pds_->StoresOf("m1").size(), 1u);
  EXPECT_TRUE(pds_->StoresOf("m2").empty());
  EXPECT_EQ(pds_->AllStores().size(), 1u);
}

}  // namespace
}  // namespace coop::pds
