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
#include <string>
#include <vector>

#include "coop/audit/audit_log.h"
#include "coop/common/canonical_json.h"
#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "gtest/gtest.h"

namespace coop::audit {
namespace {

namespace fs = std::filesystem;

// Recomputes an event hash from its exported JSON form.
std::string HashOfExported(const Json& event) {
  Json body = event;
  body.erase("this_hash");
  return crypto::Sha256Hex(*Canonicalize(body) + event["prev_hash"].get<std::string>());
}

class AuditLogTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("coop-audit-" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    log_ = *AuditLog::Open(dir_ / "audit.jsonl", &clock_, false);
  }
  void TearDown() override { fs::remove_all(dir_); }

  uint64_t Add(EventType type, std::string actor,
               std::map<std::string, std::string> refs = {}) {
    clock_.Advance(1);
    return *log_->Append({type, "test", std::move(actor), std::move(refs)});
  }

  fs::path dir_;
  ManualClock clock_{1767225600};
  std::unique_ptr<AuditLog> log_;
};

TEST_F(AuditLogTest, SequenceIsDenseAndHashesChain) {
  for (int i = 0; i < 20; ++i) EXPECT_EQ(Add(EventType::kStoreOp, "m1"), uint64_t(i));
  std::vector<Event> events = log_->Snapshot();
  ASSERT_EQ(events.size(), 20u);
  std::string prev(kGenesisHash);
  for (const Event& e : events) {
    EXPECT_EQ(e.prev_hash, prev);
    EXPECT_EQ(e.this_hash, HashOfExported(e.ToJson()));
    prev = e.this_hash;
  }
  EXPECT_TRUE(VerifyChain(events, kGenesisHash).ok);
}

TEST_F(AuditLogTest, AnyEditBreaksTheChainAtThatEvent) {
  for (int i = 0; i < 10; ++i) Add(EventType::kConsent, "m1");
  const std::vector<Event> original = log_->Snapshot();
  for (size_t i = 0; i < original.size(); ++i) {
    std::vector<Event> edited = original;
    edited[i].actor = "m2";
    ChainVerdict v = VerifyChain(edited, kGenesisHash);
    EXPECT_FALSE(v.ok);
    EXPECT_EQ(v.break_at, i);
  }
  std::vector<Event> dropped = original;
  dropped.erase(dropped.begin() + 4);
  EXPECT_FALSE(VerifyChain(dropped, kGenesisHash).ok);
}

TEST_F(AuditLogTest, ExportedSegmentsVerifyAgainstTheirAnchor) {
  for (int i = 0; i < 12; ++i) Add(EventType::kExecution, "q");
  const std::string jsonl = log_->ExportJsonLines(5, 9);
  EXPECT_TRUE(VerifyExportedChain(jsonl, log_->AnchorFor(5), 5).ok);
  EXPECT_FALSE(VerifyExportedChain(jsonl, log_->AnchorFor(4), 5).ok);
  std::string tampered = jsonl;
  tampered[tampered.find("\"q\"") + 1] = 'x';
  EXPECT_FALSE(VerifyExportedChain(tampered, log_->AnchorFor(5), 5).ok);
}

TEST_F(AuditLogTest, ReopenRestoresChain) {
  for (int i = 0; i < 5; ++i) Add(EventType::kEnrollment, "s");
  const std::string last = log_->Snapshot().back().this_hash;
  log_.reset();
  log_ = *AuditLog::Open(dir_ / "audit.jsonl", &clock_, false);
  ASSERT_EQ(log_->size(), 5u);
  EXPECT_EQ(Add(EventType::kEnrollment, "s"), 5u);
  EXPECT_EQ(log_->Get(5)->prev_hash, last);
}

TEST_F(AuditLogTest, ReopenRejectsTamperedFile) {
  for (int i = 0; i < 3; ++i) Add(EventType::kEnrollment, "s");
  log_.reset();
  std::string content = *ReadFile(dir_ / "audit.jsonl");
  content[content.find("\"s\"") + 1] = 't';
  ASSERT_TRUE(WriteFileAtomically(dir_ / "audit.jsonl", content).ok());
  EXPECT_FALSE(AuditLog::Open(dir_ / "audit.jsonl", &clock_, false).ok());
}

TEST_F(AuditLogTest, EventsReferencingMatchesActorAndRefs) {
  Add(EventType::kConsent, "m1");
  Add(EventType::kExecution, "q", {{kRefSubject, "m1"}});
  Add(EventType::kExecution, "q", {{kRefSubject, "m2"}});
  EXPECT_EQ(log_->EventsReferencing("m1").size(), 2u);
  EXPECT_EQ(log_->EventsReferencing("q").size(), 2u);
  EXPECT_TRUE(log_->EventsReferencing("nobody").empty());
}

TEST_F(AuditLogTest, ConsentDemonstrationBundles) {
  const uint64_t consent = Add(EventType::kConsent, "m1");
  Add(EventType::kStoreOp, "m2");
  const uint64_t session = Add(EventType::kSessionStage, "q");
  const uint64_t exec =
      Add(EventType::kExecution, "q",
          {{kRefSubject, "m1"},
           {kRefConsentSeq, std::to_string(consent)},
           {kRefSessionSeq, std::to_string(session)}});
  const uint64_t bare = Add(EventType::kExecution, "q", {{kRefSubject, "m1"}});

  absl::StatusOr<Json> bundle = log_->DemonstrateConsent("m1", exec);
  ASSERT_TRUE(bundle.ok()) << bundle.status();
  EXPECT_TRUE(VerifyConsentBundle(*bundle));
  EXPECT_EQ((*bundle)["segment"].size(), exec - consent + 1);

  Json forged = *bundle;
  forged["authorization"][0]["actor"] = "m9";
  EXPECT_FALSE(VerifyConsentBundle(forged));
  Json swapped = *bundle;
  swapped["subject"] = "m2";
  EXPECT_FALSE(VerifyConsentBundle(swapped));
  Json cut = *bundle;
  cut["segment"].erase(1);
  EXPECT_FALSE(VerifyConsentBundle(cut));

  EXPECT_EQ(ErrorSlug(log_->DemonstrateConsent("m2", exec).status()), "subject-mismatch");
  EXPECT_EQ(ErrorSlug(log_->DemonstrateConsent("m1", consent).status()),
            "execution-not-found");
  EXPECT_EQ(ErrorSlug(log_->DemonstrateConsent("m1", bare).status()),
            "no-authorization-recorded");
}

TEST(EventType, NamesRoundTrip) {
  for (EventType t : {EventType::kEnrollment, EventType::kStoreOp, EventType::kVetting,
                      EventType::kSessionStage, EventType::kToken, EventType::kConsent,
                      EventType::kExecution, EventType::kAssertion, EventType::kReceipt}) {
    EXPECT_EQ(EventTypeFromName(EventTypeName(t)), t);
  }
  EXPECT_EQ(EventTypeName(EventType::kSessionStage), "session-stage");
}

}  // namespace
}  // namespace coop::audit
