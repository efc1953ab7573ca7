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
#include <sstream>
#include <string>

#include "coop/assertion/document.h"
#include "coop/assertion/keys.h"
#include "coop/common/canonical_json.h"
#include "coop/common/crypto.h"
#include "gtest/gtest.h"

namespace coop::assertion {
namespace {

constexpr Timestamp kIssued = 1767225600;

class DocumentTest : public ::testing::Test {
 protected:
  void SetUp() override { keys_ = *CooperativeKeys::Open("", "harbour-coop"); }

  Json Payload() const {
    return Json{{"assertion_id", "as-1"},
                {"issuer", "harbour-coop"},
                {"subject", "p-123"},
                {"purpose", "car-loan-application"},
                {"issued_at", FormatTimestamp(kIssued)},
                {"expires_at", FormatTimestamp(kIssued + kDay)},
                {"result", {{"sum", 41000.5}}}};
  }

  std::string Sign(const Json& payload) const {
    CooperativeKeys::Signature s = keys_->Sign(*Canonicalize(payload));
    return AssembleDocument(payload, s.key_id, s.value);
  }

  Verdict Check(const std::string& doc, std::string purpose = "car-loan-application",
                Timestamp at = kIssued + 60) const {
    return VerifyDocument(doc, purpose, at, keys_->Published());
  }

  std::unique_ptr<CooperativeKeys> keys_;
};

TEST_F(DocumentTest, ValidDocumentVerifies) {
  const std::string doc = Sign(Payload());
  Verdict v = Check(doc);
  EXPECT_TRUE(v.valid) << v.reason;
  EXPECT_EQ(v.reason, "");
  EXPECT_EQ(v.payload["subject"], "p-123");
  EXPECT_EQ(*Canonicalize(*ParseJson(doc)), doc);
}

TEST_F(DocumentTest, EachCheckReportsItsReason) {
  const std::string doc = Sign(Payload());
  std::string spaced = doc;
  spaced.insert(1, " ");
  EXPECT_EQ(Check(spaced).reason, "canonical-form");
  EXPECT_EQ(Check("{}").reason, "canonical-form");

  Json foreign = *ParseJson(doc);
  foreign["signature"]["key_id"] = "k-unknown";
  EXPECT_EQ(Check(*Canonicalize(foreign)).reason, "unknown-key");

  Json edited = *ParseJson(doc);
  edited["payload"]["result"]["sum"] = 99999;
  EXPECT_EQ(Check(*Canonicalize(edited)).reason, "signature");

  EXPECT_EQ(Check(doc, "car-loan-application", kIssued + kDay).reason, "expired");
  EXPECT_TRUE(Check(doc, "car-loan-application", kIssued + kDay - 1).valid);
  EXPECT_EQ(Check(doc, "marketing").reason, "purpose-mismatch");
  EXPECT_EQ(Check(doc, "").reason, "purpose-mismatch");
}

TEST_F(DocumentTest, FirstFailureWins) {
  Json edited = *ParseJson(Sign(Payload()));
  edited["payload"]["purpose"] = "marketing";
  // Tampered, expired and wrong purpose: the signature is reported.
  EXPECT_EQ(Check(*Canonicalize(edited), "x", kIssued + 2 * kDay).reason, "signature");
  // Expired and wrong purpose: expiry is reported.
  EXPECT_EQ(Check(Sign(Payload()), "x", kIssued + 2 * kDay).reason, "expired");
}

TEST_F(DocumentTest, IssuerMustMatchKeyDocument) {
  Json payload = Payload();
  payload["issuer"] = "other-coop";
  EXPECT_EQ(Check(Sign(payload)).reason, "unknown-key");
}

TEST_F(DocumentTest, RotationKeepsOldDocumentsVerifiable) {
  const std::string before = Sign(Payload());
  const std::string old_id = keys_->current_key_id();
  const std::string new_id = *keys_->Rotate();
  EXPECT_NE(old_id, new_id);
  EXPECT_EQ(keys_->current_key_id(), new_id);
  EXPECT_TRUE(Check(before).valid);
  const std::string after = Sign(Payload());
  EXPECT_EQ((*ParseJson(after))["signature"]["key_id"], new_id);
  EXPECT_TRUE(Check(after).valid);
  EXPECT_EQ(keys_->Published()["keys"].size(), 2u);
}

TEST_F(DocumentTest, ReceiptPayloadShape) {
  Json p = ReceiptPayload("as-1", "q-7", Json::array({"d1", "d2"}), kIssued);
  EXPECT_EQ(p["assertion_id"], "as-1");
  EXPECT_EQ(p["service_provider"], "q-7");
  EXPECT_EQ(p["accepted_terms"], Json::array({"d1", "d2"}));
  EXPECT_EQ(p["signed_at"], FormatTimestamp(kIssued));
}

TEST(CooperativeKeys, PseudonymsArePairwiseAndStable) {
  auto keys = *CooperativeKeys::Open("", "coop");
  EXPECT_EQ(keys->Pseudonym("m1", "bank"), keys->Pseudonym("m1", "bank"));
  EXPECT_NE(keys->Pseudonym("m1", "bank"), keys->Pseudonym("m1", "shop"));
  EXPECT_NE(keys->Pseudonym("m1", "bank"), keys->Pseudonym("m2", "bank"));
  EXPECT_EQ(keys->Pseudonym("m1", "bank").find("m1"), std::string::npos);
  auto other = *CooperativeKeys::Open("", "coop");
  EXPECT_NE(keys->Pseudonym("m1", "bank"), other->Pseudonym("m1", "bank"));
}

TEST(CooperativeKeys, PersistAcrossReopen) {
  const auto dir = std::filesystem::temp_directory_path() / "coop-signing-keys-test";
  std::filesystem::remove_all(dir);
  std::string id, pseudonym;
  Json published;
  {
    auto keys = *CooperativeKeys::Open(dir, "coop");
    ASSERT_TRUE(keys->Rotate().ok());
    id = keys->current_key_id();
    pseudonym = keys->Pseudonym("m1", "bank");
    published = keys->Published();
  }
  auto keys = *CooperativeKeys::Open(dir, "coop");
  EXPECT_EQ(keys->current_key_id(), id);
  EXPECT_EQ(keys->Pseudonym("m1", "bank"), pseudonym);
  EXPECT_EQ(keys->Published(), published);
  const std::string pk = *crypto::Base64Decode(published["keys"][id].get<std::string>());
  EXPECT_EQ(KeyIdFor(pk), id);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace coop::assertion
