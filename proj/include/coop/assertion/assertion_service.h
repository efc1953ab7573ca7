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

#ifndef COOP_ASSERTION_ASSERTION_SERVICE_H_
#define COOP_ASSERTION_ASSERTION_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/assertion/keys.h"
#include "coop/audit/audit_log.h"
#include "coop/authz/consent.h"
#include "coop/authz/principals.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/ids.h"
#include "coop/common/journal.h"
#include "coop/engine/opal_engine.h"
#include "coop/registry/registry.h"

namespace coop::assertion {

enum class ValidityClass { kTransactional, kStaticAttribute };
std::string_view ValidityClassName(ValidityClass c);

struct AssertionConfig {
  Duration transactional_max = kDay;
  Duration static_max = 365 * kDay;
  std::string copyright_notice =
      "Copyright the issuing cooperative and the subject member. Use is "
      "limited to the stated purpose; further propagation is not permitted.";
};

struct StoredAssertion {
  std::string assertion_id;
  MemberId member;  // the real subject, never in the payload unless disclosed
  std::string audience;
  ValidityClass validity_class = ValidityClass::kTransactional;
  std::string slug;  // static attributes only, e.g. "age-over-21"
  bool published = false;
  std::string document;  // canonical bytes
  Json payload;
  uint64_t audit_seq = 0;

  Json ToJson() const;
  static absl::StatusOr<StoredAssertion> FromJson(const Json& json);
};

struct DigitalReceipt {
  std::string receipt_id;
  std::string assertion_id;
  PrincipalId service_provider;
  Json accepted_terms;
  Timestamp signed_at = 0;
  std::string signature;  // raw
  uint64_t audit_seq = 0;

  Json ToJson() const;
};

struct IssueRequest {
  MemberId subject;
  AlgoRef algo;
  std::string purpose;
  std::string audience;
  Duration validity = 0;
  bool disclose_identity = false;  // otherwise a pairwise pseudonym
};

struct StaticAttribute {
  enum class Kind { kYearOfBirth, kAgeOver };
  Kind kind = Kind::kAgeOver;
  int years = 0;  // age threshold

  std::string Slug() const;
};

// Member-initiated issuance of signed assertions. Every issuance is
// preceded by a directive event from the member in the audit chain.
class AssertionService {
 public:
  struct Options {
    std::filesystem::path path;  // empty: memory only
    bool sync_writes = false;
    AssertionConfig config;
    const Clock* clock = nullptr;
    IdSource* ids = nullptr;
    const CooperativeKeys* keys = nullptr;
    const registry::AlgorithmRegistry* algorithms = nullptr;
    const authz::PrincipalDirectory* principals = nullptr;
    authz::ConsentRegistry* consent = nullptr;
    engine::OpalEngine* engine = nullptr;
    audit::AuditLog* audit = nullptr;
  };

  static absl::StatusOr<std::unique_ptr<AssertionService>> Open(Options o);

  // Errors: member-directive-required, validity-exceeded, not-vetted,
  // not-subject-mode, purpose-not-allowed, no-eligible-store.
  absl::StatusOr<StoredAssertion> Issue(const authz::Principal& caller,
                                        const IssueRequest& request);

  // Errors: member-directive-required, attribute-unavailable,
  // validity-exceeded.
  absl::StatusOr<StoredAssertion> IssueStatic(const authz::Principal& caller,
                                              const StaticAttribute& attribute,
                                              bool publish,
                                              Duration validity);

  // `n` fresh issuances in sequence; n = 0 yields an empty list.
  absl::StatusOr<std::vector<StoredAssertion>> ReissueCycle(
      const authz::Principal& caller, const IssueRequest& request, int n);

  // Holder view: the subject or the audience.
  absl::StatusOr<StoredAssertion> Get(const PrincipalId& viewer,
                                      std::string_view assertion_id) const;
  // Published static assertions, readable without authentication.
  absl::StatusOr<StoredAssertion> GetPublished(std::string_view member,
                                               std::string_view slug) const;

  // `receipt_document` is {"payload": ReceiptPayload(..), "signature":
  // {"key_id": <sp id>, "value": base64}} signed by the service provider.
  // Errors: unknown-assertion, not-service-provider, bad-signature,
  // terms-mismatch, audience-mismatch.
  absl::StatusOr<DigitalReceipt> RecordReceipt(const authz::Principal& caller,
                                               std::string_view assertion_id,
                                               const Json& receipt_document);
  std::vector<DigitalReceipt> ReceiptsFor(std::string_view assertion_id) const;

  std::vector<StoredAssertion> All() const;

  // Terms-of-use clause digests for an issuance to `audience` for `purpose`.
  std::vector<std::string> TermsOfUse(std::string_view purpose,
                                      std::string_view audience) const;

 private:
  AssertionService(Options o, std::unique_ptr<Journal> journal)
      : options_(std::move(o)), journal_(std::move(journal)) {}

  absl::StatusOr<StoredAssertion> SignAndStore(
      const MemberId& member, Json payload, ValidityClass validity_class,
      std::string slug, bool publish, uint64_t directive_seq,
      std::map<std::string, std::string> refs);
  Timestamp NextIssueTime(const MemberId& member);

  Options options_;
  std::unique_ptr<Journal> journal_;
  mutable std::shared_mutex mu_;
  std::map<std::string, StoredAssertion, std::less<>> assertions_;
  std::map<std::pair<std::string, std::string>, std::string> published_;
  std::multimap<std::string, DigitalReceipt, std::less<>> receipts_;
  std::map<MemberId, Timestamp> last_issued_;
};

}  // namespace coop::assertion

#endif  // COOP_ASSERTION_ASSERTION_SERVICE_H_
