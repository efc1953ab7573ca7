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

#ifndef COOP_AUTHZ_CONSENT_H_
#define COOP_AUTHZ_CONSENT_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/audit/audit_log.h"
#include "coop/authz/scope.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/ids.h"
#include "coop/common/journal.h"
#include "coop/registry/registry.h"

namespace coop::authz {

// Audience value matching every querier.
inline constexpr std::string_view kAnyAudience = "any";

struct ConsentGrant {
  enum class State { kActive, kWithdrawn };

  std::string grant_id;
  MemberId subject;
  AlgoRef algo;
  std::string purpose;
  std::string audience;
  Timestamp granted_at = 0;
  Timestamp valid_until = 0;
  State state = State::kActive;
  std::optional<Timestamp> withdrawal_at;
  uint64_t audit_seq = 0;

  // Effective window is [granted_at, min(valid_until, withdrawal_at)).
  bool ActiveAt(Timestamp t) const;
  Json ToJson() const;
  static absl::StatusOr<ConsentGrant> FromJson(const Json& json);
};

// A blocked single-subject execution waiting for the member's decision.
struct ConsentRequest {
  enum class State { kPending, kApproved, kDenied };

  std::string handle;
  MemberId subject;
  PrincipalId requester;
  AlgoRef algo;
  std::string purpose;
  Scope scope;
  Timestamp requested_at = 0;
  Timestamp expires_at = 0;
  State state = State::kPending;

  Json ToJson() const;
  static absl::StatusOr<ConsentRequest> FromJson(const Json& json);
};

// An issuance call by the member, standing in for a consent grant on the
// execution it triggers. The credential is returned once and only its hash
// is kept.
struct Directive {
  std::string directive_id;
  MemberId subject;
  AlgoRef algo;
  std::string purpose;
  std::string audience;
  Timestamp issued_at = 0;
  Timestamp expires_at = 0;
  std::string credential_hash;
  uint64_t audit_seq = 0;

  Json ToJson() const;
  static absl::StatusOr<Directive> FromJson(const Json& json);
};

struct DirectiveTicket {
  Directive directive;
  std::string credential;
};

inline constexpr std::string_view kDirectiveCredentialPrefix = "dir.";
inline constexpr Duration kConsentRequestLifetime = 7 * kDay;
inline constexpr Duration kDirectiveLifetime = 10 * kMinute;

class ConsentRegistry {
 public:
  static absl::StatusOr<std::unique_ptr<ConsentRegistry>> Open(
      const std::filesystem::path& path, const Clock* clock, IdSource* ids,
      const registry::AlgorithmRegistry* algorithms, audit::AuditLog* audit,
      bool sync_writes);

  struct GrantRequest {
    MemberId subject;
    AlgoRef algo;
    std::string purpose;
    std::string audience;  // querier id or "any"
    Timestamp valid_until = 0;
    std::string description_digest;
    std::string handle;  // optional pending request being approved
  };

  // Errors: not-subject, unknown-algorithm, not-vetted,
  // description-not-presented, bad-validity, unknown-request.
  absl::StatusOr<ConsentGrant> Grant(const PrincipalId& actor,
                                     GrantRequest request);

  // Idempotent. Errors: unknown-grant, not-subject.
  absl::StatusOr<ConsentGrant> Withdraw(const PrincipalId& actor,
                                        std::string_view grant_id);

  // The earliest-granted grant active at `at` for exactly this algorithm
  // version, purpose and audience (an "any" grant matches every audience).
  std::optional<ConsentGrant> Check(const MemberId& subject,
                                    const AlgoRef& algo,
                                    std::string_view purpose,
                                    std::string_view audience,
                                    Timestamp at) const;

  absl::StatusOr<ConsentGrant> GetGrant(std::string_view grant_id) const;
  std::vector<ConsentGrant> GrantsOf(const MemberId& subject) const;

  // Reuses an identical pending request if there is one.
  absl::StatusOr<ConsentRequest> OpenRequest(const PrincipalId& requester,
                                             const MemberId& subject,
                                             const AlgoRef& algo,
                                             std::string_view purpose,
                                             const Scope& scope);
  std::vector<ConsentRequest> Pending(const MemberId& subject) const;
  // Errors: unknown-request, not-subject, request-closed.
  absl::StatusOr<ConsentRequest> Deny(const PrincipalId& actor,
                                      std::string_view handle);

  absl::StatusOr<DirectiveTicket> RecordDirective(const MemberId& subject,
                                                  const AlgoRef& algo,
                                                  std::string_view purpose,
                                                  std::string_view audience);
  // Active directive behind `credential`, if any.
  std::optional<Directive> LookupDirective(std::string_view credential) const;

 private:
  ConsentRegistry(const Clock* clock, IdSource* ids,
                  const registry::AlgorithmRegistry* algorithms,
                  audit::AuditLog* audit, std::unique_ptr<Journal> journal)
      : clock_(clock),
        ids_(ids),
        algorithms_(algorithms),
        audit_(audit),
        journal_(std::move(journal)) {}

  absl::Status Persist(std::string_view kind, Json body);

  const Clock* clock_;
  IdSource* ids_;
  const registry::AlgorithmRegistry* algorithms_;
  audit::AuditLog* audit_;
  std::unique_ptr<Journal> journal_;

  mutable std::shared_mutex mu_;
  std::map<std::string, ConsentGrant, std::less<>> grants_;
  std::map<std::string, ConsentRequest, std::less<>> requests_;
  std::map<std::string, Directive, std::less<>> directives_by_hash_;
};

}  // namespace coop::authz

#endif  // COOP_AUTHZ_CONSENT_H_
