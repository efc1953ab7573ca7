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

#ifndef COOP_AUTHZ_BINDING_H_
#define COOP_AUTHZ_BINDING_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/audit/audit_log.h"
#include "coop/authz/principals.h"
#include "coop/authz/scope.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/ids.h"
#include "coop/common/journal.h"
#include "coop/registry/registry.h"

namespace coop::authz {

struct ObligationClause {
  std::string clause_id;
  int stage = 1;
  std::string title;
  std::string digest;  // SHA-256 hex of the clause text

  bool operator==(const ObligationClause&) const = default;
  Json ToJson() const;
};

struct Acceptance {
  std::string clause_id;
  std::string digest;
  int stage = 1;
  PrincipalId by;
  Timestamp accepted_at = 0;

  bool operator==(const Acceptance&) const = default;
};

enum class SessionState { kInProgress, kBound, kAborted, kExpired };
std::string_view SessionStateName(SessionState state);

struct BindingSession {
  std::string session_id;
  PrincipalId querier;
  PrincipalId service_operator;  // empty when the querier runs its own client
  std::string resource_operator;  // reserved; never set
  Requested requested;
  int stage = 0;  // number of stages both parties have completed
  int total_stages = 0;
  std::vector<ObligationClause> clauses;
  std::vector<Acceptance> accepted;
  SessionState state = SessionState::kInProgress;
  Timestamp created_at = 0;
  Timestamp last_activity = 0;
  uint64_t begin_seq = 0;
  uint64_t bound_seq = 0;  // audit seq of the binding event, when bound

  std::vector<PrincipalId> parties() const;
  std::vector<ObligationClause> ClausesOfStage(int stage) const;
  bool Accepted(const PrincipalId& who, int stage) const;
  Json ToJson() const;
  static absl::StatusOr<BindingSession> FromJson(const Json& json);
};

enum class TokenState { kActive, kRevoked, kExpired };

// Server-side token record. The bearer value itself is never stored; the
// record is keyed by its hash.
struct AccessToken {
  std::string token_hash;
  std::string session_id;
  PrincipalId holder;
  PrincipalId querier;
  Requested grants;
  Timestamp issued_at = 0;
  Timestamp expires_at = 0;
  bool revoked = false;
  uint64_t mint_seq = 0;
  uint64_t session_seq = 0;

  TokenState StateAt(Timestamp now) const;
  // Short non-secret reference used in audit events.
  std::string ref() const { return token_hash.substr(0, 16); }
  Json ToJson() const;
  static absl::StatusOr<AccessToken> FromJson(const Json& json);
};

struct Introspection {
  bool active = false;
  PrincipalId holder;
  PrincipalId querier;
  Requested grants;
  Timestamp expires_at = 0;
  std::string session_id;
  uint64_t token_seq = 0;
  uint64_t session_seq = 0;

  // Inactive tokens report only {"active": false}.
  Json ToJson() const;
};

struct AdvanceResult {
  BindingSession session;
  std::vector<ObligationClause> next_clauses;  // empty once bound
  std::string token;  // the caller's token, once bound
};

struct BindingConfig {
  std::string cooperative_name = "cooperative";
  int stages = 3;
  Duration token_lifetime = 10 * kMinute;
  Duration session_idle = kHour;
};

// Progressive binding: each stage's clauses are accepted by every party in
// lock-step; the stage advances only once all parties accepted it, and
// tokens exist only for bound sessions, one per party.
class BindingService {
 public:
  static absl::StatusOr<std::unique_ptr<BindingService>> Open(
      const std::filesystem::path& path, BindingConfig config,
      const Clock* clock, IdSource* ids,
      const registry::AlgorithmRegistry* algorithms, audit::AuditLog* audit,
      bool sync_writes);

  // Both principals are already authenticated. Errors:
  // distinct-principals-required, wrong-role, not-vetted,
  // unknown-algorithm, scope-mode-mismatch, purpose-not-allowed.
  absl::StatusOr<AdvanceResult> Begin(const Principal& querier,
                                      const Principal* service_operator,
                                      Requested requested);

  // Errors: unknown-session, not-party, out-of-order, session-aborted,
  // session-expired, session-bound.
  absl::StatusOr<AdvanceResult> Advance(std::string_view session_id,
                                        const PrincipalId& actor);
  absl::StatusOr<BindingSession> Abort(std::string_view session_id,
                                       const PrincipalId& actor);

  // One-time pickup of the token minted for `actor` at binding time.
  absl::StatusOr<std::string> ClaimToken(std::string_view session_id,
                                         const PrincipalId& actor);

  // Revokes `token` and mints a replacement for the same holder and session.
  absl::StatusOr<std::string> Refresh(std::string_view token,
                                      const PrincipalId& actor);

  Introspection Introspect(std::string_view token) const;

  // Revokes active tokens of single-subject sessions for `subject` running
  // `algo`. Returns how many were revoked.
  absl::StatusOr<size_t> RevokeForSubject(const MemberId& subject,
                                          const AlgoRef& algo);

  absl::StatusOr<BindingSession> GetSession(std::string_view id) const;
  std::vector<AccessToken> TokensForSession(std::string_view id) const;
  std::vector<BindingSession> AllSessions() const;

  // Clause set for a request; exposed for tests and the console.
  std::vector<ObligationClause> ClausesFor(const Requested& requested) const;

 private:
  BindingService(BindingConfig config, const Clock* clock, IdSource* ids,
                 const registry::AlgorithmRegistry* algorithms,
                 audit::AuditLog* audit, std::unique_ptr<Journal> journal)
      : config_(std::move(config)),
        clock_(clock),
        ids_(ids),
        algorithms_(algorithms),
        audit_(audit),
        journal_(std::move(journal)) {}

  // Callers hold mu_ exclusively.
  absl::Status ExpireIfIdle(BindingSession& session, Timestamp now);
  absl::StatusOr<std::string> Mint(const BindingSession& session,
                                   const PrincipalId& holder,
                                   std::string_view action);
  absl::Status PersistSession(const BindingSession& session);
  absl::Status PersistToken(const AccessToken& token);

  BindingConfig config_;
  const Clock* clock_;
  IdSource* ids_;
  const registry::AlgorithmRegistry* algorithms_;
  audit::AuditLog* audit_;
  std::unique_ptr<Journal> journal_;

  mutable std::shared_mutex mu_;
  std::map<std::string, BindingSession, std::less<>> sessions_;
  std::map<std::string, AccessToken, std::less<>> tokens_;  // by hash
  // (session, holder) -> bearer value not yet picked up. Memory only.
  std::map<std::pair<std::string, std::string>, std::string> unclaimed_;
};

}  // namespace coop::authz

#endif  // COOP_AUTHZ_BINDING_H_
