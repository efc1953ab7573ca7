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

#include "coop/authz/binding.h"

#include <algorithm>
#include <mutex>

#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::authz {
namespace {

struct ClauseTemplate {
  std::string title;
  std::string text;
};

absl::Status Bad(std::string_view what) {
  return InvalidArgument("bad-session-record", what);
}

std::string SessionRef(const BindingSession& s) { return s.session_id; }

}  // namespace

std::string_view SessionStateName(SessionState state) {
  switch (state) {
    case SessionState::kInProgress: return "in-progress";
    case SessionState::kBound: return "bound";
    case SessionState::kAborted: return "aborted";
    case SessionState::kExpired: return "expired";
  }
  return "";
}

Json ObligationClause::ToJson() const {
  return Json{{"clause_id", clause_id},
              {"stage", stage},
              {"title", title},
              {"digest", digest}};
}

std::vector<PrincipalId> BindingSession::parties() const {
  std::vector<PrincipalId> out{querier};
  if (!service_operator.empty()) out.push_back(service_operator);
  return out;
}

std::vector<ObligationClause> BindingSession::ClausesOfStage(int s) const {
  std::vector<ObligationClause> out;
  for (const ObligationClause& c : clauses) {
    if (c.stage == s) out.push_back(c);
  }
  return out;
}

bool BindingSession::Accepted(const PrincipalId& who, int s) const {
  return std::any_of(accepted.begin(), accepted.end(), [&](const Acceptance& a) {
    return a.by == who && a.stage == s;
  });
}

Json BindingSession::ToJson() const {
  Json clause_list = Json::array();
  for (const ObligationClause& c : clauses) clause_list.push_back(c.ToJson());
  Json acceptance_list = Json::array();
  for (const Acceptance& a : accepted) {
    acceptance_list.push_back(Json{{"clause_id", a.clause_id},
                                   {"digest", a.digest},
                                   {"stage", a.stage},
                                   {"by", a.by},
                                   {"accepted_at",
                                    FormatTimestamp(a.accepted_at)}});
  }
  return Json{{"session_id", session_id},
              {"querier", querier},
              {"operator", service_operator.empty() ? Json(nullptr)
                                                    : Json(service_operator)},
              {"resource_operator", nullptr},
              {"requested", requested.ToJson()},
              {"stage", stage},
              {"total_stages", total_stages},
              {"clauses", std::move(clause_list)},
              {"accepted_clauses", std::move(acceptance_list)},
              {"state", SessionStateName(state)},
              {"created_at", FormatTimestamp(created_at)},
              {"last_activity", FormatTimestamp(last_activity)},
              {"begin_seq", begin_seq},
              {"bound_seq", bound_seq}};
}

absl::StatusOr<BindingSession> BindingSession::FromJson(const Json& json) {
  BindingSession s;
  try {
    s.session_id = json.at("session_id").get<std::string>();
    s.querier = json.at("querier").get<std::string>();
    if (!json.at("operator").is_null()) {
      s.service_operator = json.at("operator").get<std::string>();
    }
    COOP_ASSIGN_OR_RETURN(s.requested, Requested::FromJson(json.at("requested")));
    s.stage = json.at("stage").get<int>();
    s.total_stages = json.at("total_stages").get<int>();
    for (const Json& c : json.at("clauses")) {
      s.clauses.push_back(ObligationClause{c.at("clause_id").get<std::string>(),
                                           c.at("stage").get<int>(),
                                           c.at("title").get<std::string>(),
                                           c.at("digest").get<std::string>()});
    }
    for (const Json& a : json.at("accepted_clauses")) {
      Acceptance acc{a.at("clause_id").get<std::string>(),
                     a.at("digest").get<std::string>(), a.at("stage").get<int>(),
                     a.at("by").get<std::string>(), 0};
      COOP_ASSIGN_OR_RETURN(acc.accepted_at,
                            ParseTimestamp(a.at("accepted_at").get<std::string>()));
      s.accepted.push_back(std::move(acc));
    }
    const std::string state = json.at("state").get<std::string>();
    s.state = state == "bound"     ? SessionState::kBound
              : state == "aborted" ? SessionState::kAborted
              : state == "expired" ? SessionState::kExpired
                                   : SessionState::kInProgress;
    COOP_ASSIGN_OR_RETURN(s.created_at,
                          ParseTimestamp(json.at("created_at").get<std::string>()));
    COOP_ASSIGN_OR_RETURN(
        s.last_activity,
        ParseTimestamp(json.at("last_activity").get<std::string>()));
    s.begin_seq = json.at("begin_seq").get<uint64_t>();
    s.bound_seq = json.at("bound_seq").get<uint64_t>();
  } catch (const Json::exception&) {
    return Bad("session");
  }
  return s;
}

TokenState AccessToken::StateAt(Timestamp now) const {
  if (revoked) return TokenState::kRevoked;
  if (now >= expires_at) return TokenState::kExpired;
  return TokenState::kActive;
}

Json AccessToken::ToJson() const {
  return Json{{"token_hash", token_hash},
              {"session_id", session_id},
              {"holder", holder},
              {"querier", querier},
              {"grants", grants.ToJson()},
              {"issued_at", FormatTimestamp(issued_at)},
              {"expires_at", FormatTimestamp(expires_at)},
              {"revoked", revoked},
              {"mint_seq", mint_seq},
              {"session_seq", session_seq}};
}

absl::StatusOr<AccessToken> AccessToken::FromJson(const Json& json) {
  AccessToken t;
  try {
    t.token_hash = json.at("token_hash").get<std::string>();
    t.session_id = json.at("session_id").get<std::string>();
    t.holder = json.at("holder").get<std::string>();
    t.querier = json.at("querier").get<std::string>();
    COOP_ASSIGN_OR_RETURN(t.grants, Requested::FromJson(json.at("grants")));
    COOP_ASSIGN_OR_RETURN(t.issued_at,
                          ParseTimestamp(json.at("issued_at").get<std::string>()));
    COOP_ASSIGN_OR_RETURN(
        t.expires_at, ParseTimestamp(json.at("expires_at").get<std::string>()));
    t.revoked = json.at("revoked").get<bool>();
    t.mint_seq = json.at("mint_seq").get<uint64_t>();
    t.session_seq = json.at("session_seq").get<uint64_t>();
  } catch (const Json::exception&) {
    return Bad("token");
  }
  return t;
}

Json Introspection::ToJson() const {
  if (!active) return Json{{"active", false}};
  return Json{{"active", true},
              {"holder", holder},
              {"grants", grants.ToJson()},
              {"expires_at", FormatTimestamp(expires_at)},
              {"session_id", session_id}};
}

absl::StatusOr<std::unique_ptr<BindingService>> BindingService::Open(
    const std::filesystem::path& path, BindingConfig config,
    const Clock* clock, IdSource* ids,
    const registry::AlgorithmRegistry* algorithms, audit::AuditLog* audit,
    bool sync_writes) {
  if (config.stages < 1 || config.token_lifetime <= 0 ||
      config.session_idle <= 0) {
    return InvalidArgument("bad-config", "binding");
  }
  std::unique_ptr<Journal> journal = std::make_unique<Journal>();
  std::vector<Json> lines;
  if (!path.empty()) {
    COOP_ASSIGN_OR_RETURN(lines, Journal::ReadAll(path));
    COOP_ASSIGN_OR_RETURN(journal, Journal::Open(path, sync_writes));
  }
  std::unique_ptr<BindingService> svc(new BindingService(
      std::move(config), clock, ids, algorithms, audit, std::move(journal)));
  for (const Json& line : lines) {
    const std::string kind = line.value("kind", "");
    if (kind == "session") {
      COOP_ASSIGN_OR_RETURN(BindingSession s,
                            BindingSession::FromJson(line["body"]));
      svc->sessions_[s.session_id] = std::move(s);
    } else if (kind == "token") {
      COOP_ASSIGN_OR_RETURN(AccessToken t, AccessToken::FromJson(line["body"]));
      svc->tokens_[t.token_hash] = std::move(t);
    } else {
      return Bad("kind");
    }
  }
  return svc;
}

std::vector<ObligationClause> BindingService::ClausesFor(
    const Requested& requested) const {
  const ClauseTemplate service{
      "Service terms",
      coop::StrCat("service-terms/1\ncooperative=", config_.cooperative_name,
                   "\nThe client and the operator hosting it accept the "
                   "cooperative's terms of service and are each accountable "
                   "for their own use of this authorization.")};
  const ClauseTemplate usage{
      "Data usage terms",
      coop::StrCat("data-usage-terms/1\ncooperative=", config_.cooperative_name,
                   "\nResults are used only as released by the cooperative. "
                   "No attempt is made to re-identify members, and results "
                   "are not transferred onward.")};
  const ClauseTemplate purpose{
      "Purpose-specific terms",
      coop::StrCat("purpose-terms/1\nalgorithm=", requested.algo.ToString(),
                   "\nscope=", requested.scope.ToJson().dump(),
                   "\npurpose=", requested.purpose,
                   "\nResults are used for the stated purpose only.")};

  std::vector<std::vector<const ClauseTemplate*>> stages(config_.stages);
  const int n = config_.stages;
  if (n == 1) {
    stages[0] = {&service, &usage, &purpose};
  } else if (n == 2) {
    stages[0] = {&service, &usage};
    stages[1] = {&purpose};
  } else {
    stages[0] = {&service};
    for (int s = 1; s < n - 1; ++s) stages[s] = {&usage};
    stages[n - 1] = {&purpose};
  }

  std::vector<ObligationClause> out;
  for (int s = 0; s < n; ++s) {
    for (size_t i = 0; i < stages[s].size(); ++i) {
      const ClauseTemplate& t = *stages[s][i];
      std::string text = t.text;
      if (&t == &usage && n > 3) {
        coop::StrAppend(&text, "\npart=", s, "/", n - 2);
      }
      std::string id = coop::StrCat("C", s + 1);
      if (i > 0) coop::StrAppend(&id, ".", i + 1);
      out.push_back(ObligationClause{std::move(id), s + 1, t.title,
                                     crypto::Sha256Hex(text)});
    }
  }
  return out;
}

absl::Status BindingService::PersistSession(const BindingSession& session) {
  return journal_->Append(Json{{"kind", "session"}, {"body", session.ToJson()}});
}

absl::Status BindingService::PersistToken(const AccessToken& token) {
  return journal_->Append(Json{{"kind", "token"}, {"body", token.ToJson()}});
}

absl::StatusOr<AdvanceResult> BindingService::Begin(
    const Principal& querier, const Principal* service_operator,
    Requested requested) {
  if (querier.role != Role::kQuerier &&
      querier.role != Role::kCooperativeSelf) {
    return PermissionDenied("wrong-role", querier.id);
  }
  if (service_operator != nullptr) {
    if (service_operator->id == querier.id) {
      return InvalidArgument("distinct-principals-required");
    }
    if (service_operator->role != Role::kOperator) {
      return PermissionDenied("wrong-role", service_operator->id);
    }
  }
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest manifest,
                        algorithms_->Get(requested.algo));
  if (manifest.vetting.state != registry::VettingState::kVetted) {
    return FailedPrecondition("not-vetted", requested.algo.ToString());
  }
  const bool single = requested.scope.kind == Scope::Kind::kSingleSubject;
  if (!single && manifest.output_mode != registry::OutputMode::kAggregate) {
    return InvalidArgument("scope-mode-mismatch");
  }
  if (!manifest.purpose_tags.empty() &&
      std::find(manifest.purpose_tags.begin(), manifest.purpose_tags.end(),
                requested.purpose) == manifest.purpose_tags.end()) {
    return InvalidArgument("purpose-not-allowed", requested.purpose);
  }

  BindingSession s;
  s.querier = querier.id;
  if (service_operator != nullptr) s.service_operator = service_operator->id;
  s.clauses = ClausesFor(requested);
  s.requested = std::move(requested);
  s.total_stages = config_.stages;
  s.created_at = s.last_activity = clock_->Now();

  std::unique_lock lock(mu_);
  s.session_id = ids_->Next("sess");
  std::map<std::string, std::string> refs{
      {"session", s.session_id},
      {"querier", s.querier},
      {"algo", s.requested.algo.ToString()},
      {"purpose", s.requested.purpose}};
  if (!s.service_operator.empty()) refs["operator"] = s.service_operator;
  if (s.requested.scope.kind == Scope::Kind::kSingleSubject) {
    refs[audit::kRefSubject] = s.requested.scope.subject();
  }
  COOP_ASSIGN_OR_RETURN(
      s.begin_seq,
      audit_->Append({audit::EventType::kSessionStage, "begin", querier.id,
                      std::move(refs)}));
  COOP_RETURN_IF_ERROR(PersistSession(s));
  sessions_[s.session_id] = s;
  AdvanceResult result{s, s.ClausesOfStage(1), {}};
  return result;
}

absl::Status BindingService::ExpireIfIdle(BindingSession& session,
                                          Timestamp now) {
  if (session.state != SessionState::kInProgress ||
      now - session.last_activity < config_.session_idle) {
    return absl::OkStatus();
  }
  session.state = SessionState::kExpired;
  COOP_RETURN_IF_ERROR(audit_
                           ->Append({audit::EventType::kSessionStage,
                                     "expire",
                                     session.querier,
                                     {{"session", SessionRef(session)}}})
                           .status());
  return PersistSession(session);
}

absl::StatusOr<std::string> BindingService::Mint(const BindingSession& session,
                                                 const PrincipalId& holder,
                                                 std::string_view action) {
  std::string bearer = crypto::RandomToken();
  AccessToken t;
  t.token_hash = crypto::Sha256Hex(bearer);
  t.session_id = session.session_id;
  t.holder = holder;
  t.querier = session.querier;
  t.grants = session.requested;
  t.issued_at = clock_->Now();
  t.expires_at = t.issued_at + config_.token_lifetime;
  t.session_seq = session.bound_seq;
  COOP_ASSIGN_OR_RETURN(t.mint_seq,
                        audit_->Append({audit::EventType::kToken,
                                        std::string(action),
                                        holder,
                                        {{"session", session.session_id},
                                         {"holder", holder},
                                         {"token_ref", t.ref()}}}));
  COOP_RETURN_IF_ERROR(PersistToken(t));
  tokens_[t.token_hash] = std::move(t);
  return bearer;
}

absl::StatusOr<AdvanceResult> BindingService::Advance(
    std::string_view session_id, const PrincipalId& actor) {
  const Timestamp now = clock_->Now();
  std::unique_lock lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return NotFound("unknown-session", session_id);
  BindingSession& s = it->second;
  const std::vector<PrincipalId> parties = s.parties();
  if (std::find(parties.begin(), parties.end(), actor) == parties.end()) {
    return PermissionDenied("not-party");
  }
  COOP_RETURN_IF_ERROR(ExpireIfIdle(s, now));
  switch (s.state) {
    case SessionState::kAborted:
      return FailedPrecondition("session-aborted", session_id);
    case SessionState::kExpired:
      return FailedPrecondition("session-expired", session_id);
    case SessionState::kBound:
      return FailedPrecondition("session-bound", session_id);
    case SessionState::kInProgress:
      break;
  }
  const int current = s.stage + 1;
  if (s.Accepted(actor, current)) {
    return FailedPrecondition("out-of-order", session_id);
  }

  BindingSession next = s;
  for (const ObligationClause& c : next.ClausesOfStage(current)) {
    next.accepted.push_back(Acceptance{c.clause_id, c.digest, current, actor, now});
  }
  next.last_activity = now;
  COOP_RETURN_IF_ERROR(audit_
                           ->Append({audit::EventType::kSessionStage,
                                     "accept",
                                     actor,
                                     {{"session", next.session_id},
                                      {"stage", std::to_string(current)}}})
                           .status());
  const bool stage_done =
      std::all_of(parties.begin(), parties.end(), [&](const PrincipalId& p) {
        return next.Accepted(p, current);
      });
  if (stage_done) next.stage = current;
  if (next.stage == next.total_stages) {
    next.state = SessionState::kBound;
    COOP_ASSIGN_OR_RETURN(
        next.bound_seq,
        audit_->Append({audit::EventType::kSessionStage,
                        "bound",
                        actor,
                        {{"session", next.session_id}}}));
  }
  COOP_RETURN_IF_ERROR(PersistSession(next));
  s = next;

  AdvanceResult result;
  if (s.state == SessionState::kBound) {
    for (const PrincipalId& p : parties) {
      COOP_ASSIGN_OR_RETURN(std::string bearer, Mint(s, p, "mint"));
      if (p == actor) {
        result.token = std::move(bearer);
      } else {
        unclaimed_[{s.session_id, p}] = std::move(bearer);
      }
    }
  } else {
    // The acting party sees what it will accept next; that is the current
    // stage again while the other party has not caught up.
    result.next_clauses =
        s.ClausesOfStage(s.Accepted(actor, s.stage + 1) ? s.stage + 2
                                                        : s.stage + 1);
  }
  result.session = s;
  return result;
}

absl::StatusOr<BindingSession> BindingService::Abort(
    std::string_view session_id, const PrincipalId& actor) {
  std::unique_lock lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return NotFound("unknown-session", session_id);
  BindingSession& s = it->second;
  const std::vector<PrincipalId> parties = s.parties();
  if (std::find(parties.begin(), parties.end(), actor) == parties.end()) {
    return PermissionDenied("not-party");
  }
  COOP_RETURN_IF_ERROR(ExpireIfIdle(s, clock_->Now()));
  if (s.state == SessionState::kAborted) return s;
  if (s.state == SessionState::kBound) {
    return FailedPrecondition("session-bound", session_id);
  }
  if (s.state == SessionState::kExpired) {
    return FailedPrecondition("session-expired", session_id);
  }
  BindingSession next = s;
  next.state = SessionState::kAborted;
  next.last_activity = clock_->Now();
  COOP_RETURN_IF_ERROR(audit_
                           ->Append({audit::EventType::kSessionStage,
                                     "abort",
                                     actor,
                                     {{"session", next.session_id}}})
                           .status());
  COOP_RETURN_IF_ERROR(PersistSession(next));
  s = std::move(next);
  return s;
}

absl::StatusOr<std::string> BindingService::ClaimToken(
    std::string_view session_id, const PrincipalId& actor) {
  std::unique_lock lock(mu_);
  auto it = unclaimed_.find({std::string(session_id), actor});
  if (it == unclaimed_.end()) return NotFound("no-unclaimed-token");
  std::string bearer = std::move(it->second);
  unclaimed_.erase(it);
  return bearer;
}

absl::StatusOr<std::string> BindingService::Refresh(std::string_view token,
                                                    const PrincipalId& actor) {
  const std::string hash = crypto::Sha256Hex(token);
  std::unique_lock lock(mu_);
  auto it = tokens_.find(hash);
  if (it == tokens_.end() || it->second.revoked || it->second.holder != actor) {
    return Unauthenticated("invalid-token");
  }
  auto session = sessions_.find(it->second.session_id);
  if (session == sessions_.end() ||
      session->second.state != SessionState::kBound) {
    return Unauthenticated("invalid-token");
  }
  AccessToken revoked = it->second;
  revoked.revoked = true;
  COOP_RETURN_IF_ERROR(audit_
                           ->Append({audit::EventType::kToken,
                                     "revoke",
                                     actor,
                                     {{"session", revoked.session_id},
                                      {"holder", revoked.holder},
                                      {"token_ref", revoked.ref()}}})
                           .status());
  COOP_RETURN_IF_ERROR(PersistToken(revoked));
  it->second = std::move(revoked);
  return Mint(session->second, actor, "refresh");
}

Introspection BindingService::Introspect(std::string_view token) const {
  Introspection out;
  if (token.empty()) return out;
  const std::string hash = crypto::Sha256Hex(token);
  const Timestamp now = clock_->Now();
  std::shared_lock lock(mu_);
  auto it = tokens_.find(hash);
  if (it == tokens_.end() || it->second.StateAt(now) != TokenState::kActive) {
    return out;
  }
  auto session = sessions_.find(it->second.session_id);
  if (session == sessions_.end() ||
      session->second.state != SessionState::kBound) {
    return out;
  }
  const AccessToken& t = it->second;
  out.active = true;
  out.holder = t.holder;
  out.querier = t.querier;
  out.grants = t.grants;
  out.expires_at = t.expires_at;
  out.session_id = t.session_id;
  out.token_seq = t.mint_seq;
  out.session_seq = t.session_seq;
  return out;
}

absl::StatusOr<size_t> BindingService::RevokeForSubject(const MemberId& subject,
                                                        const AlgoRef& algo) {
  const Timestamp now = clock_->Now();
  std::unique_lock lock(mu_);
  size_t count = 0;
  for (auto& [hash, t] : tokens_) {
    if (t.grants.scope.kind != Scope::Kind::kSingleSubject ||
        t.grants.scope.subject() != subject || t.grants.algo != algo ||
        t.StateAt(now) != TokenState::kActive) {
      continue;
    }
    AccessToken revoked = t;
    revoked.revoked = true;
    COOP_RETURN_IF_ERROR(audit_
                             ->Append({audit::EventType::kToken,
                                       "revoke",
                                       subject,
                                       {{"session", revoked.session_id},
                                        {"holder", revoked.holder},
                                        {"token_ref", revoked.ref()},
                                        {audit::kRefSubject, subject}}})
                             .status());
    COOP_RETURN_IF_ERROR(PersistToken(revoked));
    t = std::move(revoked);
    ++count;
  }
  return count;
}

absl::StatusOr<BindingSession> BindingService::GetSession(
    std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return NotFound("unknown-session", id);
  BindingSession s = it->second;
  if (s.state == SessionState::kInProgress &&
      clock_->Now() - s.last_activity >= config_.session_idle) {
    s.state = SessionState::kExpired;
  }
  return s;
}

std::vector<AccessToken> BindingService::TokensForSession(
    std::string_view id) const {
  std::shared_lock lock(mu_);
  std::vector<AccessToken> out;
  for (const auto& [hash, t] : tokens_) {
    if (t.session_id == id) out.push_back(t);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.mint_seq < b.mint_seq;
  });
  return out;
}

std::vector<BindingSession> BindingService::AllSessions() const {
  std::shared_lock lock(mu_);
  std::vector<BindingSession> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

}  // namespace coop::authz
