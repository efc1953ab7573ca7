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

#include "coop/authz/consent.h"

#include <algorithm>
#include <mutex>
#include <utility>

#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::authz {
namespace {

std::string_view GrantStateName(ConsentGrant::State s) {
  return s == ConsentGrant::State::kActive ? "active" : "withdrawn";
}

std::string_view RequestStateName(ConsentRequest::State s) {
  switch (s) {
    case ConsentRequest::State::kPending: return "pending";
    case ConsentRequest::State::kApproved: return "approved";
    case ConsentRequest::State::kDenied: return "denied";
  }
  return "";
}

absl::StatusOr<Timestamp> TimeAt(const Json& json, const char* key) {
  return ParseTimestamp(json.at(key).get<std::string>());
}

absl::Status Bad(std::string_view what) {
  return InvalidArgument("bad-consent-record", what);
}

}  // namespace

bool ConsentGrant::ActiveAt(Timestamp t) const {
  Timestamp end = valid_until;
  if (withdrawal_at) end = std::min(end, *withdrawal_at);
  return granted_at <= t && t < end;
}

Json ConsentGrant::ToJson() const {
  Json out{{"grant_id", grant_id},
           {"subject", subject},
           {"algo", AlgoRefToJson(algo)},
           {"purpose", purpose},
           {"audience", audience},
           {"granted_at", FormatTimestamp(granted_at)},
           {"valid_until", FormatTimestamp(valid_until)},
           {"state", GrantStateName(state)},
           {"withdrawal_at", nullptr},
           {"audit_seq", audit_seq}};
  if (withdrawal_at) out["withdrawal_at"] = FormatTimestamp(*withdrawal_at);
  return out;
}

absl::StatusOr<ConsentGrant> ConsentGrant::FromJson(const Json& json) {
  ConsentGrant g;
  try {
    g.grant_id = json.at("grant_id").get<std::string>();
    g.subject = json.at("subject").get<std::string>();
    COOP_ASSIGN_OR_RETURN(g.algo, AlgoRefFromJson(json.at("algo")));
    g.purpose = json.at("purpose").get<std::string>();
    g.audience = json.at("audience").get<std::string>();
    COOP_ASSIGN_OR_RETURN(g.granted_at, TimeAt(json, "granted_at"));
    COOP_ASSIGN_OR_RETURN(g.valid_until, TimeAt(json, "valid_until"));
    g.state = json.at("state") == "withdrawn" ? State::kWithdrawn
                                              : State::kActive;
    if (!json.at("withdrawal_at").is_null()) {
      COOP_ASSIGN_OR_RETURN(g.withdrawal_at, TimeAt(json, "withdrawal_at"));
    }
    g.audit_seq = json.at("audit_seq").get<uint64_t>();
  } catch (const Json::exception&) {
    return Bad("grant");
  }
  return g;
}

Json ConsentRequest::ToJson() const {
  return Json{{"handle", handle},
              {"subject", subject},
              {"requester", requester},
              {"algo", AlgoRefToJson(algo)},
              {"purpose", purpose},
              {"scope", scope.ToJson()},
              {"requested_at", FormatTimestamp(requested_at)},
              {"expires_at", FormatTimestamp(expires_at)},
              {"state", RequestStateName(state)}};
}

absl::StatusOr<ConsentRequest> ConsentRequest::FromJson(const Json& json) {
  ConsentRequest r;
  try {
    r.handle = json.at("handle").get<std::string>();
    r.subject = json.at("subject").get<std::string>();
    r.requester = json.at("requester").get<std::string>();
    COOP_ASSIGN_OR_RETURN(r.algo, AlgoRefFromJson(json.at("algo")));
    r.purpose = json.at("purpose").get<std::string>();
    COOP_ASSIGN_OR_RETURN(r.scope, Scope::FromJson(json.at("scope")));
    COOP_ASSIGN_OR_RETURN(r.requested_at, TimeAt(json, "requested_at"));
    COOP_ASSIGN_OR_RETURN(r.expires_at, TimeAt(json, "expires_at"));
    const std::string state = json.at("state").get<std::string>();
    r.state = state == "approved" ? State::kApproved
              : state == "denied" ? State::kDenied
                                  : State::kPending;
  } catch (const Json::exception&) {
    return Bad("request");
  }
  return r;
}

Json Directive::ToJson() const {
  return Json{{"directive_id", directive_id},
              {"subject", subject},
              {"algo", AlgoRefToJson(algo)},
              {"purpose", purpose},
              {"audience", audience},
              {"issued_at", FormatTimestamp(issued_at)},
              {"expires_at", FormatTimestamp(expires_at)},
              {"credential_hash", credential_hash},
              {"audit_seq", audit_seq}};
}

absl::StatusOr<Directive> Directive::FromJson(const Json& json) {
  Directive d;
  try {
    d.directive_id = json.at("directive_id").get<std::string>();
    d.subject = json.at("subject").get<std::string>();
    COOP_ASSIGN_OR_RETURN(d.algo, AlgoRefFromJson(json.at("algo")));
    d.purpose = json.at("purpose").get<std::string>();
    d.audience = json.at("audience").get<std::string>();
    COOP_ASSIGN_OR_RETURN(d.issued_at, TimeAt(json, "issued_at"));
    COOP_ASSIGN_OR_RETURN(d.expires_at, TimeAt(json, "expires_at"));
    d.credential_hash = json.at("credential_hash").get<std::string>();
    d.audit_seq = json.at("audit_seq").get<uint64_t>();
  } catch (const Json::exception&) {
    return Bad("directive");
  }
  return d;
}

absl::StatusOr<std::unique_ptr<ConsentRegistry>> ConsentRegistry::Open(
    const std::filesystem::path& path, const Clock* clock, IdSource* ids,
    const registry::AlgorithmRegistry* algorithms, audit::AuditLog* audit,
    bool sync_writes) {
  std::unique_ptr<Journal> journal = std::make_unique<Journal>();
  std::vector<Json> lines;
  if (!path.empty()) {
    COOP_ASSIGN_OR_RETURN(lines, Journal::ReadAll(path));
    COOP_ASSIGN_OR_RETURN(journal, Journal::Open(path, sync_writes));
  }
  std::unique_ptr<ConsentRegistry> reg(
      new ConsentRegistry(clock, ids, algorithms, audit, std::move(journal)));
  for (const Json& line : lines) {
    const std::string kind = line.value("kind", "");
    if (kind == "grant") {
      COOP_ASSIGN_OR_RETURN(ConsentGrant g, ConsentGrant::FromJson(line["body"]));
      reg->grants_[g.grant_id] = std::move(g);
    } else if (kind == "request") {
      COOP_ASSIGN_OR_RETURN(ConsentRequest r,
                            ConsentRequest::FromJson(line["body"]));
      reg->requests_[r.handle] = std::move(r);
    } else if (kind == "directive") {
      COOP_ASSIGN_OR_RETURN(Directive d, Directive::FromJson(line["body"]));
      reg->directives_by_hash_[d.credential_hash] = std::move(d);
    } else {
      return Bad("kind");
    }
  }
  return reg;
}

absl::Status ConsentRegistry::Persist(std::string_view kind, Json body) {
  return journal_->Append(Json{{"kind", kind}, {"body", std::move(body)}});
}

absl::StatusOr<ConsentGrant> ConsentRegistry::Grant(const PrincipalId& actor,
                                                    GrantRequest request) {
  if (actor != request.subject) return PermissionDenied("not-subject");
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest manifest,
                        algorithms_->Get(request.algo));
  if (manifest.vetting.state != registry::VettingState::kVetted) {
    return FailedPrecondition("not-vetted", request.algo.ToString());
  }
  if (!crypto::ConstantTimeEquals(request.description_digest,
                                  manifest.DescriptionDigest())) {
    return FailedPrecondition("description-not-presented");
  }
  if (request.purpose.empty() || request.audience.empty()) {
    return InvalidArgument("bad-request");
  }
  const Timestamp now = clock_->Now();
  if (request.valid_until <= now) return InvalidArgument("bad-validity");

  std::unique_lock lock(mu_);
  ConsentRequest* pending = nullptr;
  if (!request.handle.empty()) {
    auto it = requests_.find(request.handle);
    if (it == requests_.end() || it->second.subject != request.subject) {
      return NotFound("unknown-request", request.handle);
    }
    pending = &it->second;
  }
  ConsentGrant g;
  g.grant_id = ids_->Next("grant");
  g.subject = request.subject;
  g.algo = request.algo;
  g.purpose = request.purpose;
  g.audience = request.audience;
  g.granted_at = now;
  g.valid_until = request.valid_until;
  std::map<std::string, std::string> refs{
      {"grant", g.grant_id},
      {"subject", g.subject},
      {"algo", g.algo.ToString()},
      {"purpose", g.purpose},
      {"audience", g.audience}};
  if (pending != nullptr) refs["handle"] = pending->handle;
  COOP_ASSIGN_OR_RETURN(
      g.audit_seq,
      audit_->Append({audit::EventType::kConsent, "grant", actor, refs}));
  COOP_RETURN_IF_ERROR(Persist("grant", g.ToJson()));
  if (pending != nullptr && pending->state == ConsentRequest::State::kPending) {
    pending->state = ConsentRequest::State::kApproved;
    COOP_RETURN_IF_ERROR(Persist("request", pending->ToJson()));
  }
  grants_[g.grant_id] = g;
  return g;
}

absl::StatusOr<ConsentGrant> ConsentRegistry::Withdraw(
    const PrincipalId& actor, std::string_view grant_id) {
  std::unique_lock lock(mu_);
  auto it = grants_.find(grant_id);
  if (it == grants_.end()) return NotFound("unknown-grant", grant_id);
  ConsentGrant& g = it->second;
  if (g.subject != actor) return PermissionDenied("not-subject");
  if (g.state == ConsentGrant::State::kWithdrawn) return g;
  ConsentGrant updated = g;
  updated.state = ConsentGrant::State::kWithdrawn;
  updated.withdrawal_at = clock_->Now();
  COOP_RETURN_IF_ERROR(
      audit_
          ->Append({audit::EventType::kConsent,
                    "withdraw",
                    actor,
                    {{"grant", g.grant_id},
                     {"subject", g.subject},
                     {"algo", g.algo.ToString()}}})
          .status());
  COOP_RETURN_IF_ERROR(Persist("grant", updated.ToJson()));
  g = std::move(updated);
  return g;
}

std::optional<ConsentGrant> ConsentRegistry::Check(const MemberId& subject,
                                                   const AlgoRef& algo,
                                                   std::string_view purpose,
                                                   std::string_view audience,
                                                   Timestamp at) const {
  std::shared_lock lock(mu_);
  const ConsentGrant* best = nullptr;
  for (const auto& [id, g] : grants_) {
    if (g.subject != subject || g.algo != algo || g.purpose != purpose) {
      continue;
    }
    if (g.audience != kAnyAudience && g.audience != audience) continue;
    if (!g.ActiveAt(at)) continue;
    if (best == nullptr || g.granted_at < best->granted_at ||
        (g.granted_at == best->granted_at && g.audit_seq < best->audit_seq)) {
      best = &g;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

absl::StatusOr<ConsentGrant> ConsentRegistry::GetGrant(
    std::string_view grant_id) const {
  std::shared_lock lock(mu_);
  auto it = grants_.find(grant_id);
  if (it == grants_.end()) return NotFound("unknown-grant", grant_id);
  return it->second;
}

std::vector<ConsentGrant> ConsentRegistry::GrantsOf(
    const MemberId& subject) const {
  std::shared_lock lock(mu_);
  std::vector<ConsentGrant> out;
  for (const auto& [id, g] : grants_) {
    if (g.subject == subject) out.push_back(g);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.audit_seq < b.audit_seq;
  });
  return out;
}

absl::StatusOr<ConsentRequest> ConsentRegistry::OpenRequest(
    const PrincipalId& requester, const MemberId& subject, const AlgoRef& algo,
    std::string_view purpose, const Scope& scope) {
  const Timestamp now = clock_->Now();
  std::unique_lock lock(mu_);
  for (const auto& [handle, r] : requests_) {
    if (r.state == ConsentRequest::State::kPending && now < r.expires_at &&
        r.subject == subject && r.requester == requester && r.algo == algo &&
        r.purpose == purpose && r.scope == scope) {
      return r;
    }
  }
  ConsentRequest r;
  r.handle = ids_->Next("creq");
  r.subject = subject;
  r.requester = requester;
  r.algo = algo;
  r.purpose = std::string(purpose);
  r.scope = scope;
  r.requested_at = now;
  r.expires_at = now + kConsentRequestLifetime;
  COOP_RETURN_IF_ERROR(
      audit_
          ->Append({audit::EventType::kConsent,
                    "request",
                    requester,
                    {{"handle", r.handle},
                     {"subject", subject},
                     {"algo", algo.ToString()},
                     {"purpose", r.purpose}}})
          .status());
  COOP_RETURN_IF_ERROR(Persist("request", r.ToJson()));
  requests_[r.handle] = r;
  return r;
}

std::vector<ConsentRequest> ConsentRegistry::Pending(
    const MemberId& subject) const {
  const Timestamp now = clock_->Now();
  std::shared_lock lock(mu_);
  std::vector<ConsentRequest> out;
  for (const auto& [handle, r] : requests_) {
    if (r.subject == subject && r.state == ConsentRequest::State::kPending &&
        now < r.expires_at) {
      out.push_back(r);
    }
  }
  return out;
}

absl::StatusOr<ConsentRequest> ConsentRegistry::Deny(const PrincipalId& actor,
                                                     std::string_view handle) {
  std::unique_lock lock(mu_);
  auto it = requests_.find(handle);
  if (it == requests_.end()) return NotFound("unknown-request", handle);
  ConsentRequest& r = it->second;
  if (r.subject != actor) return PermissionDenied("not-subject");
  if (r.state != ConsentRequest::State::kPending) {
    return FailedPrecondition("request-closed", handle);
  }
  COOP_RETURN_IF_ERROR(audit_
                           ->Append({audit::EventType::kConsent,
                                     "deny",
                                     actor,
                                     {{"handle", r.handle},
                                      {"subject", r.subject},
                                      {"algo", r.algo.ToString()}}})
                           .status());
  ConsentRequest updated = r;
  updated.state = ConsentRequest::State::kDenied;
  COOP_RETURN_IF_ERROR(Persist("request", updated.ToJson()));
  r = std::move(updated);
  return r;
}

absl::StatusOr<DirectiveTicket> ConsentRegistry::RecordDirective(
    const MemberId& subject, const AlgoRef& algo, std::string_view purpose,
    std::string_view audience) {
  DirectiveTicket ticket;
  ticket.credential =
      coop::StrCat(kDirectiveCredentialPrefix, crypto::RandomToken());
  Directive& d = ticket.directive;
  d.subject = subject;
  d.algo = algo;
  d.purpose = std::string(purpose);
  d.audience = std::string(audience);
  d.issued_at = clock_->Now();
  d.expires_at = d.issued_at + kDirectiveLifetime;
  d.credential_hash = crypto::Sha256Hex(ticket.credential);

  std::unique_lock lock(mu_);
  d.directive_id = ids_->Next("dir");
  COOP_ASSIGN_OR_RETURN(
      d.audit_seq,
      audit_->Append({audit::EventType::kConsent,
                      "directive",
                      subject,
                      {{"directive", d.directive_id},
                       {"subject", subject},
                       {"algo", algo.ToString()},
                       {"purpose", d.purpose},
                       {"audience", d.audience}}}));
  COOP_RETURN_IF_ERROR(Persist("directive", d.ToJson()));
  directives_by_hash_[d.credential_hash] = d;
  return ticket;
}

std::optional<Directive> ConsentRegistry::LookupDirective(
    std::string_view credential) const {
  if (!credential.starts_with(kDirectiveCredentialPrefix)) return std::nullopt;
  const std::string hash = crypto::Sha256Hex(credential);
  const Timestamp now = clock_->Now();
  std::shared_lock lock(mu_);
  auto it = directives_by_hash_.find(hash);
  if (it == directives_by_hash_.end() || now >= it->second.expires_at) {
    return std::nullopt;
  }
  return it->second;
}

}  // namespace coop::authz
