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

#include "coop/node/node.h"

#include <algorithm>
#include <utility>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "coop/assertion/document.h"
#include "coop/common/crypto.h"
#include "coop/common/journal.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::node {
namespace {

constexpr Role kM = Role::kMember;
constexpr Role kQ = Role::kQuerier;
constexpr Role kO = Role::kOperator;
constexpr Role kS = Role::kSteward;
constexpr Role kC = Role::kCooperativeSelf;

EndpointSpec Open(std::string method, std::string pattern) {
  return {std::move(method), std::move(pattern), true, {}};
}
EndpointSpec For(std::string method, std::string pattern,
                 std::set<Role> roles) {
  return {std::move(method), std::move(pattern), false, std::move(roles)};
}

std::vector<std::string> Segments(std::string_view path) {
  std::vector<std::string> out =
      absl::StrSplit(AbslView(path), '/', absl::SkipEmpty());
  return out;
}

absl::Status BadRequest(std::string_view field) {
  return InvalidArgument("bad-request", field);
}

absl::StatusOr<std::string> StringField(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    return BadRequest(key);
  }
  return body[key].get<std::string>();
}

std::string OptionalString(const Json& body, const char* key,
                           std::string fallback = {}) {
  if (body.is_object() && body.contains(key) && body[key].is_string()) {
    return body[key].get<std::string>();
  }
  return fallback;
}

bool OptionalBool(const Json& body, const char* key) {
  return body.is_object() && body.contains(key) && body[key].is_boolean() &&
         body[key].get<bool>();
}

// Accepts seconds as a number or a duration string such as "24h".
absl::StatusOr<Duration> DurationField(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) return Duration{0};
  const Json& v = body[key];
  if (v.is_number_integer()) return v.get<Duration>();
  if (v.is_string()) return ParseDuration(v.get<std::string>());
  return BadRequest(key);
}

absl::StatusOr<AlgoRef> AlgoField(const Json& body) {
  if (!body.is_object() || !body.contains("algo")) return BadRequest("algo");
  return AlgoRefFromJson(body["algo"]);
}

absl::StatusOr<std::string> BearerCredential(std::string_view header) {
  constexpr std::string_view kPrefix = "Bearer ";
  if (!header.starts_with(kPrefix) || header.size() == kPrefix.size()) {
    return Unauthenticated("unauthenticated");
  }
  return std::string(header.substr(kPrefix.size()));
}

Json ListToJson(const auto& items) {
  Json out = Json::array();
  for (const auto& item : items) out.push_back(item.ToJson());
  return out;
}

// Keys whose presence marks a response as data-bearing.
bool CarriesMemberData(const Json& j) {
  static const std::set<std::string> kForbidden = {
      "records", "cells",   "values",  "wrapped_key", "grant_id",
      "document", "payload", "archive", "segment",     "birth_date"};
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (kForbidden.contains(k) || CarriesMemberData(v)) return true;
    }
  } else if (j.is_array()) {
    for (const Json& v : j) {
      if (CarriesMemberData(v)) return true;
    }
  }
  return false;
}

}  // namespace

Json ApiResponse::json() const {
  absl::StatusOr<Json> j = ParseJson(body);
  return j.ok() ? *std::move(j) : Json(nullptr);
}

const std::vector<EndpointSpec>& AccessTable() {
  static const std::vector<EndpointSpec>* table = new std::vector<EndpointSpec>{
      Open("GET", "/healthz"),
      Open("GET", "/console/meta"),
      Open("GET", "/.well-known/coop-keys"),
      Open("GET", "/members/{id}/assertions/{slug}"),
      For("GET", "/principals/me", {kM, kQ, kO, kS, kC}),
      For("POST", "/principals", {kS}),
      For("GET", "/principals/{id}", {kS}),
      For("GET", "/algorithms", {kM, kQ, kS, kC}),
      For("POST", "/algorithms", {kS}),
      For("GET", "/algorithms/{id}/{version}/description", {kM, kQ, kS, kC}),
      For("POST", "/authz/session", {kQ, kC}),
      For("GET", "/authz/session/{id}", {kQ, kO, kC}),
      For("POST", "/authz/session/{id}/advance", {kQ, kO, kC}),
      For("POST", "/authz/session/{id}/abort", {kQ, kO, kC}),
      For("POST", "/authz/session/{id}/token", {kQ, kO, kC}),
      For("POST", "/authz/token/refresh", {kQ, kO, kC}),
      For("POST", "/authz/introspect", {kQ, kO, kS, kC}),
      For("POST", "/consent/grant", {kM}),
      For("POST", "/consent/{id}/withdraw", {kM}),
      For("GET", "/consent/pending", {kM}),
      For("POST", "/consent/pending/{handle}/deny", {kM}),
      For("GET", "/consent/grants", {kM}),
      For("POST", "/query/execute", {kQ, kC}),
      For("POST", "/stores", {kM}),
      For("GET", "/stores", {kM, kS}),
      For("GET", "/stores/{id}", {kM, kS}),
      For("POST", "/stores/{id}/records", {kM}),
      For("GET", "/stores/{id}/records", {kM}),
      For("POST", "/stores/{id}/remove", {kM}),
      For("POST", "/stores/{id}/suspend", {kM}),
      For("POST", "/stores/{id}/activate", {kM}),
      For("GET", "/stores/{id}/export", {kM}),
      For("POST", "/stores/import", {kM}),
      For("POST", "/assertions/issue", {kM}),
      For("POST", "/assertions/static", {kM}),
      For("POST", "/assertions/verify", {kM, kQ, kO, kS, kC}),
      For("POST", "/assertions/{id}/receipt", {kQ}),
      For("GET", "/assertions/{id}", {kM, kQ}),
      For("GET", "/assertions/{id}/receipts", {kM}),
      For("GET", "/audit/demonstrate", {kM, kS}),
      For("GET", "/audit/events", {kM, kS}),
      For("GET", "/audit/export", {kS}),
  };
  return *table;
}

std::vector<std::string> CapabilitiesOf(Role role) {
  std::vector<std::string> out;
  for (const EndpointSpec& e : AccessTable()) {
    if (!e.open && e.roles.contains(role)) {
      out.push_back(coop::StrCat(e.method, " ", e.pattern));
    }
  }
  return out;
}

int HttpStatusFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk: return 200;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange: return 400;
    case absl::StatusCode::kUnauthenticated: return 401;
    case absl::StatusCode::kPermissionDenied: return 403;
    case absl::StatusCode::kNotFound: return 404;
    case absl::StatusCode::kAlreadyExists:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kAborted: return 409;
    case absl::StatusCode::kUnavailable: return 503;
    default: return 500;
  }
}

Json ErrorJson(const absl::Status& status) {
  Json out{{"error", ErrorSlug(status)},
           {"message", std::string(status.message())}};
  status.ForEachPayload([&](absl::string_view url, const absl::Cord& value) {
    constexpr absl::string_view kPrefix = "coop/";
    if (absl::StartsWith(url, kPrefix) && url != AbslView(kErrorSlugUrl)) {
      out[std::string(url.substr(kPrefix.size()))] = std::string(value);
    }
  });
  return out;
}

struct Node::Call {
  const ApiRequest& request;
  std::map<std::string, std::string> params;
  std::optional<authz::Principal> principal;
  Json body = Json::object();

  const authz::Principal& who() const { return *principal; }
  const std::string& param(const std::string& k) const { return params.at(k); }
  std::string query(const std::string& k, std::string fallback = {}) const {
    auto it = request.query.find(k);
    return it == request.query.end() ? fallback : it->second;
  }
};

Node::~Node() = default;

absl::StatusOr<std::unique_ptr<Node>> Node::Open(Options options) {
  COOP_RETURN_IF_ERROR(ValidateConfig(options.config));
  if (options.config.operator_mode) {
    return InvalidArgument("bad-config", "operator hosts serve tenants only");
  }
  std::unique_ptr<Node> node(new Node(std::move(options.config)));
  Node& n = *node;
  const NodeConfig& cfg = n.config_;
  if (options.clock == nullptr) {
    n.owned_clock_ = std::make_unique<SystemClock>();
    options.clock = n.owned_clock_.get();
  }
  if (options.ids == nullptr) {
    n.owned_ids_ = std::make_unique<RandomIdSource>();
    options.ids = n.owned_ids_.get();
  }
  n.clock_ = options.clock;
  n.ids_ = options.ids;

  const std::filesystem::path& dir = cfg.data_dir;
  auto file = [&](const char* name) {
    return dir.empty() ? std::filesystem::path() : dir / name;
  };
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return Internal("persistence-dir", ec.message());
  }
  const bool sync = cfg.sync_writes;
  COOP_ASSIGN_OR_RETURN(n.audit_,
                        audit::AuditLog::Open(file("audit.jsonl"), n.clock_, sync));
  COOP_ASSIGN_OR_RETURN(
      n.principals_,
      authz::PrincipalDirectory::Open(file("principals.jsonl"), n.clock_,
                                      n.ids_, n.audit_.get(), sync));
  COOP_ASSIGN_OR_RETURN(
      n.algorithms_,
      registry::AlgorithmRegistry::Open(file("algorithms.jsonl"), n.clock_,
                                        n.audit_.get(), sync));
  COOP_ASSIGN_OR_RETURN(
      n.vault_, pds::KeyVault::Open(cfg.effective_key_dir(), cfg.cooperative_name));
  COOP_ASSIGN_OR_RETURN(
      n.consent_,
      authz::ConsentRegistry::Open(file("consent.jsonl"), n.clock_, n.ids_,
                                   n.algorithms_.get(), n.audit_.get(), sync));
  authz::BindingConfig binding_config;
  binding_config.cooperative_name = cfg.cooperative_name;
  binding_config.stages = cfg.handshake_stages;
  binding_config.token_lifetime = cfg.token_lifetime;
  binding_config.session_idle = cfg.session_idle;
  COOP_ASSIGN_OR_RETURN(
      n.binding_,
      authz::BindingService::Open(file("sessions.jsonl"), binding_config,
                                  n.clock_, n.ids_, n.algorithms_.get(),
                                  n.audit_.get(), sync));
  n.validator_ = std::make_unique<authz::AuthzExecutionValidator>(
      n.binding_.get(), n.consent_.get(), n.clock_);
  COOP_ASSIGN_OR_RETURN(
      n.stores_,
      pds::PdsService::Open({dir, sync, n.clock_, n.ids_, n.audit_.get(),
                             n.vault_.get(), n.principals_.get(),
                             n.validator_.get()}));
  engine::OpalEngine::Options eo;
  eo.results_path = file("results.jsonl");
  eo.sync_writes = sync;
  eo.clock = n.clock_;
  eo.ids = n.ids_;
  eo.algorithms = n.algorithms_.get();
  eo.stores = n.stores_.get();
  eo.binding = n.binding_.get();
  eo.consent = n.consent_.get();
  eo.audit = n.audit_.get();
  eo.policy.k_threshold = cfg.k_threshold;
  COOP_ASSIGN_OR_RETURN(n.engine_, engine::OpalEngine::Open(std::move(eo)));
  COOP_ASSIGN_OR_RETURN(
      n.keys_, assertion::CooperativeKeys::Open(cfg.effective_key_dir(),
                                                cfg.cooperative_name));
  assertion::AssertionService::Options ao;
  ao.path = file("assertions.jsonl");
  ao.sync_writes = sync;
  ao.config.transactional_max = cfg.transactional_max;
  ao.config.static_max = cfg.static_max;
  ao.clock = n.clock_;
  ao.ids = n.ids_;
  ao.keys = n.keys_.get();
  ao.algorithms = n.algorithms_.get();
  ao.principals = n.principals_.get();
  ao.consent = n.consent_.get();
  ao.engine = n.engine_.get();
  ao.audit = n.audit_.get();
  COOP_ASSIGN_OR_RETURN(n.assertions_,
                        assertion::AssertionService::Open(std::move(ao)));

  std::string steward = std::move(options.steward_credential);
  if (steward.empty() && !cfg.steward_credential_file.empty()) {
    COOP_ASSIGN_OR_RETURN(steward, ReadFile(cfg.steward_credential_file));
    while (!steward.empty() && (steward.back() == '\n' || steward.back() == '\r')) {
      steward.pop_back();
    }
  }
  if (!steward.empty() && !n.principals_->Authenticate(steward).ok()) {
    authz::EnrollRequest req;
    req.role = Role::kSteward;
    req.legal_name = coop::StrCat(cfg.cooperative_name, " steward");
    req.credential = steward;
    COOP_RETURN_IF_ERROR(
        n.principals_->Enroll(cfg.cooperative_name, std::move(req)).status());
  }
  n.BuildRoutes();
  return node;
}

void Node::BuildRoutes() {
  const std::map<std::string, Handler> handlers = {
      {"GET /healthz", &Node::Health},
      {"GET /console/meta", &Node::ConsoleMeta},
      {"GET /.well-known/coop-keys", &Node::PublishedKeys},
      {"GET /members/{id}/assertions/{slug}", &Node::PublishedAssertion},
      {"GET /principals/me", &Node::Me},
      {"POST /principals", &Node::Enroll},
      {"GET /principals/{id}", &Node::GetPrincipal},
      {"GET /algorithms", &Node::ListAlgorithms},
      {"POST /algorithms", &Node::RegisterAlgorithm},
      {"GET /algorithms/{id}/{version}/description", &Node::DescribeAlgorithm},
      {"POST /authz/session", &Node::BeginSession},
      {"GET /authz/session/{id}", &Node::GetSessionRoute},
      {"POST /authz/session/{id}/advance", &Node::AdvanceSession},
      {"POST /authz/session/{id}/abort", &Node::AbortSession},
      {"POST /authz/session/{id}/token", &Node::ClaimToken},
      {"POST /authz/token/refresh", &Node::RefreshToken},
      {"POST /authz/introspect", &Node::Introspect},
      {"POST /consent/grant", &Node::GrantConsent},
      {"POST /consent/{id}/withdraw", &Node::WithdrawConsent},
      {"GET /consent/pending", &Node::PendingConsent},
      {"POST /consent/pending/{handle}/deny", &Node::DenyConsent},
      {"GET /consent/grants", &Node::ListGrants},
      {"POST /query/execute", &Node::ExecuteQuery},
      {"POST /stores", &Node::CreateStore},
      {"GET /stores", &Node::ListStores},
      {"GET /stores/{id}", &Node::StoreInfo},
      {"POST /stores/{id}/records", &Node::IngestRecords},
      {"GET /stores/{id}/records", &Node::ReadRecords},
      {"POST /stores/{id}/remove", &Node::RemoveRecords},
      {"POST /stores/{id}/suspend", &Node::SuspendStore},
      {"POST /stores/{id}/activate", &Node::ActivateStore},
      {"GET /stores/{id}/export", &Node::ExportStore},
      {"POST /stores/import", &Node::ImportStore},
      {"POST /assertions/issue", &Node::IssueAssertion},
      {"POST /assertions/static", &Node::IssueStaticAssertion},
      {"POST /assertions/verify", &Node::VerifyAssertion},
      {"POST /assertions/{id}/receipt", &Node::RecordReceipt},
      {"GET /assertions/{id}", &Node::GetAssertion},
      {"GET /assertions/{id}/receipts", &Node::ListReceipts},
      {"GET /audit/demonstrate", &Node::Demonstrate},
      {"GET /audit/events", &Node::AuditEvents},
      {"GET /audit/export", &Node::AuditExport},
  };
  for (const EndpointSpec& spec : AccessTable()) {
    const std::string key = coop::StrCat(spec.method, " ", spec.pattern);
    Route r{&spec, Segments(spec.pattern), handlers.at(key)};
    r.raw_document = key == "GET /assertions/{id}" ||
                     key == "GET /members/{id}/assertions/{slug}";
    routes_.push_back(std::move(r));
  }
}

absl::StatusOr<authz::Principal> Node::Authenticate(
    std::string_view header) const {
  COOP_ASSIGN_OR_RETURN(std::string credential, BearerCredential(header));
  absl::StatusOr<authz::Principal> p = principals_->Authenticate(credential);
  if (!p.ok()) return Unauthenticated("unauthenticated");
  return p;
}

ApiResponse Node::Handle(const ApiRequest& request) {
  auto fail = [](const absl::Status& s) {
    return ApiResponse{HttpStatusFor(s), "application/json", ErrorJson(s).dump()};
  };
  const std::vector<std::string> segments = Segments(request.path);
  const Route* best = nullptr;
  int best_literals = -1;
  bool path_known = false;
  std::map<std::string, std::string> params;
  for (const Route& r : routes_) {
    if (r.segments.size() != segments.size()) continue;
    std::map<std::string, std::string> p;
    int literals = 0;
    bool match = true;
    for (size_t i = 0; i < segments.size() && match; ++i) {
      const std::string& pat = r.segments[i];
      if (pat.size() > 2 && pat.front() == '{' && pat.back() == '}') {
        p[pat.substr(1, pat.size() - 2)] = segments[i];
      } else if (pat == segments[i]) {
        ++literals;
      } else {
        match = false;
      }
    }
    if (!match) continue;
    path_known = true;
    if (r.spec->method != request.method) continue;
    if (literals > best_literals) {
      best = &r;
      best_literals = literals;
      params = std::move(p);
    }
  }
  if (best == nullptr) {
    if (path_known) {
      return ApiResponse{405, "application/json",
                         Json{{"error", "method-not-allowed"}}.dump()};
    }
    return fail(NotFound("no-route", request.path));
  }

  Call call{request, std::move(params), std::nullopt};
  if (!best->spec->open) {
    absl::StatusOr<authz::Principal> who = Authenticate(request.authorization);
    if (!who.ok()) return fail(who.status());
    if (!best->spec->roles.contains(who->role)) {
      return fail(PermissionDenied("role-forbidden"));
    }
    call.principal = *std::move(who);
  }
  if (!request.body.empty()) {
    absl::StatusOr<Json> body = ParseJson(request.body);
    if (!body.ok()) return fail(InvalidArgument("bad-json"));
    call.body = *std::move(body);
  }

  absl::StatusOr<Json> result = best->handler(*this, call);
  if (!result.ok()) return fail(result.status());
  if (call.principal && call.principal->role == Role::kOperator &&
      CarriesMemberData(*result)) {
    return fail(PermissionDenied("operator-deny-filter"));
  }
  if (best->raw_document && result->is_string()) {
    return ApiResponse{200, "application/json", result->get<std::string>()};
  }
  return ApiResponse{200, "application/json", result->dump()};
}

// ---- open endpoints

absl::StatusOr<Json> Node::Health(Call&) {
  return Json{{"status", "ok"}, {"cooperative", config_.cooperative_name}};
}

absl::StatusOr<Json> Node::ConsoleMeta(Call&) {
  return Json{{"cooperative", config_.cooperative_name},
              {"label", config_.label()},
              {"k_threshold", config_.k_threshold}};
}

absl::StatusOr<Json> Node::PublishedKeys(Call&) { return keys_->Published(); }

absl::StatusOr<Json> Node::PublishedAssertion(Call& c) {
  COOP_ASSIGN_OR_RETURN(
      assertion::StoredAssertion a,
      assertions_->GetPublished(c.param("id"), c.param("slug")));
  return Json(a.document);
}

// ---- principals

absl::StatusOr<Json> Node::Me(Call& c) {
  Json out = c.who().PublicJson();
  out["capabilities"] = CapabilitiesOf(c.who().role);
  return out;
}

absl::StatusOr<Json> Node::Enroll(Call& c) {
  authz::EnrollRequest req;
  COOP_ASSIGN_OR_RETURN(std::string role_name, StringField(c.body, "role"));
  std::optional<Role> role = RoleFromName(role_name);
  if (!role) return InvalidArgument("bad-role", role_name);
  req.role = *role;
  req.legal_name = OptionalString(c.body, "legal_name");
  COOP_ASSIGN_OR_RETURN(req.credential, StringField(c.body, "credential"));
  req.birth_date = OptionalString(c.body, "birth_date");
  const std::string key_b64 = OptionalString(c.body, "public_key");
  if (!key_b64.empty()) {
    absl::StatusOr<std::string> key = crypto::Base64Decode(key_b64);
    if (!key.ok()) return InvalidArgument("bad-public-key");
    req.public_key = *std::move(key);
  }
  COOP_ASSIGN_OR_RETURN(authz::Principal p,
                        principals_->Enroll(c.who().id, std::move(req)));
  Json out = p.PublicJson();
  out["capabilities"] = CapabilitiesOf(p.role);
  return out;
}

absl::StatusOr<Json> Node::GetPrincipal(Call& c) {
  COOP_ASSIGN_OR_RETURN(authz::Principal p, principals_->Get(c.param("id")));
  return p.PublicJson();
}

// ---- algorithms

absl::StatusOr<Json> Node::ListAlgorithms(Call& c) {
  Json out = Json::array();
  for (const registry::AlgorithmManifest& m : algorithms_->List(c.who().role)) {
    out.push_back(m.MetadataJson());
  }
  return out;
}

absl::StatusOr<Json> Node::RegisterAlgorithm(Call& c) {
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest m,
                        registry::AlgorithmManifest::FromJson(c.body));
  COOP_ASSIGN_OR_RETURN(AlgoRef ref, algorithms_->Register(c.who().id, m));
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest stored,
                        algorithms_->Get(ref));
  return stored.ToJson();
}

absl::StatusOr<Json> Node::DescribeAlgorithm(Call& c) {
  AlgoRef ref{c.param("id"), 0};
  if (!absl::SimpleAtoi(AbslView(c.param("version")), &ref.version)) {
    return NotFound("unknown-algorithm");
  }
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest m, algorithms_->Get(ref));
  const bool hidden =
      m.vetting.state != registry::VettingState::kVetted ||
      (m.visibility == registry::Visibility::kCooperativePrivate &&
       c.who().role == Role::kQuerier);
  if (hidden && c.who().role != Role::kSteward) {
    return NotFound("unknown-algorithm", ref.ToString());
  }
  Json fields = Json::array();
  for (const FieldSpec& f : m.required_fields) fields.push_back(FieldSpecToJson(f));
  return Json{{"algo", AlgoRefToJson(ref)},
              {"title", m.title},
              {"lay_description", m.lay_description},
              {"purpose_tags", m.purpose_tags},
              {"output_mode", registry::OutputModeName(m.output_mode)},
              {"requires", std::move(fields)},
              {"vetting", registry::VettingStateName(m.vetting.state)}};
}

// ---- authorization handshake

absl::StatusOr<Json> Node::BeginSession(Call& c) {
  const Json& spec = c.body.contains("requested") ? c.body["requested"] : c.body;
  COOP_ASSIGN_OR_RETURN(authz::Requested requested,
                        authz::Requested::FromJson(spec));
  std::optional<authz::Principal> op;
  if (!c.request.operator_authorization.empty()) {
    absl::StatusOr<authz::Principal> who =
        Authenticate(c.request.operator_authorization);
    if (!who.ok()) return Unauthenticated("operator-unauthenticated");
    op = *std::move(who);
  }
  COOP_ASSIGN_OR_RETURN(
      authz::AdvanceResult r,
      binding_->Begin(c.who(), op ? &*op : nullptr, std::move(requested)));
  return Json{{"session", r.session.ToJson()},
              {"clauses", ListToJson(r.next_clauses)}};
}

absl::StatusOr<Json> Node::GetSessionRoute(Call& c) {
  COOP_ASSIGN_OR_RETURN(authz::BindingSession s,
                        binding_->GetSession(c.param("id")));
  const std::vector<PrincipalId> parties = s.parties();
  if (std::find(parties.begin(), parties.end(), c.who().id) == parties.end()) {
    return NotFound("unknown-session");
  }
  return s.ToJson();
}

absl::StatusOr<Json> Node::AdvanceSession(Call& c) {
  COOP_ASSIGN_OR_RETURN(authz::AdvanceResult r,
                        binding_->Advance(c.param("id"), c.who().id));
  Json out{{"session", r.session.ToJson()},
           {"next_clauses", ListToJson(r.next_clauses)}};
  if (!r.token.empty()) out["token"] = r.token;
  return out;
}

absl::StatusOr<Json> Node::AbortSession(Call& c) {
  COOP_ASSIGN_OR_RETURN(authz::BindingSession s,
                        binding_->Abort(c.param("id"), c.who().id));
  return Json{{"session", s.ToJson()}};
}

absl::StatusOr<Json> Node::ClaimToken(Call& c) {
  COOP_ASSIGN_OR_RETURN(std::string token,
                        binding_->ClaimToken(c.param("id"), c.who().id));
  return Json{{"token", token}};
}

absl::StatusOr<Json> Node::RefreshToken(Call& c) {
  COOP_ASSIGN_OR_RETURN(std::string old, StringField(c.body, "token"));
  COOP_ASSIGN_OR_RETURN(std::string token, binding_->Refresh(old, c.who().id));
  return Json{{"token", token}};
}

absl::StatusOr<Json> Node::Introspect(Call& c) {
  COOP_ASSIGN_OR_RETURN(std::string token, StringField(c.body, "token"));
  return binding_->Introspect(token).ToJson();
}

// ---- consent

absl::StatusOr<Json> Node::GrantConsent(Call& c) {
  authz::ConsentRegistry::GrantRequest g;
  g.subject = c.who().id;
  COOP_ASSIGN_OR_RETURN(g.algo, AlgoField(c.body));
  COOP_ASSIGN_OR_RETURN(g.purpose, StringField(c.body, "purpose"));
  g.audience = OptionalString(c.body, "audience", std::string(authz::kAnyAudience));
  COOP_ASSIGN_OR_RETURN(g.description_digest,
                        StringField(c.body, "description_digest"));
  g.handle = OptionalString(c.body, "handle");
  const std::string until = OptionalString(c.body, "valid_until");
  if (!until.empty()) {
    COOP_ASSIGN_OR_RETURN(g.valid_until, ParseTimestamp(until));
  } else {
    COOP_ASSIGN_OR_RETURN(Duration d, DurationField(c.body, "valid_for"));
    if (d <= 0) return InvalidArgument("bad-validity");
    g.valid_until = clock_->Now() + d;
  }
  COOP_ASSIGN_OR_RETURN(authz::ConsentGrant grant,
                        consent_->Grant(c.who().id, std::move(g)));
  return grant.ToJson();
}

absl::StatusOr<Json> Node::WithdrawConsent(Call& c) {
  COOP_ASSIGN_OR_RETURN(authz::ConsentGrant grant,
                        consent_->Withdraw(c.who().id, c.param("id")));
  COOP_ASSIGN_OR_RETURN(size_t revoked,
                        binding_->RevokeForSubject(grant.subject, grant.algo));
  Json out = grant.ToJson();
  out["revoked_tokens"] = revoked;
  return out;
}

absl::StatusOr<Json> Node::PendingConsent(Call& c) {
  Json out = Json::array();
  for (const authz::ConsentRequest& r : consent_->Pending(c.who().id)) {
    Json view = r.ToJson();
    absl::StatusOr<registry::AlgorithmManifest> m = algorithms_->Get(r.algo);
    if (m.ok()) {
      view["title"] = m->title;
      view["lay_description"] = m->lay_description;
    }
    absl::StatusOr<authz::Principal> requester = principals_->Get(r.requester);
    if (requester.ok()) view["requester_name"] = requester->legal_name;
    out.push_back(std::move(view));
  }
  return out;
}

absl::StatusOr<Json> Node::DenyConsent(Call& c) {
  COOP_ASSIGN_OR_RETURN(authz::ConsentRequest r,
                        consent_->Deny(c.who().id, c.param("handle")));
  return r.ToJson();
}

absl::StatusOr<Json> Node::ListGrants(Call& c) {
  return ListToJson(consent_->GrantsOf(c.who().id));
}

// ---- execution

absl::StatusOr<Json> Node::ExecuteQuery(Call& c) {
  engine::QueryRequest q;
  q.request_id = OptionalString(c.body, "request_id");
  COOP_ASSIGN_OR_RETURN(q.algo, AlgoField(c.body));
  if (!c.body.contains("scope")) return BadRequest("scope");
  COOP_ASSIGN_OR_RETURN(q.scope, authz::Scope::FromJson(c.body["scope"]));
  COOP_ASSIGN_OR_RETURN(q.purpose, StringField(c.body, "purpose"));
  COOP_ASSIGN_OR_RETURN(q.token, StringField(c.body, "token"));
  q.requester = c.who().id;
  COOP_ASSIGN_OR_RETURN(engine::QueryResult r, engine_->Execute(std::move(q)));
  return r.ToJson();
}

// ---- stores

absl::StatusOr<Json> Node::CreateStore(Call& c) {
  if (!c.body.contains("schema")) return BadRequest("schema");
  COOP_ASSIGN_OR_RETURN(std::vector<FieldSpec> schema,
                        SchemaFromJson(c.body["schema"]));
  pds::Hosting hosting;
  if (c.body.contains("hosting")) {
    const Json& h = c.body["hosting"];
    const std::string kind = OptionalString(h, "kind", "cooperative-hosted");
    if (kind == "member-hosted") {
      hosting.kind = pds::HostingKind::kMember;
      hosting.endpoint = OptionalString(h, "endpoint");
    } else if (kind != "cooperative-hosted") {
      return InvalidArgument("bad-hosting", kind);
    }
  }
  COOP_ASSIGN_OR_RETURN(
      pds::StoreInfo info,
      stores_->CreateStore(c.who().id, std::move(schema), std::move(hosting)));
  return info.ToJson();
}

absl::StatusOr<Json> Node::ListStores(Call& c) {
  if (c.who().role == Role::kSteward) return ListToJson(stores_->AllStores());
  return ListToJson(stores_->StoresOf(c.who().id));
}

absl::StatusOr<Json> Node::StoreInfo(Call& c) {
  COOP_ASSIGN_OR_RETURN(pds::StoreInfo info, stores_->Info(c.param("id")));
  if (c.who().role != Role::kSteward && info.owner != c.who().id) {
    return NotFound("unknown-store", c.param("id"));
  }
  return info.ToJson();
}

absl::StatusOr<Json> Node::IngestRecords(Call& c) {
  if (!c.body.contains("records") || !c.body["records"].is_array()) {
    return BadRequest("records");
  }
  std::vector<Json> records(c.body["records"].begin(), c.body["records"].end());
  COOP_ASSIGN_OR_RETURN(std::vector<std::string> ids,
                        stores_->Ingest(c.who().id, c.param("id"), records));
  return Json{{"record_ids", ids}};
}

absl::StatusOr<Json> Node::ReadRecords(Call& c) {
  return stores_->ReadRecords(c.who().id, c.param("id"));
}

absl::StatusOr<Json> Node::RemoveRecords(Call& c) {
  pds::RecordSelector sel;
  sel.all = OptionalBool(c.body, "all");
  if (c.body.contains("record_ids")) {
    if (!c.body["record_ids"].is_array()) return BadRequest("record_ids");
    for (const Json& id : c.body["record_ids"]) {
      if (!id.is_string()) return BadRequest("record_ids");
      sel.record_ids.push_back(id.get<std::string>());
    }
  }
  COOP_ASSIGN_OR_RETURN(size_t n,
                        stores_->Remove(c.who().id, c.param("id"), sel));
  return Json{{"removed", n}};
}

absl::StatusOr<Json> Node::SuspendStore(Call& c) {
  COOP_ASSIGN_OR_RETURN(
      pds::StoreInfo info,
      stores_->SetStatus(c.who().id, c.param("id"), pds::StoreStatus::kSuspended));
  return info.ToJson();
}

absl::StatusOr<Json> Node::ActivateStore(Call& c) {
  COOP_ASSIGN_OR_RETURN(
      pds::StoreInfo info,
      stores_->SetStatus(c.who().id, c.param("id"), pds::StoreStatus::kActive));
  return info.ToJson();
}

absl::StatusOr<Json> Node::ExportStore(Call& c) {
  COOP_ASSIGN_OR_RETURN(std::string archive,
                        stores_->ExportArchive(c.who().id, c.param("id")));
  return Json{{"store_id", c.param("id")},
              {"archive", crypto::Base64Encode(archive)}};
}

absl::StatusOr<Json> Node::ImportStore(Call& c) {
  COOP_ASSIGN_OR_RETURN(std::string b64, StringField(c.body, "archive"));
  COOP_ASSIGN_OR_RETURN(std::string archive, crypto::Base64Decode(b64));
  COOP_ASSIGN_OR_RETURN(pds::StoreInfo info,
                        stores_->ImportArchive(c.who().id, archive));
  return info.ToJson();
}

// ---- assertions

namespace {
Json IssuedJson(const assertion::StoredAssertion& a) {
  return Json{{"assertion_id", a.assertion_id},
              {"class", assertion::ValidityClassName(a.validity_class)},
              {"expires_at", a.payload["expires_at"]},
              {"document", a.document}};
}
}  // namespace

absl::StatusOr<Json> Node::IssueAssertion(Call& c) {
  assertion::IssueRequest r;
  r.subject = c.who().id;
  COOP_ASSIGN_OR_RETURN(r.algo, AlgoField(c.body));
  COOP_ASSIGN_OR_RETURN(r.purpose, StringField(c.body, "purpose"));
  COOP_ASSIGN_OR_RETURN(r.audience, StringField(c.body, "audience"));
  COOP_ASSIGN_OR_RETURN(r.validity, DurationField(c.body, "validity"));
  r.disclose_identity = OptionalBool(c.body, "disclose_identity");
  COOP_ASSIGN_OR_RETURN(assertion::StoredAssertion a,
                        assertions_->Issue(c.who(), r));
  return IssuedJson(a);
}

absl::StatusOr<Json> Node::IssueStaticAssertion(Call& c) {
  assertion::StaticAttribute attr;
  COOP_ASSIGN_OR_RETURN(std::string kind, StringField(c.body, "attribute"));
  if (kind == "year-of-birth") {
    attr.kind = assertion::StaticAttribute::Kind::kYearOfBirth;
  } else if (kind == "age-over") {
    attr.kind = assertion::StaticAttribute::Kind::kAgeOver;
    if (!c.body.contains("years") || !c.body["years"].is_number_integer()) {
      return BadRequest("years");
    }
    attr.years = c.body["years"].get<int>();
  } else {
    return InvalidArgument("bad-attribute", kind);
  }
  COOP_ASSIGN_OR_RETURN(Duration validity, DurationField(c.body, "validity"));
  COOP_ASSIGN_OR_RETURN(
      assertion::StoredAssertion a,
      assertions_->IssueStatic(c.who(), attr, OptionalBool(c.body, "publish"),
                               validity));
  Json out = IssuedJson(a);
  if (a.published) {
    out["published_at"] =
        coop::StrCat("/members/", a.member, "/assertions/", a.slug);
  }
  return out;
}

absl::StatusOr<Json> Node::RecordReceipt(Call& c) {
  COOP_ASSIGN_OR_RETURN(
      assertion::DigitalReceipt r,
      assertions_->RecordReceipt(c.who(), c.param("id"), c.body));
  return r.ToJson();
}

absl::StatusOr<Json> Node::GetAssertion(Call& c) {
  COOP_ASSIGN_OR_RETURN(assertion::StoredAssertion a,
                        assertions_->Get(c.who().id, c.param("id")));
  return Json(a.document);
}

absl::StatusOr<Json> Node::ListReceipts(Call& c) {
  COOP_ASSIGN_OR_RETURN(assertion::StoredAssertion a,
                        assertions_->Get(c.who().id, c.param("id")));
  if (a.member != c.who().id) return NotFound("unknown-assertion");
  return ListToJson(assertions_->ReceiptsFor(a.assertion_id));
}

absl::StatusOr<Json> Node::VerifyAssertion(Call& c) {
  COOP_ASSIGN_OR_RETURN(std::string document, StringField(c.body, "document"));
  COOP_ASSIGN_OR_RETURN(std::string purpose, StringField(c.body, "purpose"));
  Timestamp at = clock_->Now();
  const std::string at_text = OptionalString(c.body, "at");
  if (!at_text.empty()) {
    COOP_ASSIGN_OR_RETURN(at, ParseTimestamp(at_text));
  }
  assertion::Verdict v =
      assertion::VerifyDocument(document, purpose, at, keys_->Published());
  Json out{{"valid", v.valid}};
  if (!v.valid) out["reason"] = v.reason;
  return out;
}

// ---- audit

absl::StatusOr<Json> Node::Demonstrate(Call& c) {
  uint64_t seq = 0;
  if (!absl::SimpleAtoi(AbslView(c.query("execution")), &seq)) {
    return BadRequest("execution");
  }
  std::optional<audit::Event> ev = audit_->Get(seq);
  if (!ev || ev->type != audit::EventType::kExecution) {
    return NotFound("execution-not-found");
  }
  std::string subject;
  if (c.who().role == Role::kMember) {
    if (!ev->References(c.who().id)) return NotFound("execution-not-found");
    subject = c.who().id;
  } else {
    auto it = ev->refs.find(audit::kRefSubject);
    subject = c.query("subject", it == ev->refs.end() ? "" : it->second);
  }
  COOP_ASSIGN_OR_RETURN(Json bundle, audit_->DemonstrateConsent(subject, seq));
  bundle["verified"] = audit::VerifyConsentBundle(bundle);
  return bundle;
}

absl::StatusOr<Json> Node::AuditEvents(Call& c) {
  std::vector<audit::Event> events;
  if (c.who().role == Role::kSteward) {
    events = audit_->Snapshot();
  } else {
    events = audit_->EventsReferencing(c.who().id);
  }
  return ListToJson(events);
}

absl::StatusOr<Json> Node::AuditExport(Call& c) {
  const size_t n = audit_->size();
  if (n == 0) return Json{{"first_seq", 0}, {"anchor", audit::kGenesisHash}, {"jsonl", ""}};
  uint64_t from = 0, to = n - 1;
  if (!c.query("from").empty() && !absl::SimpleAtoi(AbslView(c.query("from")), &from)) {
    return BadRequest("from");
  }
  if (!c.query("to").empty() && !absl::SimpleAtoi(AbslView(c.query("to")), &to)) {
    return BadRequest("to");
  }
  if (from > to || to >= n) return InvalidArgument("bad-range");
  return Json{{"first_seq", from},
              {"anchor", audit_->AnchorFor(from)},
              {"jsonl", audit_->ExportJsonLines(from, to)}};
}

}  // namespace coop::node
