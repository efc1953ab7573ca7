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

#include "coop/sim/harness.h"

#include <utility>

#include "coop/assertion/document.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::sim {
namespace {

constexpr char kSteward[] = "steward";

absl::Status FromResponse(const node::ApiResponse& r) {
  const Json body = r.json();
  const std::string slug = body.is_object() ? body.value("error", "error") : "error";
  absl::StatusCode code = absl::StatusCode::kUnknown;
  switch (r.status) {
    case 400: code = absl::StatusCode::kInvalidArgument; break;
    case 401: code = absl::StatusCode::kUnauthenticated; break;
    case 403: code = absl::StatusCode::kPermissionDenied; break;
    case 404: code = absl::StatusCode::kNotFound; break;
    case 405: code = absl::StatusCode::kUnimplemented; break;
    case 409: code = absl::StatusCode::kFailedPrecondition; break;
    default: code = absl::StatusCode::kInternal; break;
  }
  absl::Status s = MakeError(code, slug, body.is_object() ? body.value("message", "") : "");
  if (body.is_object()) {
    for (const auto& [k, v] : body.items()) {
      if (k != "error" && k != "message" && v.is_string()) {
        SetDetail(s, k, v.get<std::string>());
      }
    }
  }
  return s;
}

}  // namespace

std::string DescriptionDigestOf(const std::string& lay_description) {
  return crypto::Sha256Hex(lay_description);
}

std::string Harness::DeriveCredential(uint64_t seed, const std::string& alias) {
  return coop::StrCat("cred-",
                      crypto::Sha256Hex(coop::StrCat(seed, ":", alias)).substr(0, 40));
}

absl::Status Harness::Bootstrap(std::string steward_credential) {
  credentials_[kSteward] = std::move(steward_credential);
  COOP_ASSIGN_OR_RETURN(Json me, CallOk(kSteward, "GET", "/principals/me"));
  ids_[kSteward] = me["id"].get<std::string>();
  return absl::OkStatus();
}

absl::StatusOr<std::unique_ptr<Harness>> Harness::Create(Options options) {
  std::unique_ptr<Harness> h(new Harness);
  h->options_ = options;
  h->clock_.Set(options.start);
  node::Node::Options no;
  no.config.cooperative_name = options.cooperative_name;
  no.config.k_threshold = options.k;
  no.config.handshake_stages = options.stages;
  no.config.data_dir = options.data_dir;
  no.config.sync_writes = false;
  no.clock = &h->clock_;
  no.ids = &h->ids_source_;
  no.steward_credential = DeriveCredential(options.seed, kSteward);
  COOP_ASSIGN_OR_RETURN(h->node_, node::Node::Open(std::move(no)));
  node::Node* n = h->node_.get();
  h->transport_ = [n](const node::ApiRequest& r) { return n->Handle(r); };
  COOP_RETURN_IF_ERROR(h->Bootstrap(DeriveCredential(options.seed, kSteward)));
  return h;
}

absl::StatusOr<std::unique_ptr<Harness>> Harness::ForTenant(
    node::MultiTenantHost* host, const std::string& tenant,
    const std::string& steward_credential, uint64_t seed) {
  std::unique_ptr<Harness> h(new Harness);
  h->options_.seed = seed;
  h->options_.cooperative_name = tenant;
  h->transport_ = [host](const node::ApiRequest& r) { return host->Handle(r); };
  h->prefix_ = coop::StrCat("/t/", tenant);
  COOP_RETURN_IF_ERROR(h->Bootstrap(steward_credential));
  return h;
}

node::ApiResponse Harness::Call(const std::string& alias,
                                const std::string& method,
                                const std::string& path, const Json& body,
                                const std::map<std::string, std::string>& query,
                                const std::string& operator_alias) {
  node::ApiRequest r;
  r.method = method;
  r.path = prefix_ + path;
  r.query = query;
  if (!alias.empty()) {
    auto it = credentials_.find(alias);
    r.authorization = coop::StrCat(
        "Bearer ", it == credentials_.end() ? std::string("unknown-credential") : it->second);
  }
  if (!operator_alias.empty()) {
    r.operator_authorization = coop::StrCat("Bearer ", credentials_.at(operator_alias));
  }
  if (!body.is_null()) r.body = body.dump();
  return transport_(r);
}

absl::StatusOr<Json> Harness::CallOk(const std::string& alias,
                                     const std::string& method,
                                     const std::string& path, const Json& body,
                                     const std::map<std::string, std::string>& query,
                                     const std::string& operator_alias) {
  node::ApiResponse r = Call(alias, method, path, body, query, operator_alias);
  if (r.status != 200) return FromResponse(r);
  absl::StatusOr<Json> j = ParseJson(r.body);
  if (!j.ok()) return Internal("bad-response-body");
  return j;
}

absl::StatusOr<std::string> Harness::Enroll(const std::string& alias, Role role,
                                            const std::string& legal_name,
                                            const std::string& birth_date,
                                            bool with_key) {
  if (ids_.contains(alias)) return AlreadyExists("duplicate-alias", alias);
  const std::string credential = DeriveCredential(options_.seed, alias);
  Json body{{"role", RoleName(role)},
            {"legal_name", legal_name},
            {"credential", credential}};
  if (!birth_date.empty()) body["birth_date"] = birth_date;
  if (with_key) {
    COOP_ASSIGN_OR_RETURN(
        crypto::SigningKey key,
        crypto::SigningKey::FromSeed(crypto::Sha256(
            coop::StrCat(options_.seed, ":", alias, ":receipt-key"))));
    body["public_key"] = crypto::Base64Encode(key.public_key());
    keys_.emplace(alias, std::move(key));
  }
  COOP_ASSIGN_OR_RETURN(Json p, CallOk(kSteward, "POST", "/principals", body));
  ids_[alias] = p["id"].get<std::string>();
  credentials_[alias] = credential;
  return ids_[alias];
}

const crypto::SigningKey* Harness::KeyOf(const std::string& alias) const {
  auto it = keys_.find(alias);
  return it == keys_.end() ? nullptr : &it->second;
}

absl::StatusOr<std::map<std::string, std::vector<std::string>>>
Harness::LoadFixture(const Fixture& fixture) {
  std::map<std::string, std::vector<std::string>> out;
  const Json schema = SchemaToJson(fixture.schema);
  for (const FixtureMember& m : fixture.members) {
    if (!Known(m.alias)) {
      COOP_RETURN_IF_ERROR(Enroll(m.alias, Role::kMember,
                                  coop::StrCat("Member ", m.alias), m.birth_date)
                               .status());
    }
    for (const FixtureStore& s : m.stores) {
      COOP_ASSIGN_OR_RETURN(Json info,
                            CallOk(m.alias, "POST", "/stores", Json{{"schema", schema}}));
      const std::string id = info["store_id"].get<std::string>();
      if (!s.records.empty()) {
        COOP_RETURN_IF_ERROR(CallOk(m.alias, "POST",
                                    coop::StrCat("/stores/", id, "/records"),
                                    Json{{"records", s.records}})
                                 .status());
      }
      if (s.suspended) {
        COOP_RETURN_IF_ERROR(
            CallOk(m.alias, "POST", coop::StrCat("/stores/", id, "/suspend"),
                   Json::object())
                .status());
      }
      out[m.alias].push_back(id);
    }
  }
  return out;
}

absl::StatusOr<AlgoRef> Harness::Register(
    const std::string& algo_id, int version, const std::string& mode,
    const std::string& source, const std::vector<FieldSpec>& requires_fields,
    const std::vector<std::string>& purposes, const std::string& title,
    const std::string& lay_description) {
  Json manifest{
      {"algo_id", algo_id},
      {"version", version},
      {"title", title.empty() ? algo_id : title},
      {"lay_description",
       lay_description.empty()
           ? coop::StrCat("Computes ", algo_id, " over member records.")
           : lay_description},
      {"output_mode", mode},
      {"requires", SchemaToJson(requires_fields)},
      {"purpose_tags", purposes},
      {"source", source},
      {"manual_review_passed", true}};
  COOP_RETURN_IF_ERROR(CallOk(kSteward, "POST", "/algorithms", manifest).status());
  return AlgoRef{algo_id, version};
}

absl::StatusOr<std::string> Harness::Handshake(
    const std::string& querier, const std::string& service_operator,
    const AlgoRef& algo, const Json& scope, const std::string& purpose) {
  Json requested{{"algo", AlgoRefToJson(algo)}, {"scope", scope}, {"purpose", purpose}};
  COOP_ASSIGN_OR_RETURN(
      Json begun, CallOk(querier, "POST", "/authz/session",
                         Json{{"requested", requested}}, {}, service_operator));
  const std::string sid = begun["session"]["session_id"].get<std::string>();
  const std::string advance = coop::StrCat("/authz/session/", sid, "/advance");
  std::string token;
  for (int guard = 0; guard < 64; ++guard) {
    COOP_ASSIGN_OR_RETURN(Json q, CallOk(querier, "POST", advance, Json::object()));
    if (q.contains("token")) token = q["token"].get<std::string>();
    if (q["session"]["state"] == "bound") break;
    if (!service_operator.empty()) {
      COOP_ASSIGN_OR_RETURN(
          Json o, CallOk(service_operator, "POST", advance, Json::object()));
      if (o["session"]["state"] == "bound") break;
    }
  }
  if (token.empty()) {
    COOP_ASSIGN_OR_RETURN(
        Json claimed, CallOk(querier, "POST",
                             coop::StrCat("/authz/session/", sid, "/token"),
                             Json::object()));
    token = claimed["token"].get<std::string>();
  }
  return token;
}

absl::StatusOr<Json> Harness::Execute(const std::string& querier,
                                      const std::string& token,
                                      const AlgoRef& algo, const Json& scope,
                                      const std::string& purpose) {
  return CallOk(querier, "POST", "/query/execute",
                Json{{"algo", AlgoRefToJson(algo)},
                     {"scope", scope},
                     {"purpose", purpose},
                     {"token", token}});
}

absl::StatusOr<Json> Harness::Grant(const std::string& member,
                                    const AlgoRef& algo,
                                    const std::string& purpose,
                                    const std::string& audience,
                                    Duration valid_for) {
  COOP_ASSIGN_OR_RETURN(
      Json description,
      CallOk(member, "GET",
             coop::StrCat("/algorithms/", algo.algo_id, "/", algo.version,
                          "/description")));
  const std::string digest =
      DescriptionDigestOf(description["lay_description"].get<std::string>());
  return CallOk(member, "POST", "/consent/grant",
                Json{{"algo", AlgoRefToJson(algo)},
                     {"purpose", purpose},
                     {"audience", audience},
                     {"valid_for", valid_for},
                     {"description_digest", digest}});
}

absl::StatusOr<Json> Harness::SignReceipt(const std::string& provider,
                                          const std::string& document) {
  const crypto::SigningKey* key = KeyOf(provider);
  if (key == nullptr) return FailedPrecondition("no-receipt-key", provider);
  COOP_ASSIGN_OR_RETURN(Json doc, ParseJson(document));
  const Json& payload = doc["payload"];
  Json receipt = assertion::ReceiptPayload(
      payload["assertion_id"].get<std::string>(), IdOf(provider),
      payload["terms_of_use"], clock_.Now());
  COOP_ASSIGN_OR_RETURN(std::string bytes, Canonicalize(receipt));
  return Json{{"payload", receipt},
              {"signature",
               {{"key_id", IdOf(provider)},
                {"value", crypto::Base64Encode(key->Sign(bytes))}}}};
}

}  // namespace coop::sim
