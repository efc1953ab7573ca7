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

#include "coop/engine/opal_engine.h"

#include <mutex>
#include <utility>

#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/dsl/parser.h"

namespace coop::engine {

Json QueryResult::ToJson() const {
  Json cell_list = Json::array();
  for (const ResultCell& c : cells) cell_list.push_back(c.ToJson());
  return Json{{"request_id", request_id},
              {"algo", AlgoRefToJson(algo)},
              {"cells", std::move(cell_list)},
              {"executed_at", FormatTimestamp(executed_at)},
              {"audit_ref", audit_ref}};
}

absl::StatusOr<dsl::CompiledAlgorithm> Compile(
    const registry::AlgorithmManifest& manifest) {
  if (manifest.vetting.state != registry::VettingState::kVetted) {
    return FailedPrecondition("not-vetted", manifest.ref().ToString());
  }
  COOP_ASSIGN_OR_RETURN(dsl::Program program, dsl::Parse(manifest.source));
  const dsl::Mode mode = manifest.output_mode == registry::OutputMode::kSubject
                             ? dsl::Mode::kSubject
                             : dsl::Mode::kAggregate;
  return dsl::CompiledAlgorithm::Make(manifest.ref(), mode, std::move(program),
                                      manifest.required_fields);
}

absl::StatusOr<std::unique_ptr<OpalEngine>> OpalEngine::Open(Options options) {
  if (options.policy.k_threshold < 2) {
    return InvalidArgument("bad-config", "k_threshold");
  }
  std::unique_ptr<Journal> journal = std::make_unique<Journal>();
  std::vector<Json> lines;
  if (!options.results_path.empty()) {
    COOP_ASSIGN_OR_RETURN(lines, Journal::ReadAll(options.results_path));
    COOP_ASSIGN_OR_RETURN(
        journal, Journal::Open(options.results_path, options.sync_writes));
  }
  std::unique_ptr<OpalEngine> engine(
      new OpalEngine(std::move(options), std::move(journal)));
  for (Json& line : lines) {
    const std::string id = line.value("request_id", "");
    engine->results_[id] = std::move(line);
  }
  return engine;
}

absl::StatusOr<OpalEngine::Run> OpalEngine::RunOver(
    const std::string& request_id, const registry::AlgorithmManifest& manifest,
    const authz::Scope& scope, std::string_view credential,
    bool subject_release) {
  COOP_ASSIGN_OR_RETURN(dsl::CompiledAlgorithm compiled, Compile(manifest));
  std::vector<dsl::LocalResult> partials;
  size_t stores = 0;
  for (const pds::StoreInfo& store : options_.stores->AllStores()) {
    if (!scope.Covers(store.owner) ||
        store.status != pds::StoreStatus::kActive ||
        !dsl::SchemaServes(compiled.required_fields, store.schema)) {
      continue;
    }
    absl::StatusOr<dsl::LocalResult> local =
        options_.stores->LocalEvaluate(store.store_id, compiled, credential);
    if (!local.ok() && ErrorSlug(local.status()) == "store-suspended") {
      // Suspended after the listing; the store's own check wins.
      continue;
    }
    if (!local.ok()) return local.status();
    ++stores;
    partials.push_back(*std::move(local));
  }
  COOP_ASSIGN_OR_RETURN(Merged merged, MergePartials(partials, compiled));
  Run run;
  run.stores = stores;
  run.result.request_id = request_id;
  run.result.algo = manifest.ref();
  run.result.cells = ApplySafeAnswer(merged, compiled.program,
                                     options_.policy, subject_release);
  return run;
}

absl::Status OpalEngine::Record(QueryResult& result,
                                std::map<std::string, std::string> refs,
                                const PrincipalId& actor) {
  result.executed_at = options_.clock->Now();
  Json cells = Json::array();
  for (const ResultCell& c : result.cells) cells.push_back(c.ToJson());
  COOP_ASSIGN_OR_RETURN(std::string cell_bytes, Canonicalize(cells));
  refs["request"] = result.request_id;
  refs["algo"] = result.algo.ToString();
  refs["result_digest"] = crypto::Sha256Hex(cell_bytes);
  COOP_ASSIGN_OR_RETURN(
      result.audit_ref,
      options_.audit->Append(
          {audit::EventType::kExecution, "execute", actor, std::move(refs)}));
  Json stored = result.ToJson();
  COOP_RETURN_IF_ERROR(journal_->Append(stored));
  std::unique_lock lock(mu_);
  results_[result.request_id] = std::move(stored);
  return absl::OkStatus();
}

absl::StatusOr<QueryResult> OpalEngine::Execute(QueryRequest request) {
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest manifest,
                        options_.algorithms->Get(request.algo));
  if (manifest.vetting.state != registry::VettingState::kVetted) {
    return FailedPrecondition("not-vetted", request.algo.ToString());
  }
  const authz::Introspection token = options_.binding->Introspect(request.token);
  if (!token.active || token.holder != request.requester ||
      token.querier != request.requester || token.grants.algo != request.algo ||
      token.grants.scope != request.scope ||
      token.grants.purpose != request.purpose) {
    return Unauthenticated("invalid-token");
  }
  const bool single =
      request.scope.kind == authz::Scope::Kind::kSingleSubject;
  if (!single && manifest.output_mode != registry::OutputMode::kAggregate) {
    return InvalidArgument("scope-mode-mismatch");
  }

  std::map<std::string, std::string> refs{
      {"purpose", request.purpose},
      {"requester", request.requester},
      {"scope", request.scope.ToJson().dump()},
      {audit::kRefSessionSeq, std::to_string(token.session_seq)},
      {audit::kRefTokenSeq, std::to_string(token.token_seq)}};
  if (single) {
    const MemberId& subject = request.scope.subject();
    std::optional<authz::ConsentGrant> grant = options_.consent->Check(
        subject, request.algo, request.purpose, request.requester,
        options_.clock->Now());
    if (!grant) {
      COOP_ASSIGN_OR_RETURN(
          authz::ConsentRequest pending,
          options_.consent->OpenRequest(request.requester, subject,
                                        request.algo, request.purpose,
                                        request.scope));
      absl::Status status = PermissionDenied("consent-required", pending.handle);
      SetDetail(status, "handle", pending.handle);
      return status;
    }
    refs[audit::kRefSubject] = subject;
    refs[audit::kRefConsentSeq] = std::to_string(grant->audit_seq);
    refs["grant"] = grant->grant_id;
  }

  if (request.request_id.empty()) {
    request.request_id = options_.ids->Next("req");
  }
  const bool subject_release =
      single && manifest.output_mode == registry::OutputMode::kSubject;
  absl::StatusOr<Run> run = RunOver(request.request_id, manifest,
                                    request.scope, request.token,
                                    subject_release);
  if (!run.ok()) return run.status();
  COOP_RETURN_IF_ERROR(Record(run->result, std::move(refs), request.requester));
  return std::move(run->result);
}

absl::StatusOr<QueryResult> OpalEngine::ExecuteForDirective(
    const authz::DirectiveTicket& ticket) {
  const authz::Directive& d = ticket.directive;
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest manifest,
                        options_.algorithms->Get(d.algo));
  if (manifest.vetting.state != registry::VettingState::kVetted) {
    return FailedPrecondition("not-vetted", d.algo.ToString());
  }
  if (manifest.output_mode != registry::OutputMode::kSubject) {
    return InvalidArgument("not-subject-mode", d.algo.ToString());
  }
  const std::string request_id = options_.ids->Next("req");
  COOP_ASSIGN_OR_RETURN(Run run,
                        RunOver(request_id, manifest,
                                authz::Scope::Subject(d.subject),
                                ticket.credential, /*subject_release=*/true));
  if (run.stores == 0) {
    return FailedPrecondition("no-eligible-store", d.subject);
  }
  COOP_RETURN_IF_ERROR(
      Record(run.result,
             {{"purpose", d.purpose},
              {"requester", d.subject},
              {"audience", d.audience},
              {"directive", d.directive_id},
              {audit::kRefSubject, d.subject},
              {audit::kRefDirectiveSeq, std::to_string(d.audit_seq)}},
             d.subject));
  return std::move(run.result);
}

absl::StatusOr<QueryResult> OpalEngine::GetResult(
    std::string_view request_id) const {
  std::shared_lock lock(mu_);
  auto it = results_.find(request_id);
  if (it == results_.end()) return NotFound("unknown-result", request_id);
  const Json& j = it->second;
  QueryResult r;
  r.request_id = j["request_id"].get<std::string>();
  COOP_ASSIGN_OR_RETURN(r.algo, AlgoRefFromJson(j["algo"]));
  for (const Json& c : j["cells"]) {
    ResultCell cell;
    if (!c["group"].is_null()) cell.group = c["group"].get<std::string>();
    cell.suppressed = c.contains("suppressed");
    if (!cell.suppressed) {
      cell.values = c["values"];
      cell.members = c["members"].get<size_t>();
    }
    r.cells.push_back(std::move(cell));
  }
  COOP_ASSIGN_OR_RETURN(r.executed_at,
                        ParseTimestamp(j["executed_at"].get<std::string>()));
  r.audit_ref = j["audit_ref"].get<uint64_t>();
  return r;
}

}  // namespace coop::engine
