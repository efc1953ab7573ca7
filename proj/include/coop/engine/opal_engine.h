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

#ifndef COOP_ENGINE_OPAL_ENGINE_H_
#define COOP_ENGINE_OPAL_ENGINE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/audit/audit_log.h"
#include "coop/authz/binding.h"
#include "coop/authz/consent.h"
#include "coop/authz/scope.h"
#include "coop/common/clock.h"
#include "coop/common/ids.h"
#include "coop/common/journal.h"
#include "coop/dsl/evaluator.h"
#include "coop/engine/safe_answer.h"
#include "coop/pds/pds_service.h"
#include "coop/registry/registry.h"

namespace coop::engine {

struct QueryRequest {
  std::string request_id;  // assigned when empty
  AlgoRef algo;
  authz::Scope scope;
  PrincipalId requester;
  std::string purpose;
  std::string token;
};

struct QueryResult {
  std::string request_id;
  AlgoRef algo;
  std::vector<ResultCell> cells;
  Timestamp executed_at = 0;
  uint64_t audit_ref = 0;

  Json ToJson() const;
};

// Compiled form with the field-access set pinned to the manifest's
// declared fields. Errors: not-vetted.
absl::StatusOr<dsl::CompiledAlgorithm> Compile(
    const registry::AlgorithmManifest& manifest);

class OpalEngine {
 public:
  struct Options {
    std::filesystem::path results_path;  // empty: results kept in memory
    bool sync_writes = false;
    const Clock* clock = nullptr;
    IdSource* ids = nullptr;
    const registry::AlgorithmRegistry* algorithms = nullptr;
    const pds::PdsService* stores = nullptr;
    const authz::BindingService* binding = nullptr;
    authz::ConsentRegistry* consent = nullptr;
    audit::AuditLog* audit = nullptr;
    SafeAnswerPolicy policy;
  };

  static absl::StatusOr<std::unique_ptr<OpalEngine>> Open(Options options);

  // Errors: not-vetted, invalid-token, scope-mode-mismatch,
  // consent-required (with a "handle" detail naming the pending request).
  absl::StatusOr<QueryResult> Execute(QueryRequest request);

  // Single-subject run authorized by the member's own issuance directive.
  // Errors: not-vetted, not-subject-mode, no-eligible-store.
  absl::StatusOr<QueryResult> ExecuteForDirective(
      const authz::DirectiveTicket& ticket);

  absl::StatusOr<QueryResult> GetResult(std::string_view request_id) const;

  const SafeAnswerPolicy& policy() const { return options_.policy; }

 private:
  explicit OpalEngine(Options options, std::unique_ptr<Journal> journal)
      : options_(std::move(options)), journal_(std::move(journal)) {}

  struct Run {
    QueryResult result;
    size_t stores = 0;
  };
  absl::StatusOr<Run> RunOver(const std::string& request_id,
                              const registry::AlgorithmManifest& manifest,
                              const authz::Scope& scope,
                              std::string_view credential,
                              bool subject_release);
  absl::Status Record(QueryResult& result,
                      std::map<std::string, std::string> refs,
                      const PrincipalId& actor);

  Options options_;
  std::unique_ptr<Journal> journal_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Json, std::less<>> results_;
};

}  // namespace coop::engine

#endif  // COOP_ENGINE_OPAL_ENGINE_H_
