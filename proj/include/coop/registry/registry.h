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

#ifndef COOP_REGISTRY_REGISTRY_H_
#define COOP_REGISTRY_REGISTRY_H_

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/audit/audit_log.h"
#include "coop/common/clock.h"
#include "coop/common/journal.h"
#include "coop/common/schema.h"
#include "coop/registry/manifest.h"

namespace coop::registry {

// Versioned catalogue of algorithms. Vetted entries are immutable; a change
// needs a new version, so consents bound to (algo_id, version) never widen.
class AlgorithmRegistry {
 public:
  static absl::StatusOr<std::unique_ptr<AlgorithmRegistry>> Open(
      const std::filesystem::path& path, const Clock* clock,
      audit::AuditLog* audit, bool sync_writes);

  // Stores a draft. Drafts may be replaced until vetted.
  absl::StatusOr<AlgorithmManifest> Submit(const PrincipalId& actor,
                                           AlgorithmManifest manifest);

  // Runs the static rules on a stored entry and records the outcome.
  absl::StatusOr<VettingStatus> VetEntry(const PrincipalId& actor,
                                         const AlgoRef& ref);

  // Vets `manifest` and stores it as an immutable vetted entry.
  // Errors: not-vetted (findings in the message), duplicate,
  // lay-description-required.
  absl::StatusOr<AlgoRef> Register(const PrincipalId& actor,
                                   AlgorithmManifest manifest);

  // Any state, including drafts.
  absl::StatusOr<AlgorithmManifest> Get(const AlgoRef& ref) const;

  // Vetted entries visible to `viewer`: queriers see public ones, members
  // and stewards also cooperative-private ones, operators nothing.
  std::vector<AlgorithmManifest> List(Role viewer) const;

 private:
  AlgorithmRegistry(const Clock* clock, audit::AuditLog* audit,
                    std::unique_ptr<Journal> journal)
      : clock_(clock), audit_(audit), journal_(std::move(journal)) {}

  absl::Status Store(const PrincipalId& actor, AlgorithmManifest manifest,
                     std::string_view action);

  const Clock* clock_;
  audit::AuditLog* audit_;
  std::unique_ptr<Journal> journal_;
  mutable std::shared_mutex mu_;
  std::map<AlgoRef, AlgorithmManifest> entries_;
};

}  // namespace coop::registry

#endif  // COOP_REGISTRY_REGISTRY_H_
