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

#include "coop/registry/registry.h"

#include <mutex>
#include <string>
#include <utility>

#include "coop/common/strings.h"
#include "absl/strings/str_join.h"
#include "coop/common/status.h"
#include "coop/registry/vetting.h"

namespace coop::registry {

absl::StatusOr<std::unique_ptr<AlgorithmRegistry>> AlgorithmRegistry::Open(
    const std::filesystem::path& path, const Clock* clock,
    audit::AuditLog* audit, bool sync_writes) {
  std::unique_ptr<Journal> journal = std::make_unique<Journal>();
  std::map<AlgoRef, AlgorithmManifest> entries;
  if (!path.empty()) {
    COOP_ASSIGN_OR_RETURN(std::vector<Json> lines, Journal::ReadAll(path));
    for (const Json& line : lines) {
      COOP_ASSIGN_OR_RETURN(AlgorithmManifest m,
                            AlgorithmManifest::FromJson(line));
      entries[m.ref()] = std::move(m);
    }
    COOP_ASSIGN_OR_RETURN(journal, Journal::Open(path, sync_writes));
  }
  std::unique_ptr<AlgorithmRegistry> registry(
      new AlgorithmRegistry(clock, audit, std::move(journal)));
  registry->entries_ = std::move(entries);
  return registry;
}

absl::Status AlgorithmRegistry::Store(const PrincipalId& actor,
                                      AlgorithmManifest manifest,
                                      std::string_view action) {
  COOP_RETURN_IF_ERROR(journal_->Append(manifest.ToJson()));
  COOP_RETURN_IF_ERROR(
      audit_
          ->Append({audit::EventType::kVetting,
                    std::string(action),
                    actor,
                    {{"algo", manifest.ref().ToString()},
                     {"state",
                      std::string(VettingStateName(manifest.vetting.state))}}})
          .status());
  entries_[manifest.ref()] = std::move(manifest);
  return absl::OkStatus();
}

absl::StatusOr<AlgorithmManifest> AlgorithmRegistry::Submit(
    const PrincipalId& actor, AlgorithmManifest manifest) {
  std::unique_lock<std::shared_mutex> lock(mu_);
  auto it = entries_.find(manifest.ref());
  if (it != entries_.end() && it->second.vetting.state == VettingState::kVetted) {
    return AlreadyExists("duplicate", manifest.ref().ToString());
  }
  manifest.vetting = VettingStatus{};
  COOP_RETURN_IF_ERROR(Store(actor, manifest, "submit"));
  return manifest;
}

absl::StatusOr<VettingStatus> AlgorithmRegistry::VetEntry(
    const PrincipalId& actor, const AlgoRef& ref) {
  std::unique_lock<std::shared_mutex> lock(mu_);
  auto it = entries_.find(ref);
  if (it == entries_.end()) return NotFound("unknown-algorithm", ref.ToString());
  if (it->second.vetting.state == VettingState::kVetted) {
    return it->second.vetting;
  }
  AlgorithmManifest manifest = it->second;
  manifest.vetting = Vet(manifest, clock_->Now());
  VettingStatus status = manifest.vetting;
  COOP_RETURN_IF_ERROR(Store(actor, std::move(manifest), "vet"));
  return status;
}

absl::StatusOr<AlgoRef> AlgorithmRegistry::Register(const PrincipalId& actor,
                                                    AlgorithmManifest manifest) {
  std::unique_lock<std::shared_mutex> lock(mu_);
  auto it = entries_.find(manifest.ref());
  if (it != entries_.end() && it->second.vetting.state == VettingState::kVetted) {
    return AlreadyExists("duplicate", manifest.ref().ToString());
  }
  if (manifest.lay_description.empty()) {
    return InvalidArgument("lay-description-required");
  }
  manifest.vetting = Vet(manifest, clock_->Now());
  if (manifest.vetting.state != VettingState::kVetted) {
    std::vector<std::string> parts;
    for (const Finding& f : manifest.vetting.findings) {
      if (f.severity == Severity::kError) {
        parts.push_back(coop::StrCat(f.rule_id, "@", f.location, " ", f.message));
      }
    }
    return FailedPrecondition("not-vetted", absl::StrJoin(parts, "; "));
  }
  AlgoRef ref = manifest.ref();
  COOP_RETURN_IF_ERROR(Store(actor, std::move(manifest), "register"));
  return ref;
}

absl::StatusOr<AlgorithmManifest> AlgorithmRegistry::Get(
    const AlgoRef& ref) const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  auto it = entries_.find(ref);
  if (it == entries_.end()) return NotFound("unknown-algorithm", ref.ToString());
  return it->second;
}

std::vector<AlgorithmManifest> AlgorithmRegistry::List(Role viewer) const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  std::vector<AlgorithmManifest> out;
  if (viewer == Role::kOperator) return out;
  for (const auto& [ref, m] : entries_) {
    if (m.vetting.state != VettingState::kVetted) continue;
    if (m.visibility == Visibility::kCooperativePrivate &&
        viewer == Role::kQuerier) {
      continue;
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace coop::registry
