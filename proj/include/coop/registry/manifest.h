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

#ifndef COOP_REGISTRY_MANIFEST_H_
#define COOP_REGISTRY_MANIFEST_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/schema.h"

namespace coop::registry {

enum class OutputMode { kAggregate, kSubject };
enum class Visibility { kPublic, kCooperativePrivate };
enum class VettingState { kDraft, kVetted, kRejected };
enum class Severity { kError, kWarning };

struct Finding {
  std::string rule_id;   // R1..R5, PARSE, MODE, TYPE, HIST, META, MANUAL
  std::string location;  // "line:column" or a manifest field name
  std::string message;
  Severity severity = Severity::kError;

  bool operator==(const Finding&) const = default;
};

struct VettingStatus {
  VettingState state = VettingState::kDraft;
  Timestamp checked_at = 0;
  std::vector<Finding> findings;

  bool HasErrors() const;
};

struct AlgorithmManifest {
  std::string algo_id;
  int version = 1;
  std::string title;
  std::string lay_description;
  OutputMode output_mode = OutputMode::kAggregate;
  std::vector<FieldSpec> required_fields;  // "requires" on the wire
  std::vector<std::string> purpose_tags;
  std::string source;
  Visibility visibility = Visibility::kPublic;
  VettingStatus vetting;
  // Bias and discrimination review is a human judgement; it is recorded here
  // and surfaced as a warning, it does not gate vetting.
  bool manual_review_passed = false;

  AlgoRef ref() const { return {algo_id, version}; }
  // SHA-256 hex of the lay description; consent callers echo it back.
  std::string DescriptionDigest() const;

  Json ToJson() const;
  // Listing form for viewers who may not see the program text.
  Json MetadataJson() const;
  // Strict: unknown fields are rejected.
  static absl::StatusOr<AlgorithmManifest> FromJson(const Json& json);
};

std::string_view OutputModeName(OutputMode mode);
std::string_view VisibilityName(Visibility v);
std::string_view VettingStateName(VettingState s);
Json VettingStatusToJson(const VettingStatus& status);

}  // namespace coop::registry

#endif  // COOP_REGISTRY_MANIFEST_H_
