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

#ifndef COOP_COMMON_SCHEMA_H_
#define COOP_COMMON_SCHEMA_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"

namespace coop {

using MemberId = std::string;
using PrincipalId = std::string;

enum class Role { kMember, kQuerier, kOperator, kSteward, kCooperativeSelf };

std::string_view RoleName(Role role);
std::optional<Role> RoleFromName(std::string_view name);

enum class FieldKind { kNumber, kText, kTimestamp, kGeo };

std::string_view FieldKindName(FieldKind kind);
std::optional<FieldKind> FieldKindFromName(std::string_view name);

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::kNumber;
  std::string unit;

  bool operator==(const FieldSpec&) const = default;
};

Json FieldSpecToJson(const FieldSpec& spec);
absl::StatusOr<FieldSpec> FieldSpecFromJson(const Json& json);
Json SchemaToJson(const std::vector<FieldSpec>& schema);
absl::StatusOr<std::vector<FieldSpec>> SchemaFromJson(const Json& json);

const FieldSpec* FindField(const std::vector<FieldSpec>& schema,
                           std::string_view name);

// Exact (algo_id, version) reference; consents and assertions bind to it.
struct AlgoRef {
  std::string algo_id;
  int version = 0;

  bool operator==(const AlgoRef&) const = default;
  auto operator<=>(const AlgoRef&) const = default;
  std::string ToString() const;  // "id@version"
};

Json AlgoRefToJson(const AlgoRef& ref);
absl::StatusOr<AlgoRef> AlgoRefFromJson(const Json& json);

}  // namespace coop

#endif  // COOP_COMMON_SCHEMA_H_
