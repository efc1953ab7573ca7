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

#include "coop/common/schema.h"

#include <array>
#include <set>
#include <string>
#include <utility>

#include "coop/common/strings.h"
#include "coop/common/status.h"

namespace coop {
namespace {

constexpr std::array<std::pair<Role, std::string_view>, 5> kRoles = {{
    {Role::kMember, "member"},
    {Role::kQuerier, "querier"},
    {Role::kOperator, "operator"},
    {Role::kSteward, "steward"},
    {Role::kCooperativeSelf, "cooperative-self"},
}};

constexpr std::array<std::pair<FieldKind, std::string_view>, 4> kKinds = {{
    {FieldKind::kNumber, "number"},
    {FieldKind::kText, "text"},
    {FieldKind::kTimestamp, "timestamp"},
    {FieldKind::kGeo, "geo"},
}};

}  // namespace

std::string_view RoleName(Role role) {
  for (const auto& [r, name] : kRoles) {
    if (r == role) return name;
  }
  return "unknown";
}

std::optional<Role> RoleFromName(std::string_view name) {
  for (const auto& [r, n] : kRoles) {
    if (n == name) return r;
  }
  return std::nullopt;
}

std::string_view FieldKindName(FieldKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<FieldKind> FieldKindFromName(std::string_view name) {
  for (const auto& [k, n] : kKinds) {
    if (n == name) return k;
  }
  return std::nullopt;
}

Json FieldSpecToJson(const FieldSpec& spec) {
  Json j{{"name", spec.name}, {"kind", FieldKindName(spec.kind)}};
  if (!spec.unit.empty()) j["unit"] = spec.unit;
  return j;
}

absl::StatusOr<FieldSpec> FieldSpecFromJson(const Json& json) {
  if (!json.is_object() || !json.contains("name") || !json.contains("kind") ||
      !json["name"].is_string() || !json["kind"].is_string()) {
    return InvalidArgument("bad-field-spec");
  }
  for (const auto& [k, v] : json.items()) {
    if (k != "name" && k != "kind" && k != "unit") {
      return InvalidArgument("unknown-field", k);
    }
  }
  FieldSpec spec;
  spec.name = json["name"].get<std::string>();
  if (spec.name.empty()) return InvalidArgument("bad-field-spec", "name");
  auto kind = FieldKindFromName(json["kind"].get<std::string>());
  if (!kind) return InvalidArgument("bad-field-kind", spec.name);
  spec.kind = *kind;
  if (json.contains("unit")) {
    if (!json["unit"].is_string()) return InvalidArgument("bad-field-spec");
    spec.unit = json["unit"].get<std::string>();
  }
  return spec;
}

Json SchemaToJson(const std::vector<FieldSpec>& schema) {
  Json out = Json::array();
  for (const FieldSpec& f : schema) out.push_back(FieldSpecToJson(f));
  return out;
}

absl::StatusOr<std::vector<FieldSpec>> SchemaFromJson(const Json& json) {
  if (!json.is_array()) return InvalidArgument("bad-schema");
  std::vector<FieldSpec> out;
  for (const Json& f : json) {
    COOP_ASSIGN_OR_RETURN(FieldSpec spec, FieldSpecFromJson(f));
    out.push_back(std::move(spec));
  }
  return out;
}

const FieldSpec* FindField(const std::vector<FieldSpec>& schema,
                           std::string_view name) {
  for (const FieldSpec& f : schema) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::string AlgoRef::ToString() const {
  return coop::StrCat(algo_id, "@", version);
}

Json AlgoRefToJson(const AlgoRef& ref) {
  return Json{{"algo_id", ref.algo_id}, {"version", ref.version}};
}

absl::StatusOr<AlgoRef> AlgoRefFromJson(const Json& json) {
  if (!json.is_object() || !json.contains("algo_id") ||
      !json.contains("version") || !json["algo_id"].is_string() ||
      !json["version"].is_number_integer()) {
    return InvalidArgument("bad-algo-ref");
  }
  return AlgoRef{json["algo_id"].get<std::string>(),
                 json["version"].get<int>()};
}

}  // namespace coop
