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

#include "coop/authz/scope.h"

#include <algorithm>
#include <utility>

#include "coop/common/status.h"

namespace coop::authz {

Scope Scope::Set(std::vector<MemberId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return {Kind::kMemberSet, std::move(ids)};
}

bool Scope::Covers(const MemberId& member) const {
  if (kind == Kind::kAllMembers) return true;
  return std::binary_search(members.begin(), members.end(), member);
}

Json Scope::ToJson() const {
  switch (kind) {
    case Kind::kAllMembers:
      return Json{{"kind", "all-members"}};
    case Kind::kMemberSet:
      return Json{{"kind", "member-set"}, {"members", members}};
    case Kind::kSingleSubject:
      return Json{{"kind", "single-subject"}, {"subject", members.front()}};
  }
  return Json();
}

absl::StatusOr<Scope> Scope::FromJson(const Json& json) {
  if (!json.is_object() || !json.contains("kind") || !json["kind"].is_string()) {
    return InvalidArgument("bad-scope");
  }
  const std::string kind = json["kind"].get<std::string>();
  if (kind == "all-members" && json.size() == 1) return All();
  if (kind == "member-set" && json.size() == 2 && json.contains("members") &&
      json["members"].is_array() && !json["members"].empty()) {
    std::vector<MemberId> ids;
    for (const Json& m : json["members"]) {
      if (!m.is_string() || m.get<std::string>().empty()) {
        return InvalidArgument("bad-scope");
      }
      ids.push_back(m.get<std::string>());
    }
    return Set(std::move(ids));
  }
  if (kind == "single-subject" && json.size() == 2 &&
      json.contains("subject") && json["subject"].is_string() &&
      !json["subject"].get<std::string>().empty()) {
    return Subject(json["subject"].get<std::string>());
  }
  return InvalidArgument("bad-scope");
}

Json Requested::ToJson() const {
  return Json{{"algo", AlgoRefToJson(algo)},
              {"scope", scope.ToJson()},
              {"purpose", purpose}};
}

absl::StatusOr<Requested> Requested::FromJson(const Json& json) {
  if (!json.is_object() || !json.contains("algo") || !json.contains("scope") ||
      !json.contains("purpose") || !json["purpose"].is_string() ||
      json["purpose"].get<std::string>().empty()) {
    return InvalidArgument("bad-request");
  }
  Requested r;
  COOP_ASSIGN_OR_RETURN(r.algo, AlgoRefFromJson(json["algo"]));
  COOP_ASSIGN_OR_RETURN(r.scope, Scope::FromJson(json["scope"]));
  r.purpose = json["purpose"].get<std::string>();
  return r;
}

}  // namespace coop::authz
