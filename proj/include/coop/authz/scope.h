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

#ifndef COOP_AUTHZ_SCOPE_H_
#define COOP_AUTHZ_SCOPE_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/schema.h"

namespace coop::authz {

struct Scope {
  enum class Kind { kAllMembers, kMemberSet, kSingleSubject };

  Kind kind = Kind::kAllMembers;
  std::vector<MemberId> members;  // sorted, unique; one entry for a subject

  static Scope All() { return {}; }
  static Scope Subject(MemberId id) {
    return {Kind::kSingleSubject, {std::move(id)}};
  }
  static Scope Set(std::vector<MemberId> ids);

  bool Covers(const MemberId& member) const;
  const MemberId& subject() const { return members.front(); }
  bool operator==(const Scope&) const = default;

  // {"kind": "all-members"} | {"kind": "member-set", "members": [...]}
  // | {"kind": "single-subject", "subject": id}
  Json ToJson() const;
  static absl::StatusOr<Scope> FromJson(const Json& json);
};

// What a querier asks to run: exact algorithm version, over whom, why.
struct Requested {
  AlgoRef algo;
  Scope scope;
  std::string purpose;

  bool operator==(const Requested&) const = default;
  Json ToJson() const;
  static absl::StatusOr<Requested> FromJson(const Json& json);
};

}  // namespace coop::authz

#endif  // COOP_AUTHZ_SCOPE_H_
