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

#include "coop/authz/principals.h"

#include <mutex>
#include <utility>

#include "absl/time/civil_time.h"
#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::authz {
namespace {

std::string_view IdPrefix(Role role) {
  switch (role) {
    case Role::kMember: return "m";
    case Role::kQuerier: return "q";
    case Role::kOperator: return "op";
    case Role::kSteward: return "st";
    case Role::kCooperativeSelf: return "coop";
  }
  return "p";
}

bool ValidBirthDate(const std::string& text) {
  absl::CivilDay day;
  return text.size() == 10 && absl::ParseCivilTime(AbslView(text), &day) &&
         absl::FormatCivilTime(day) == text;
}

}  // namespace

Json Principal::ToJson() const {
  return Json{{"id", id},
              {"role", RoleName(role)},
              {"legal_name", legal_name},
              {"credential_hash", credential_hash},
              {"birth_date", birth_date},
              {"public_key", crypto::Base64Encode(public_key)},
              {"enrolled_at", FormatTimestamp(enrolled_at)}};
}

absl::StatusOr<Principal> Principal::FromJson(const Json& json) {
  Principal p;
  try {
    p.id = json.at("id").get<std::string>();
    std::optional<Role> role = RoleFromName(json.at("role").get<std::string>());
    if (!role) return InvalidArgument("bad-role");
    p.role = *role;
    p.legal_name = json.at("legal_name").get<std::string>();
    p.credential_hash = json.at("credential_hash").get<std::string>();
    p.birth_date = json.at("birth_date").get<std::string>();
    COOP_ASSIGN_OR_RETURN(
        p.public_key,
        crypto::Base64Decode(json.at("public_key").get<std::string>()));
    COOP_ASSIGN_OR_RETURN(
        p.enrolled_at,
        ParseTimestamp(json.at("enrolled_at").get<std::string>()));
  } catch (const Json::exception&) {
    return InvalidArgument("bad-principal");
  }
  return p;
}

Json Principal::PublicJson() const {
  Json out{{"id", id},
           {"role", RoleName(role)},
           {"legal_name", legal_name},
           {"enrolled_at", FormatTimestamp(enrolled_at)}};
  if (!public_key.empty()) {
    out["public_key"] = crypto::Base64Encode(public_key);
  }
  return out;
}

absl::StatusOr<std::unique_ptr<PrincipalDirectory>> PrincipalDirectory::Open(
    const std::filesystem::path& path, const Clock* clock, IdSource* ids,
    audit::AuditLog* audit, bool sync_writes) {
  std::unique_ptr<Journal> journal = std::make_unique<Journal>();
  std::vector<Json> lines;
  if (!path.empty()) {
    COOP_ASSIGN_OR_RETURN(lines, Journal::ReadAll(path));
    COOP_ASSIGN_OR_RETURN(journal, Journal::Open(path, sync_writes));
  }
  std::unique_ptr<PrincipalDirectory> dir(
      new PrincipalDirectory(clock, ids, audit, std::move(journal)));
  for (const Json& line : lines) {
    COOP_ASSIGN_OR_RETURN(Principal p, Principal::FromJson(line));
    dir->by_credential_hash_[p.credential_hash] = p.id;
    dir->by_id_[p.id] = std::move(p);
  }
  return dir;
}

absl::StatusOr<Principal> PrincipalDirectory::Enroll(const PrincipalId& actor,
                                                     EnrollRequest request) {
  if (request.legal_name.empty()) return InvalidArgument("missing-legal-name");
  if (request.credential.size() < kMinCredentialLength) {
    return InvalidArgument("weak-credential");
  }
  if (!request.birth_date.empty() &&
      (request.role != Role::kMember || !ValidBirthDate(request.birth_date))) {
    return InvalidArgument("bad-birth-date");
  }
  if (!request.public_key.empty() && request.public_key.size() != 32) {
    return InvalidArgument("bad-public-key");
  }
  Principal p;
  p.role = request.role;
  p.legal_name = std::move(request.legal_name);
  p.credential_hash = crypto::Sha256Hex(request.credential);
  p.birth_date = std::move(request.birth_date);
  p.public_key = std::move(request.public_key);
  p.enrolled_at = clock_->Now();

  std::unique_lock lock(mu_);
  if (by_credential_hash_.contains(p.credential_hash)) {
    return AlreadyExists("duplicate-credentials");
  }
  p.id = ids_->Next(IdPrefix(p.role));
  COOP_RETURN_IF_ERROR(journal_->Append(p.ToJson()));
  COOP_RETURN_IF_ERROR(
      audit_
          ->Append({audit::EventType::kEnrollment,
                    "enroll",
                    actor.empty() ? p.id : actor,
                    {{"principal", p.id},
                     {"role", std::string(RoleName(p.role))}}})
          .status());
  by_credential_hash_[p.credential_hash] = p.id;
  by_id_[p.id] = p;
  return p;
}

absl::StatusOr<Principal> PrincipalDirectory::Authenticate(
    std::string_view credential) const {
  if (credential.empty()) return Unauthenticated("unauthenticated");
  const std::string hash = crypto::Sha256Hex(credential);
  std::shared_lock lock(mu_);
  auto it = by_credential_hash_.find(hash);
  if (it == by_credential_hash_.end()) return Unauthenticated("unauthenticated");
  return by_id_.find(it->second)->second;
}

absl::StatusOr<Principal> PrincipalDirectory::Get(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return NotFound("unknown-principal", id);
  return it->second;
}

bool PrincipalDirectory::IsMember(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(id);
  return it != by_id_.end() && it->second.role == Role::kMember;
}

size_t PrincipalDirectory::size() const {
  std::shared_lock lock(mu_);
  return by_id_.size();
}

}  // namespace coop::authz
