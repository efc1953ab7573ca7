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

#ifndef COOP_AUTHZ_PRINCIPALS_H_
#define COOP_AUTHZ_PRINCIPALS_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "coop/audit/audit_log.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/ids.h"
#include "coop/common/journal.h"
#include "coop/common/schema.h"
#include "coop/pds/pds_service.h"

namespace coop::authz {

struct Principal {
  PrincipalId id;
  Role role = Role::kMember;
  std::string legal_name;
  std::string credential_hash;  // SHA-256 hex of the bearer credential
  std::string birth_date;       // members: YYYY-MM-DD, may be empty
  std::string public_key;       // raw Ed25519 key; signs receipts
  Timestamp enrolled_at = 0;

  Json ToJson() const;  // persisted form
  static absl::StatusOr<Principal> FromJson(const Json& json);
  // What other principals may see.
  Json PublicJson() const;
};

struct EnrollRequest {
  Role role = Role::kMember;
  std::string legal_name;
  std::string credential;
  std::string birth_date;
  std::string public_key;
};

// Enrolled principals and their pre-shared bearer credentials. Only hashes
// of credentials are kept.
class PrincipalDirectory final : public pds::MemberDirectory {
 public:
  static absl::StatusOr<std::unique_ptr<PrincipalDirectory>> Open(
      const std::filesystem::path& path, const Clock* clock, IdSource* ids,
      audit::AuditLog* audit, bool sync_writes);

  // Errors: duplicate-credentials, weak-credential, bad-birth-date,
  // bad-public-key, missing-legal-name.
  absl::StatusOr<Principal> Enroll(const PrincipalId& actor,
                                   EnrollRequest request);

  // Errors: unauthenticated.
  absl::StatusOr<Principal> Authenticate(std::string_view credential) const;

  absl::StatusOr<Principal> Get(std::string_view id) const;
  bool IsMember(std::string_view id) const override;
  size_t size() const;

 private:
  PrincipalDirectory(const Clock* clock, IdSource* ids, audit::AuditLog* audit,
                     std::unique_ptr<Journal> journal)
      : clock_(clock), ids_(ids), audit_(audit), journal_(std::move(journal)) {}

  const Clock* clock_;
  IdSource* ids_;
  audit::AuditLog* audit_;
  std::unique_ptr<Journal> journal_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Principal, std::less<>> by_id_;
  std::map<std::string, std::string, std::less<>> by_credential_hash_;
};

inline constexpr size_t kMinCredentialLength = 16;

}  // namespace coop::authz

#endif  // COOP_AUTHZ_PRINCIPALS_H_
