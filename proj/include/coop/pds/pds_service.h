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

#ifndef COOP_PDS_PDS_SERVICE_H_
#define COOP_PDS_PDS_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "coop/audit/audit_log.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/ids.h"
#include "coop/common/schema.h"
#include "coop/dsl/evaluator.h"
#include "coop/pds/key_vault.h"
#include "coop/pds/store_file.h"

namespace coop::pds {

class MemberDirectory {
 public:
  virtual ~MemberDirectory() = default;
  virtual bool IsMember(std::string_view id) const = 0;
};

// Decides whether `credential` (an access token or an issuance directive)
// authorizes running `algo` against a store owned by `owner`.
class ExecutionValidator {
 public:
  virtual ~ExecutionValidator() = default;
  virtual absl::Status ValidateExecution(std::string_view credential,
                                         const AlgoRef& algo,
                                         const MemberId& owner) const = 0;
};

struct StoreInfo {
  std::string store_id;
  MemberId owner;
  Hosting hosting;
  StoreStatus status = StoreStatus::kActive;
  std::vector<FieldSpec> schema;
  Timestamp created_at = 0;
  size_t record_count = 0;

  Json ToJson() const;
};

struct RecordSelector {
  bool all = false;
  std::vector<std::string> record_ids;
};

class StoreSlot;
class MemberHostedEndpoint;

// The only component that touches raw record values. Every mutating call is
// owner-only; execution needs a credential accepted by the validator.
class PdsService {
 public:
  struct Options {
    std::filesystem::path dir;  // empty: nothing persisted
    bool sync_writes = false;
    const Clock* clock = nullptr;
    IdSource* ids = nullptr;
    audit::AuditLog* audit = nullptr;
    const KeyVault* vault = nullptr;
    const MemberDirectory* members = nullptr;
    const ExecutionValidator* validator = nullptr;
  };

  static absl::StatusOr<std::unique_ptr<PdsService>> Open(Options options);
  ~PdsService();

  // Errors: unknown-member, empty-schema, duplicate-field, bad-endpoint.
  absl::StatusOr<StoreInfo> CreateStore(const MemberId& owner,
                                        std::vector<FieldSpec> schema,
                                        Hosting hosting);

  // Each record is a JSON object with every schema field. The whole batch is
  // rejected on the first offending field. Errors: not-owner,
  // store-suspended, schema-violation.
  absl::StatusOr<std::vector<std::string>> Ingest(const PrincipalId& actor,
                                                  std::string_view store_id,
                                                  const std::vector<Json>& records);

  absl::StatusOr<size_t> Remove(const PrincipalId& actor,
                                std::string_view store_id,
                                const RecordSelector& selector);

  absl::StatusOr<StoreInfo> SetStatus(const PrincipalId& actor,
                                      std::string_view store_id,
                                      StoreStatus status);

  // Runs `algorithm` over the store's current records. Member-hosted stores
  // are reached through their endpoint, which checks the credential again.
  // Errors: invalid-token, store-suspended, undeclared-field,
  // schema-mismatch.
  absl::StatusOr<dsl::LocalResult> LocalEvaluate(
      std::string_view store_id, const dsl::CompiledAlgorithm& algorithm,
      std::string_view credential) const;

  absl::StatusOr<StoreInfo> Info(std::string_view store_id) const;
  std::vector<StoreInfo> StoresOf(const MemberId& owner) const;
  std::vector<StoreInfo> AllStores() const;

  // The owner's own view of their records.
  absl::StatusOr<Json> ReadRecords(const PrincipalId& actor,
                                   std::string_view store_id) const;

  // Backup archive: the store file itself (header + ciphertext frames).
  absl::StatusOr<std::string> ExportArchive(const PrincipalId& actor,
                                            std::string_view store_id) const;
  absl::StatusOr<StoreInfo> ImportArchive(const PrincipalId& actor,
                                          std::string_view archive);

 private:
  explicit PdsService(Options options);

  absl::Status LoadAll();
  absl::StatusOr<std::shared_ptr<StoreSlot>> Find(std::string_view id) const;
  absl::StatusOr<std::shared_ptr<StoreSlot>> FindOwned(
      const PrincipalId& actor, std::string_view id) const;
  std::filesystem::path PathFor(const StoreHeader& header) const;
  MemberHostedEndpoint& EndpointFor(const std::string& url);
  absl::Status Audit(const PrincipalId& actor, std::string_view action,
                     std::string_view store_id,
                     std::map<std::string, std::string> extra = {}) const;

  Options options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<StoreSlot>, std::less<>> stores_;
  std::map<std::string, std::unique_ptr<MemberHostedEndpoint>> endpoints_;
};

}  // namespace coop::pds

#endif  // COOP_PDS_PDS_SERVICE_H_
