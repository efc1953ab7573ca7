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

#ifndef COOP_SIM_HARNESS_H_
#define COOP_SIM_HARNESS_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/clock.h"
#include "coop/common/crypto.h"
#include "coop/common/ids.h"
#include "coop/node/multi_tenant.h"
#include "coop/node/node.h"
#include "coop/sim/fixture.h"

namespace coop::sim {

// Drives an in-process node strictly through its request handler, the way
// an HTTP client would. Principals are addressed by local aliases.
class Harness {
 public:
  struct Options {
    int k = 5;
    int stages = 3;
    uint64_t seed = 1;
    Timestamp start = 1767225600;  // 2026-01-01T00:00:00Z
    std::filesystem::path data_dir;  // empty: memory only
    std::string cooperative_name = "harness-coop";
  };

  static absl::StatusOr<std::unique_ptr<Harness>> Create(Options options);

  // Drives one tenant of a multi-tenant host under /t/{tenant}. The host owns
  // the node; node() must not be called on such a harness.
  static absl::StatusOr<std::unique_ptr<Harness>> ForTenant(
      node::MultiTenantHost* host, const std::string& tenant,
      const std::string& steward_credential, uint64_t seed);

  // Deterministic bearer credential for `alias` under `seed`.
  static std::string DeriveCredential(uint64_t seed, const std::string& alias);

  node::Node& node() { return *node_; }
  ManualClock& clock() { return clock_; }

  // Raw call as `alias` ("" for anonymous).
  node::ApiResponse Call(const std::string& alias, const std::string& method,
                         const std::string& path, const Json& body = nullptr,
                         const std::map<std::string, std::string>& query = {},
                         const std::string& operator_alias = "");
  // Same, mapping error responses back to a status carrying the slug.
  absl::StatusOr<Json> CallOk(const std::string& alias,
                              const std::string& method,
                              const std::string& path,
                              const Json& body = nullptr,
                              const std::map<std::string, std::string>& query = {},
                              const std::string& operator_alias = "");

  // Enrolls through the steward. `with_key` gives the principal a receipt
  // signing key.
  absl::StatusOr<std::string> Enroll(const std::string& alias, Role role,
                                     const std::string& legal_name,
                                     const std::string& birth_date = "",
                                     bool with_key = false);
  bool Known(const std::string& alias) const { return ids_.contains(alias); }
  const std::string& IdOf(const std::string& alias) const { return ids_.at(alias); }
  const std::string& CredentialOf(const std::string& alias) const {
    return credentials_.at(alias);
  }
  const crypto::SigningKey* KeyOf(const std::string& alias) const;

  // Enrolls every fixture member under its alias, creates its stores,
  // ingests records and suspends flagged stores. Returns store ids per
  // member alias.
  absl::StatusOr<std::map<std::string, std::vector<std::string>>> LoadFixture(
      const Fixture& fixture);

  absl::StatusOr<AlgoRef> Register(const std::string& algo_id, int version,
                                   const std::string& mode,
                                   const std::string& source,
                                   const std::vector<FieldSpec>& requires_fields,
                                   const std::vector<std::string>& purposes,
                                   const std::string& title = "",
                                   const std::string& lay_description = "");

  // Runs the handshake to completion. Returns the querier's token.
  absl::StatusOr<std::string> Handshake(const std::string& querier,
                                        const std::string& service_operator,
                                        const AlgoRef& algo, const Json& scope,
                                        const std::string& purpose);

  absl::StatusOr<Json> Execute(const std::string& querier,
                               const std::string& token, const AlgoRef& algo,
                               const Json& scope, const std::string& purpose);

  // Grants through the member's own API call, echoing the description digest.
  absl::StatusOr<Json> Grant(const std::string& member, const AlgoRef& algo,
                             const std::string& purpose,
                             const std::string& audience, Duration valid_for);

  // Signed receipt document for an assertion, built as the service provider
  // would.
  absl::StatusOr<Json> SignReceipt(const std::string& provider,
                                   const std::string& document);

 private:
  Harness() : clock_(0) {}

  absl::Status Bootstrap(std::string steward_credential);

  Options options_;
  ManualClock clock_;
  std::function<node::ApiResponse(const node::ApiRequest&)> transport_;
  std::string prefix_;
  SequentialIdSource ids_source_;
  std::unique_ptr<node::Node> node_;
  std::map<std::string, std::string> ids_;
  std::map<std::string, std::string> credentials_;
  std::map<std::string, crypto::SigningKey> keys_;
};

// Lower-case hex SHA-256 of a description string, as a console computes it.
std::string DescriptionDigestOf(const std::string& lay_description);

}  // namespace coop::sim

#endif  // COOP_SIM_HARNESS_H_
