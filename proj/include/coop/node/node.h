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

#ifndef COOP_NODE_NODE_H_
#define COOP_NODE_NODE_H_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/assertion/assertion_service.h"
#include "coop/assertion/keys.h"
#include "coop/audit/audit_log.h"
#include "coop/authz/binding.h"
#include "coop/authz/consent.h"
#include "coop/authz/execution_validator.h"
#include "coop/authz/principals.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/ids.h"
#include "coop/engine/opal_engine.h"
#include "coop/node/config.h"
#include "coop/pds/key_vault.h"
#include "coop/pds/pds_service.h"
#include "coop/registry/registry.h"

namespace coop::node {

// Transport-neutral request. `authorization` and `operator_authorization`
// carry the raw header values ("Bearer <credential>").
struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string authorization;
  std::string operator_authorization;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  // Parses `body`; null when it is not JSON.
  Json json() const;
};

inline constexpr std::string_view kOperatorAuthorizationHeader =
    "X-Coop-Operator-Authorization";

// One row of the access table. An empty `roles` set with `open` false
// never matches; `open` routes need no credential.
struct EndpointSpec {
  std::string method;
  std::string pattern;  // "/stores/{id}/records"
  bool open = false;
  std::set<Role> roles;
};

// The role-based access table enforced at the perimeter.
const std::vector<EndpointSpec>& AccessTable();

// Endpoint patterns reachable by `role`, for capability listings.
std::vector<std::string> CapabilitiesOf(Role role);

// Maps a status to its HTTP code.
int HttpStatusFor(const absl::Status& status);

// Error body: {"error": slug, "message": text, <detail>: value...}.
Json ErrorJson(const absl::Status& status);

// A complete cooperative: every service wired together behind one
// request handler.
class Node {
 public:
  struct Options {
    NodeConfig config;
    const Clock* clock = nullptr;  // null: system clock
    IdSource* ids = nullptr;       // null: random ids
    // Enrolled as the first steward when no principal holds it yet.
    std::string steward_credential;
  };

  static absl::StatusOr<std::unique_ptr<Node>> Open(Options options);
  ~Node();

  ApiResponse Handle(const ApiRequest& request);

  const NodeConfig& config() const { return config_; }
  const Clock& clock() const { return *clock_; }
  audit::AuditLog& audit() { return *audit_; }
  authz::PrincipalDirectory& principals() { return *principals_; }
  registry::AlgorithmRegistry& algorithms() { return *algorithms_; }
  pds::PdsService& stores() { return *stores_; }
  authz::ConsentRegistry& consent() { return *consent_; }
  authz::BindingService& binding() { return *binding_; }
  engine::OpalEngine& engine() { return *engine_; }
  assertion::CooperativeKeys& keys() { return *keys_; }
  assertion::AssertionService& assertions() { return *assertions_; }

 private:
  struct Call;
  using Handler = std::function<absl::StatusOr<Json>(Node&, Call&)>;
  struct Route {
    const EndpointSpec* spec;
    std::vector<std::string> segments;
    Handler handler;
    bool raw_document = false;  // body is a canonical document string
  };

  explicit Node(NodeConfig config) : config_(std::move(config)) {}
  void BuildRoutes();
  absl::StatusOr<authz::Principal> Authenticate(std::string_view header) const;

  // Handlers.
  absl::StatusOr<Json> Health(Call& c);
  absl::StatusOr<Json> ConsoleMeta(Call& c);
  absl::StatusOr<Json> PublishedKeys(Call& c);
  absl::StatusOr<Json> PublishedAssertion(Call& c);
  absl::StatusOr<Json> Me(Call& c);
  absl::StatusOr<Json> Enroll(Call& c);
  absl::StatusOr<Json> GetPrincipal(Call& c);
  absl::StatusOr<Json> ListAlgorithms(Call& c);
  absl::StatusOr<Json> RegisterAlgorithm(Call& c);
  absl::StatusOr<Json> DescribeAlgorithm(Call& c);
  absl::StatusOr<Json> BeginSession(Call& c);
  absl::StatusOr<Json> GetSessionRoute(Call& c);
  absl::StatusOr<Json> AdvanceSession(Call& c);
  absl::StatusOr<Json> AbortSession(Call& c);
  absl::StatusOr<Json> ClaimToken(Call& c);
  absl::StatusOr<Json> RefreshToken(Call& c);
  absl::StatusOr<Json> Introspect(Call& c);
  absl::StatusOr<Json> GrantConsent(Call& c);
  absl::StatusOr<Json> WithdrawConsent(Call& c);
  absl::StatusOr<Json> PendingConsent(Call& c);
  absl::StatusOr<Json> DenyConsent(Call& c);
  absl::StatusOr<Json> ListGrants(Call& c);
  absl::StatusOr<Json> ExecuteQuery(Call& c);
  absl::StatusOr<Json> CreateStore(Call& c);
  absl::StatusOr<Json> ListStores(Call& c);
  absl::StatusOr<Json> StoreInfo(Call& c);
  absl::StatusOr<Json> IngestRecords(Call& c);
  absl::StatusOr<Json> ReadRecords(Call& c);
  absl::StatusOr<Json> RemoveRecords(Call& c);
  absl::StatusOr<Json> SuspendStore(Call& c);
  absl::StatusOr<Json> ActivateStore(Call& c);
  absl::StatusOr<Json> ExportStore(Call& c);
  absl::StatusOr<Json> ImportStore(Call& c);
  absl::StatusOr<Json> IssueAssertion(Call& c);
  absl::StatusOr<Json> IssueStaticAssertion(Call& c);
  absl::StatusOr<Json> RecordReceipt(Call& c);
  absl::StatusOr<Json> GetAssertion(Call& c);
  absl::StatusOr<Json> ListReceipts(Call& c);
  absl::StatusOr<Json> VerifyAssertion(Call& c);
  absl::StatusOr<Json> Demonstrate(Call& c);
  absl::StatusOr<Json> AuditEvents(Call& c);
  absl::StatusOr<Json> AuditExport(Call& c);

  NodeConfig config_;
  std::unique_ptr<Clock> owned_clock_;
  std::unique_ptr<IdSource> owned_ids_;
  const Clock* clock_ = nullptr;
  IdSource* ids_ = nullptr;

  std::unique_ptr<audit::AuditLog> audit_;
  std::unique_ptr<authz::PrincipalDirectory> principals_;
  std::unique_ptr<registry::AlgorithmRegistry> algorithms_;
  std::unique_ptr<pds::KeyVault> vault_;
  std::unique_ptr<authz::ConsentRegistry> consent_;
  std::unique_ptr<authz::BindingService> binding_;
  std::unique_ptr<authz::AuthzExecutionValidator> validator_;
  std::unique_ptr<pds::PdsService> stores_;
  std::unique_ptr<engine::OpalEngine> engine_;
  std::unique_ptr<assertion::CooperativeKeys> keys_;
  std::unique_ptr<assertion::AssertionService> assertions_;

  std::vector<Route> routes_;
};

}  // namespace coop::node

#endif  // COOP_NODE_NODE_H_
