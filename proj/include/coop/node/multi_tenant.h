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

#ifndef COOP_NODE_MULTI_TENANT_H_
#define COOP_NODE_MULTI_TENANT_H_

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/node/config.h"
#include "coop/node/node.h"

namespace coop::node {

// An outsourced operator process hosting several cooperatives. Each tenant
// is a full Node whose persisted files live under the operator's storage
// root while its key material stays outside it. Tenant routes are mounted
// under /t/{tenant}/.
class MultiTenantHost {
 public:
  struct TenantSpec {
    std::string name;
    NodeConfig config;
    std::string steward_credential;
  };
  struct Options {
    std::filesystem::path storage_root;  // empty: memory only
    std::string operator_credential;     // guards /operator/status
    std::vector<TenantSpec> tenants;
    const Clock* clock = nullptr;
    IdSource* ids = nullptr;
  };

  static absl::StatusOr<std::unique_ptr<MultiTenantHost>> Open(Options options);

  // Loads every `tenant` line of an operator-mode config.
  static absl::StatusOr<std::unique_ptr<MultiTenantHost>> FromConfig(
      const NodeConfig& host, const Clock* clock = nullptr,
      IdSource* ids = nullptr);

  ApiResponse Handle(const ApiRequest& request);

  Node* tenant(std::string_view name);
  std::vector<std::string> tenant_names() const;
  const std::filesystem::path& storage_root() const { return root_; }

 private:
  MultiTenantHost() = default;
  ApiResponse Status(const ApiRequest& request) const;

  std::filesystem::path root_;
  std::string operator_credential_hash_;
  std::map<std::string, std::unique_ptr<Node>, std::less<>> tenants_;
};

}  // namespace coop::node

#endif  // COOP_NODE_MULTI_TENANT_H_
