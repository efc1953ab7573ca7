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

#include "coop/node/multi_tenant.h"

#include <algorithm>
#include <cctype>
#include <utility>

#include "coop/common/crypto.h"
#include "coop/common/journal.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::node {
namespace {

bool IsWithin(const std::filesystem::path& inner,
              const std::filesystem::path& outer) {
  const std::filesystem::path a = std::filesystem::weakly_canonical(inner);
  const std::filesystem::path b = std::filesystem::weakly_canonical(outer);
  auto [end, _] = std::mismatch(b.begin(), b.end(), a.begin(), a.end());
  return end == b.end();
}

bool ValidTenantName(std::string_view name) {
  if (name.empty()) return false;
  for (char ch : name) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) {
      return false;
    }
  }
  return true;
}

ApiResponse Error(const absl::Status& s) {
  return {HttpStatusFor(s), "application/json", ErrorJson(s).dump()};
}

std::string ReadCredential(const std::filesystem::path& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return {};
  std::string out = *std::move(text);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

}  // namespace

absl::StatusOr<std::unique_ptr<MultiTenantHost>> MultiTenantHost::Open(
    Options options) {
  if (options.tenants.empty()) return InvalidArgument("bad-config", "no tenants");
  std::unique_ptr<MultiTenantHost> host(new MultiTenantHost);
  host->root_ = options.storage_root;
  if (!options.operator_credential.empty()) {
    host->operator_credential_hash_ = crypto::Sha256Hex(options.operator_credential);
  }
  for (TenantSpec& t : options.tenants) {
    if (!ValidTenantName(t.name)) return InvalidArgument("bad-tenant-name", t.name);
    if (host->tenants_.contains(t.name)) {
      return InvalidArgument("duplicate-tenant", t.name);
    }
    NodeConfig cfg = std::move(t.config);
    cfg.operator_mode = false;
    cfg.tenants.clear();
    cfg.data_dir =
        host->root_.empty() ? std::filesystem::path() : host->root_ / "tenants" / t.name;
    if (cfg.key_dir.empty()) cfg.ephemeral_keys = true;
    if (!cfg.ephemeral_keys && !host->root_.empty() &&
        IsWithin(cfg.key_dir, host->root_)) {
      return InvalidArgument("key-in-operator-storage", t.name);
    }
    Node::Options no;
    no.config = std::move(cfg);
    no.clock = options.clock;
    no.ids = options.ids;
    no.steward_credential = std::move(t.steward_credential);
    COOP_ASSIGN_OR_RETURN(std::unique_ptr<Node> node, Node::Open(std::move(no)));
    host->tenants_.emplace(t.name, std::move(node));
  }
  return host;
}

absl::StatusOr<std::unique_ptr<MultiTenantHost>> MultiTenantHost::FromConfig(
    const NodeConfig& host, const Clock* clock, IdSource* ids) {
  if (!host.operator_mode) return InvalidArgument("bad-config", "not operator mode");
  Options o;
  o.storage_root = host.data_dir;
  if (!host.operator_credential_file.empty()) {
    o.operator_credential = ReadCredential(host.operator_credential_file);
  }
  o.clock = clock;
  o.ids = ids;
  for (const NodeConfig::Tenant& t : host.tenants) {
    COOP_ASSIGN_OR_RETURN(NodeConfig cfg, LoadConfig(t.config));
    TenantSpec spec{t.name, cfg, {}};
    if (!cfg.steward_credential_file.empty()) {
      spec.steward_credential = ReadCredential(cfg.steward_credential_file);
      spec.config.steward_credential_file.clear();
    }
    o.tenants.push_back(std::move(spec));
  }
  return Open(std::move(o));
}

Node* MultiTenantHost::tenant(std::string_view name) {
  auto it = tenants_.find(name);
  return it == tenants_.end() ? nullptr : it->second.get();
}

std::vector<std::string> MultiTenantHost::tenant_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tenants_) out.push_back(name);
  return out;
}

ApiResponse MultiTenantHost::Status(const ApiRequest& request) const {
  constexpr std::string_view kPrefix = "Bearer ";
  const std::string_view header = request.authorization;
  if (operator_credential_hash_.empty() || !header.starts_with(kPrefix) ||
      !crypto::ConstantTimeEquals(
          crypto::Sha256Hex(header.substr(kPrefix.size())),
          operator_credential_hash_)) {
    return Error(Unauthenticated("unauthenticated"));
  }
  // Storage-only view: sizes and file counts, never contents.
  Json tenants = Json::array();
  for (const auto& [name, node] : tenants_) {
    uint64_t bytes = 0, files = 0;
    const std::filesystem::path dir = node->config().data_dir;
    std::error_code ec;
    if (!dir.empty() && std::filesystem::exists(dir, ec)) {
      for (const auto& e : std::filesystem::recursive_directory_iterator(dir, ec)) {
        if (e.is_regular_file(ec)) {
          ++files;
          bytes += e.file_size(ec);
        }
      }
    }
    tenants.push_back(Json{{"tenant", name},
                           {"label", node->config().label()},
                           {"files", files},
                           {"stored_bytes", bytes}});
  }
  return {200, "application/json", Json{{"tenants", std::move(tenants)}}.dump()};
}

ApiResponse MultiTenantHost::Handle(const ApiRequest& request) {
  const std::string_view path = request.path;
  if (path == "/healthz") {
    return {200, "application/json",
            Json{{"status", "ok"}, {"tenants", tenant_names()}}.dump()};
  }
  if (path == "/operator/status" && request.method == "GET") {
    return Status(request);
  }
  constexpr std::string_view kTenantPrefix = "/t/";
  if (path.starts_with(kTenantPrefix)) {
    std::string_view rest = path.substr(kTenantPrefix.size());
    const size_t slash = rest.find('/');
    const std::string_view name = rest.substr(0, slash);
    Node* node = tenant(name);
    if (node == nullptr) return Error(NotFound("unknown-tenant"));
    ApiRequest inner = request;
    inner.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    return node->Handle(inner);
  }
  return Error(NotFound("no-route", path));
}

}  // namespace coop::node
