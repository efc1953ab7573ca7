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

#ifndef COOP_NODE_CONFIG_H_
#define COOP_NODE_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/clock.h"

namespace coop::node {

// Settings for one cooperative node, or for an operator host when
// operator_mode is set. The text form is one `key = value` per line;
// `#` starts a comment.
struct NodeConfig {
  std::string cooperative_name = "cooperative";
  std::string ui_label;  // falls back to cooperative_name
  int k_threshold = 5;
  Duration token_lifetime = 10 * kMinute;
  Duration session_idle = kHour;
  Duration transactional_max = kDay;
  Duration static_max = 365 * kDay;
  int handshake_stages = 3;
  std::string listen_address = "127.0.0.1:8080";
  std::filesystem::path data_dir;  // empty: memory only
  std::filesystem::path key_dir;   // empty: <data_dir>/keys
  bool ephemeral_keys = false;     // keys live in memory only
  bool operator_mode = false;
  bool sync_writes = true;
  std::filesystem::path steward_credential_file;
  std::filesystem::path console_dir;  // static files served at /console
  std::filesystem::path operator_credential_file;  // operator hosts
  struct Tenant {
    std::string name;
    std::filesystem::path config;
  };
  std::vector<Tenant> tenants;  // operator hosts

  std::string label() const {
    return ui_label.empty() ? cooperative_name : ui_label;
  }
  std::filesystem::path effective_key_dir() const;
};

absl::Status ValidateConfig(const NodeConfig& config);

// Relative paths in the text resolve against `base_dir`.
absl::StatusOr<NodeConfig> ParseConfig(
    std::string_view text, const std::filesystem::path& base_dir = {});
absl::StatusOr<NodeConfig> LoadConfig(const std::filesystem::path& path);

// Reads the path named by COOPNODE_CONFIG.
absl::StatusOr<NodeConfig> LoadConfigFromEnvironment();

// "90", "90s", "15m", "2h", "30d".
absl::StatusOr<Duration> ParseDuration(std::string_view text);

}  // namespace coop::node

#endif  // COOP_NODE_CONFIG_H_
