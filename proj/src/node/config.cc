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

#include "coop/node/config.h"

#include <cstdlib>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "coop/common/journal.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::node {
namespace {

absl::Status BadKey(std::string_view key, std::string_view why) {
  return InvalidArgument("bad-config", coop::StrCat(key, ": ", why));
}

absl::StatusOr<bool> ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  return BadKey(key, "expected true or false");
}

absl::StatusOr<int> ParseInt(std::string_view key, std::string_view v) {
  int out = 0;
  if (!absl::SimpleAtoi(AbslView(v), &out)) return BadKey(key, "not an integer");
  return out;
}

std::filesystem::path Resolve(const std::filesystem::path& base,
                              std::string_view v) {
  std::filesystem::path p{std::string(v)};
  if (p.is_relative() && !base.empty()) return base / p;
  return p;
}

}  // namespace

std::filesystem::path NodeConfig::effective_key_dir() const {
  if (ephemeral_keys) return {};
  if (!key_dir.empty()) return key_dir;
  if (data_dir.empty()) return {};
  return data_dir / "keys";
}

absl::StatusOr<Duration> ParseDuration(std::string_view text) {
  if (text.empty()) return InvalidArgument("bad-duration");
  Duration unit = 1;
  switch (text.back()) {
    case 's': unit = 1; text.remove_suffix(1); break;
    case 'm': unit = kMinute; text.remove_suffix(1); break;
    case 'h': unit = kHour; text.remove_suffix(1); break;
    case 'd': unit = kDay; text.remove_suffix(1); break;
    default: break;
  }
  int64_t n = 0;
  if (!absl::SimpleAtoi(AbslView(text), &n)) {
    return InvalidArgument("bad-duration", text);
  }
  return n * unit;
}

absl::Status ValidateConfig(const NodeConfig& c) {
  if (c.k_threshold < 2) return BadKey("k_threshold", "must be at least 2");
  if (c.token_lifetime <= 0) return BadKey("token_lifetime", "must be positive");
  if (c.session_idle <= 0) return BadKey("session_idle", "must be positive");
  if (c.transactional_max <= 0) {
    return BadKey("transactional_max", "must be positive");
  }
  if (c.static_max <= 0) return BadKey("static_max", "must be positive");
  if (c.handshake_stages < 1) {
    return BadKey("handshake_stages", "must be at least 1");
  }
  if (c.cooperative_name.empty()) return BadKey("cooperative_name", "empty");
  if (c.operator_mode && c.tenants.empty()) {
    return BadKey("tenant", "operator mode needs at least one tenant");
  }
  if (!c.operator_mode && !c.tenants.empty()) {
    return BadKey("tenant", "only valid with operator_mode = true");
  }
  return absl::OkStatus();
}

absl::StatusOr<NodeConfig> ParseConfig(std::string_view text,
                                       const std::filesystem::path& base_dir) {
  NodeConfig c;
  int line_no = 0;
  for (absl::string_view raw : absl::StrSplit(AbslView(text), '\n')) {
    ++line_no;
    absl::string_view line = raw.substr(0, raw.find('#'));
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return InvalidArgument("bad-config",
                             coop::StrCat("line ", line_no, ": expected key = value"));
    }
    const std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    const std::string value(absl::StripAsciiWhitespace(line.substr(eq + 1)));
    if (key == "cooperative_name") {
      c.cooperative_name = value;
    } else if (key == "ui_label") {
      c.ui_label = value;
    } else if (key == "k_threshold") {
      COOP_ASSIGN_OR_RETURN(c.k_threshold, ParseInt(key, value));
    } else if (key == "token_lifetime") {
      COOP_ASSIGN_OR_RETURN(c.token_lifetime, ParseDuration(value));
    } else if (key == "session_idle") {
      COOP_ASSIGN_OR_RETURN(c.session_idle, ParseDuration(value));
    } else if (key == "transactional_max") {
      COOP_ASSIGN_OR_RETURN(c.transactional_max, ParseDuration(value));
    } else if (key == "static_max") {
      COOP_ASSIGN_OR_RETURN(c.static_max, ParseDuration(value));
    } else if (key == "handshake_stages") {
      COOP_ASSIGN_OR_RETURN(c.handshake_stages, ParseInt(key, value));
    } else if (key == "listen_address") {
      c.listen_address = value;
    } else if (key == "data_dir") {
      c.data_dir = Resolve(base_dir, value);
    } else if (key == "key_dir") {
      c.key_dir = Resolve(base_dir, value);
    } else if (key == "ephemeral_keys") {
      COOP_ASSIGN_OR_RETURN(c.ephemeral_keys, ParseBool(key, value));
    } else if (key == "operator_mode") {
      COOP_ASSIGN_OR_RETURN(c.operator_mode, ParseBool(key, value));
    } else if (key == "sync_writes") {
      COOP_ASSIGN_OR_RETURN(c.sync_writes, ParseBool(key, value));
    } else if (key == "steward_credential_file") {
      c.steward_credential_file = Resolve(base_dir, value);
    } else if (key == "console_dir") {
      c.console_dir = Resolve(base_dir, value);
    } else if (key == "operator_credential_file") {
      c.operator_credential_file = Resolve(base_dir, value);
    } else if (key == "tenant") {
      // tenant = <name> <config path>
      std::vector<std::string> parts =
          absl::StrSplit(AbslView(value), ' ', absl::SkipWhitespace());
      if (parts.size() != 2) return BadKey(key, "expected <name> <config>");
      c.tenants.push_back({parts[0], Resolve(base_dir, parts[1])});
    } else {
      return BadKey(key, "unknown key");
    }
  }
  COOP_RETURN_IF_ERROR(ValidateConfig(c));
  return c;
}

absl::StatusOr<NodeConfig> LoadConfig(const std::filesystem::path& path) {
  COOP_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return ParseConfig(text, path.parent_path());
}

absl::StatusOr<NodeConfig> LoadConfigFromEnvironment() {
  const char* path = std::getenv("COOPNODE_CONFIG");
  if (path == nullptr || *path == '\0') {
    return InvalidArgument("bad-config", "COOPNODE_CONFIG is not set");
  }
  return LoadConfig(path);
}

}  // namespace coop::node
