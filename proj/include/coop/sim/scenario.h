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

// Plain-text scenario runner. One action per line:
//
//   seed 7                      settings, before any node action
//   k 5
//   stages 3
//   clock 2026-03-01T00:00:00Z
//   fixture rideshare sectors=6,6,5,3 records=4..8
//   enroll bank querier "First Bank" key
//   register fare-per-km@1 aggregate "groupby(...)" fields=fare:number
//       purposes=service-equity
//   handshake analyst host fare-per-km@1 all service-equity
//   execute analyst fare-per-km@1 all service-equity
//   expect released=3 suppressed=1
//   expect cell "424:-710" suppressed
//
// `expect` lines check the most recent action. A failed action with no
// `expect error=...` counts as a failed expectation.

#ifndef COOP_SIM_SCENARIO_H_
#define COOP_SIM_SCENARIO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace coop::sim {

struct ScenarioReport {
  std::string name;
  std::vector<std::string> lines;
  int expectations = 0;
  int failures = 0;

  bool passed() const { return failures == 0; }
  std::string ToText() const;
};

// Splits a line into words; double quotes group words and `key="a b"`
// yields `key=a b`.
absl::StatusOr<std::vector<std::string>> SplitScenarioLine(std::string_view line);

// Returns an error only for malformed scenario text; failed expectations are
// reported in the report.
absl::StatusOr<ScenarioReport> RunScenario(std::string_view text,
                                           std::string name);
absl::StatusOr<ScenarioReport> RunScenarioFile(const std::filesystem::path& path);

// Runs each file; with `parallel` every scenario gets its own thread.
std::vector<absl::StatusOr<ScenarioReport>> RunScenarioFiles(
    const std::vector<std::filesystem::path>& paths, bool parallel);

}  // namespace coop::sim

#endif  // COOP_SIM_SCENARIO_H_
