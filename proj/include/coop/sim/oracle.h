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

#ifndef COOP_SIM_ORACLE_H_
#define COOP_SIM_ORACLE_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/sim/fixture.h"

namespace coop::sim {

// Brute-force reference evaluator. It has its own parser and evaluator and
// shares no code with the execution engine: it reads the plaintext fixture
// directly, sums exactly in rational arithmetic and applies distinct-member
// suppression in a single pass.
struct OracleOptions {
  int k = 5;
  // Members in scope; all members when unset.
  std::optional<std::set<std::string>> scope;
  // Single-subject release: no suppression.
  bool subject_release = false;
};

// Cells in the engine's JSON shape:
// {"group", "suppressed": true} or {"group", "values", "members"}.
absl::StatusOr<Json> OracleEvaluate(const Fixture& fixture,
                                    std::string_view program,
                                    const OracleOptions& options);

// First difference between two cell lists, matched by group. Counts, sums,
// extrema and histograms compare exactly; means within `mean_rel_tol`.
std::optional<std::string> CompareCells(const Json& actual,
                                        const Json& expected,
                                        double mean_rel_tol = 1e-12);

}  // namespace coop::sim

#endif  // COOP_SIM_ORACLE_H_
