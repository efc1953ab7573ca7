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

#ifndef COOP_ENGINE_SAFE_ANSWER_H_
#define COOP_ENGINE_SAFE_ANSWER_H_

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/dsl/evaluator.h"

namespace coop::engine {

// Partials of one group cell merged across stores, with the distinct
// members behind the cell and behind each histogram bucket.
struct MergedCell {
  dsl::CellPartial partial;
  std::set<MemberId> members;
  std::vector<std::set<MemberId>> bin_members;
};

struct Merged {
  std::map<std::string, MergedCell> cells;
  uint64_t records = 0;
};

// Errors: digest-mismatch.
absl::StatusOr<Merged> MergePartials(std::span<const dsl::LocalResult> partials,
                                     const dsl::CompiledAlgorithm& algorithm);

// Final statistic of a cell, keyed by aggregate name.
Json CellValues(const dsl::CellPartial& cell, const dsl::Aggregate& agg);

struct SafeAnswerPolicy {
  int k_threshold = 5;
  // Applied to every released cell's values; identity when unset.
  std::function<Json(const std::string& group, Json values)> noise_hook;
};

struct ResultCell {
  std::optional<std::string> group;
  bool suppressed = false;
  Json values;         // empty when suppressed
  size_t members = 0;  // 0 when suppressed

  // {"group", "values", "members"} or {"group", "suppressed": true}
  Json ToJson() const;
};

// Cells backed by fewer than k distinct members are replaced by the
// suppression marker; histogram buckets are held to the same bar
// individually. `subject_release` skips the threshold for a consented
// single-subject run. An ungrouped program always yields exactly one cell.
std::vector<ResultCell> ApplySafeAnswer(const Merged& merged,
                                        const dsl::Program& program,
                                        const SafeAnswerPolicy& policy,
                                        bool subject_release);

}  // namespace coop::engine

#endif  // COOP_ENGINE_SAFE_ANSWER_H_
