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

#include "coop/engine/safe_answer.h"

#include <algorithm>

#include "coop/common/status.h"

namespace coop::engine {

absl::StatusOr<Merged> MergePartials(std::span<const dsl::LocalResult> partials,
                                     const dsl::CompiledAlgorithm& algorithm) {
  Merged merged;
  for (const dsl::LocalResult& local : partials) {
    if (local.program_digest != algorithm.digest) {
      return InvalidArgument("digest-mismatch", local.store_id);
    }
    merged.records += local.contributing_records;
    for (const auto& [key, cell] : local.cells) {
      MergedCell& m = merged.cells[key];
      m.partial.Merge(cell);
      m.members.insert(local.owner);
      if (m.bin_members.size() < cell.bins.size()) {
        m.bin_members.resize(cell.bins.size());
      }
      for (size_t i = 0; i < cell.bins.size(); ++i) {
        if (cell.bins[i] > 0) m.bin_members[i].insert(local.owner);
      }
    }
  }
  return merged;
}

Json CellValues(const dsl::CellPartial& cell, const dsl::Aggregate& agg) {
  using dsl::AggKind;
  switch (agg.kind) {
    case AggKind::kCount:
      return Json{{"count", cell.records}};
    case AggKind::kSum:
      return Json{{"sum", cell.sum.Value()}};
    case AggKind::kMean:
      return Json{{"mean", cell.sum.Value() / static_cast<double>(cell.records)}};
    case AggKind::kMin:
      return Json{{"min", cell.min}};
    case AggKind::kMax:
      return Json{{"max", cell.max}};
    case AggKind::kHistogram:
      return Json{{"histogram", cell.bins}};
    case AggKind::kProjection:
      break;
  }
  return Json::object();
}

Json ResultCell::ToJson() const {
  Json out{{"group", group ? Json(*group) : Json(nullptr)}};
  if (suppressed) {
    out["suppressed"] = true;
  } else {
    out["values"] = values;
    out["members"] = members;
  }
  return out;
}

std::vector<ResultCell> ApplySafeAnswer(const Merged& merged,
                                        const dsl::Program& program,
                                        const SafeAnswerPolicy& policy,
                                        bool subject_release) {
  const size_t k = static_cast<size_t>(std::max(policy.k_threshold, 2));
  std::vector<ResultCell> out;
  auto release = [&](std::optional<std::string> group, const MergedCell* cell) {
    ResultCell r;
    r.group = std::move(group);
    if (cell == nullptr || (!subject_release && cell->members.size() < k)) {
      r.suppressed = true;
      out.push_back(std::move(r));
      return;
    }
    r.members = cell->members.size();
    r.values = CellValues(cell->partial, program.agg);
    if (program.agg.kind == dsl::AggKind::kHistogram && !subject_release) {
      Json& bins = r.values["histogram"];
      for (size_t i = 0; i < bins.size(); ++i) {
        const size_t backers =
            i < cell->bin_members.size() ? cell->bin_members[i].size() : 0;
        if (bins[i].get<uint64_t>() > 0 && backers < k) bins[i] = nullptr;
      }
    }
    if (policy.noise_hook) {
      r.values = policy.noise_hook(r.group.value_or(""), std::move(r.values));
    }
    out.push_back(std::move(r));
  };

  if (!program.key) {
    auto it = merged.cells.find("");
    release(std::nullopt, it == merged.cells.end() ? nullptr : &it->second);
    return out;
  }
  for (const auto& [key, cell] : merged.cells) release(key, &cell);
  return out;
}

}  // namespace coop::engine
