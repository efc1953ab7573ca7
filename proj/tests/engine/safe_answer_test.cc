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

#include <random>
#include <string>
#include <vector>

#include "coop/common/status.h"
#include "coop/dsl/evaluator.h"
#include "coop/dsl/parser.h"
#include "coop/engine/safe_answer.h"
#include "gtest/gtest.h"

namespace coop::engine {
namespace {

dsl::CompiledAlgorithm Compiled(std::string_view source) {
  return dsl::CompiledAlgorithm::Make(
      {"t", 1}, dsl::Mode::kAggregate, *dsl::Parse(source),
      {{"g", FieldKind::kText, ""}, {"x", FieldKind::kNumber, ""}});
}

// One local result per (owner, store) with the given rows of {group, x}.
dsl::LocalResult Local(const dsl::CompiledAlgorithm& a, std::string owner,
                       std::vector<std::pair<std::string, double>> rows) {
  std::vector<std::vector<FieldValue>> records;
  for (auto& [g, x] : rows) records.push_back({g, x});
  dsl::LocalResult r = *dsl::Evaluate(
      a, {{"g", FieldKind::kText, ""}, {"x", FieldKind::kNumber, ""}}, records);
  r.owner = std::move(owner);
  r.store_id = "store-" + r.owner + "-" + std::to_string(rows.size());
  return r;
}

TEST(MergePartials, CountsDistinctMembersAcrossStores) {
  dsl::CompiledAlgorithm a = Compiled("groupby(g, sum(x))");
  std::vector<dsl::LocalResult> parts = {Local(a, "m1", {{"a", 1}, {"a", 2}}),
                                         Local(a, "m1", {{"a", 3}}),
                                         Local(a, "m2", {{"a", 4}, {"b", 5}})};
  absl::StatusOr<Merged> m = MergePartials(parts, a);
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->cells["a"].members, (std::set<MemberId>{"m1", "m2"}));
  EXPECT_EQ(m->cells["a"].partial.sum.Value(), 10.0);
  EXPECT_EQ(m->cells["a"].partial.records, 4u);
  EXPECT_EQ(m->cells["b"].members.size(), 1u);
  EXPECT_EQ(m->records, 5u);

  dsl::CompiledAlgorithm other = Compiled("groupby(g, mean(x))");
  std::vector<dsl::LocalResult> mixed = {Local(a, "m1", {{"a", 1}}),
                                         Local(other, "m2", {{"a", 1}})};
  EXPECT_EQ(ErrorSlug(MergePartials(mixed, a).status()), "digest-mismatch");
}

Merged WithMembers(const dsl::CompiledAlgorithm& a, std::map<std::string, int> groups) {
  std::vector<dsl::LocalResult> parts;
  int m = 0;
  for (const auto& [g, n] : groups) {
    for (int i = 0; i < n; ++i) {
      parts.push_back(Local(a, "m" + std::to_string(m++), {{g, static_cast<double>(i + 1)}}));
    }
  }
  return *MergePartials(parts, a);
}

TEST(SafeAnswer, CellsBelowThresholdAreSuppressed) {
  dsl::CompiledAlgorithm a = Compiled("groupby(g, mean(x))");
  Merged m = WithMembers(a, {{"big", 5}, {"small", 4}});
  SafeAnswerPolicy policy;
  policy.k_threshold = 5;
  std::vector<ResultCell> cells = ApplySafeAnswer(m, a.program, policy, false);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_FALSE(cells[0].suppressed);
  EXPECT_EQ(cells[0].members, 5u);
  EXPECT_EQ(cells[0].values["mean"], 3.0);
  EXPECT_TRUE(cells[1].suppressed);
  EXPECT_EQ(cells[1].ToJson(), (Json{{"group", "small"}, {"suppressed", true}}));
  EXPECT_EQ(cells[0].ToJson()["members"], 5);
}

TEST(SafeAnswer, ThresholdPropertyOverRandomCells) {
  dsl::CompiledAlgorithm a = Compiled("groupby(g, sum(x))");
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, int> groups;
    for (int g = 0; g < 1 + static_cast<int>(rng() % 6); ++g) {
      groups["g" + std::to_string(g)] = 1 + rng() % 12;
    }
    SafeAnswerPolicy policy;
    policy.k_threshold = 2 + rng() % 9;
    Merged m = WithMembers(a, groups);
    for (const ResultCell& c : ApplySafeAnswer(m, a.program, policy, false)) {
      const int backers = groups[*c.group];
      EXPECT_EQ(c.suppressed, backers < policy.k_threshold);
      if (c.suppressed) {
        EXPECT_EQ(c.ToJson().size(), 2u);
      } else {
        EXPECT_GE(static_cast<int>(c.members), policy.k_threshold);
      }
    }
  }
}

TEST(SafeAnswer, UngroupedAnswerIsAlwaysOneCell) {
  dsl::CompiledAlgorithm a = Compiled("count()");
  Merged empty;
  std::vector<ResultCell> cells = ApplySafeAnswer(empty, a.program, {}, false);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_TRUE(cells[0].suppressed);
  EXPECT_EQ(cells[0].ToJson(), (Json{{"group", nullptr}, {"suppressed", true}}));
}

TEST(SafeAnswer, SubjectReleaseSkipsThreshold) {
  dsl::CompiledAlgorithm a = Compiled("groupby(g, max(x))");
  Merged m = WithMembers(a, {{"solo", 1}});
  std::vector<ResultCell> cells = ApplySafeAnswer(m, a.program, {}, true);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_FALSE(cells[0].suppressed);
  EXPECT_EQ(cells[0].values["max"], 1.0);
}

TEST(SafeAnswer, HistogramBucketsHeldToThresholdIndividually) {
  dsl::CompiledAlgorithm a = Compiled("histogram(x, 0, 30, 10)");
  std::vector<dsl::LocalResult> parts;
  for (int i = 0; i < 5; ++i) parts.push_back(Local(a, "m" + std::to_string(i), {{"", 5}}));
  for (int i = 0; i < 2; ++i) parts.push_back(Local(a, "n" + std::to_string(i), {{"", 15}}));
  Merged m = *MergePartials(parts, a);
  std::vector<ResultCell> cells = ApplySafeAnswer(m, a.program, {}, false);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].values["histogram"], (Json{5, nullptr, 0}));
}

TEST(SafeAnswer, NoiseHookSeesOnlyReleasedCells) {
  dsl::CompiledAlgorithm a = Compiled("groupby(g, sum(x))");
  Merged m = WithMembers(a, {{"big", 6}, {"small", 1}});
  SafeAnswerPolicy policy;
  std::vector<std::string> seen;
  policy.noise_hook = [&](const std::string& group, Json values) {
    seen.push_back(group);
    values["sum"] = values["sum"].get<double>() + 0.5;
    return values;
  };
  std::vector<ResultCell> cells = ApplySafeAnswer(m, a.program, policy, false);
  EXPECT_EQ(seen, std::vector<std::string>{"big"});
  EXPECT_EQ(cells[0].values["sum"], 21.5);
}

TEST(CellValues, EachAggregate) {
  dsl::CellPartial p;
  for (double x : {2.0, 4.0, 9.0}) {
    p.records++;
    p.sum.Add(x);
    p.min = std::min(p.min, x);
    p.max = std::max(p.max, x);
  }
  auto agg = [](std::string_view src) { return dsl::Parse(src)->agg; };
  EXPECT_EQ(CellValues(p, agg("count()")), (Json{{"count", 3}}));
  EXPECT_EQ(CellValues(p, agg("sum(x)")), (Json{{"sum", 15.0}}));
  EXPECT_EQ(CellValues(p, agg("mean(x)")), (Json{{"mean", 5.0}}));
  EXPECT_EQ(CellValues(p, agg("min(x)")), (Json{{"min", 2.0}}));
  EXPECT_EQ(CellValues(p, agg("max(x)")), (Json{{"max", 9.0}}));
}

}  // namespace
}  // namespace coop::engine
