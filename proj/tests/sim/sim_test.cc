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
#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "coop/dsl/parser.h"
#include "coop/sim/fixture.h"
#include "coop/sim/oracle.h"
#include "coop/sim/program_gen.h"
#include "coop/sim/scenario.h"

namespace coop::sim {
namespace {

Json Rec(double amount, const std::string& region) {
  return Json{{"amount", amount}, {"region", region}};
}

// Five northern members with one record each, two southern members, and
// a suspended store that must never count.
Fixture TinyFixture() {
  Fixture f;
  f.preset = "hand";
  f.schema = {{"amount", FieldKind::kNumber, ""}, {"region", FieldKind::kText, ""}};
  for (int i = 1; i <= 7; ++i) {
    FixtureMember m;
    m.alias = "m" + std::to_string(i);
    FixtureStore s;
    if (i <= 5) {
      s.records.push_back(Rec(i, "north"));
    } else {
      s.records.push_back(Rec(i == 6 ? 10 : 20, "south"));
    }
    m.stores.push_back(s);
    if (i == 3) {
      FixtureStore hidden;
      hidden.suspended = true;
      hidden.records.push_back(Rec(100, "north"));
      m.stores.push_back(hidden);
    }
    f.members.push_back(m);
  }
  return f;
}

const Json* CellFor(const Json& cells, const std::string& group) {
  for (const Json& c : cells) {
    if (c["group"] == group) return &c;
  }
  return nullptr;
}

TEST(OracleTest, HandComputedAggregates) {
  const Fixture f = TinyFixture();
  absl::StatusOr<Json> count = OracleEvaluate(f, "count()", {});
  ASSERT_TRUE(count.ok()) << count.status();
  ASSERT_EQ(count->size(), 1u);
  EXPECT_EQ((*count)[0]["values"]["count"], 7);
  EXPECT_EQ((*count)[0]["members"], 7);

  absl::StatusOr<Json> sums = OracleEvaluate(f, "groupby(region, sum(amount))", {});
  ASSERT_TRUE(sums.ok()) << sums.status();
  ASSERT_EQ(sums->size(), 2u);
  const Json* north = CellFor(*sums, "north");
  const Json* south = CellFor(*sums, "south");
  ASSERT_TRUE(north && south);
  EXPECT_EQ((*north)["values"]["sum"], 15.0);
  EXPECT_EQ((*north)["members"], 5);
  EXPECT_EQ((*south)["suppressed"], true);
  EXPECT_FALSE(south->contains("values"));

  OracleOptions low;
  low.k = 2;
  absl::StatusOr<Json> means =
      OracleEvaluate(f, "groupby(region, mean(amount)) where amount > 2", low);
  ASSERT_TRUE(means.ok());
  EXPECT_EQ((*CellFor(*means, "north"))["values"]["mean"], 4.0);
  EXPECT_EQ((*CellFor(*means, "south"))["values"]["mean"], 15.0);

  absl::StatusOr<Json> extremes = OracleEvaluate(f, "max(amount)", {});
  ASSERT_TRUE(extremes.ok());
  EXPECT_EQ((*extremes)[0]["values"]["max"], 20.0);
}

TEST(OracleTest, ScopeAndSubjectRelease) {
  const Fixture f = TinyFixture();
  OracleOptions two;
  two.k = 2;
  two.scope = std::set<std::string>{"m1", "m2"};
  absl::StatusOr<Json> r = OracleEvaluate(f, "sum(amount)", two);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ((*r)[0]["values"]["sum"], 3.0);

  OracleOptions subject;
  subject.scope = std::set<std::string>{"m6"};
  subject.subject_release = true;
  r = OracleEvaluate(f, "subject sum(amount)", subject);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ((*r)[0]["values"]["sum"], 10.0);

  EXPECT_FALSE(OracleEvaluate(f, "sum(", {}).ok());
}

TEST(OracleTest, CompareCellsReportsDifferences) {
  const Json a = Json::array({Json{{"group", "x"}, {"values", {{"sum", 1.0}}}, {"members", 5}}});
  Json b = a;
  EXPECT_EQ(CompareCells(a, b), std::nullopt);
  b[0]["values"]["sum"] = 2.0;
  EXPECT_NE(CompareCells(a, b), std::nullopt);
  b = a;
  b[0]["members"] = 6;
  EXPECT_NE(CompareCells(a, b), std::nullopt);
  EXPECT_NE(CompareCells(a, Json::array()), std::nullopt);
}

TEST(FixtureTest, DeterministicPerSeed) {
  FixtureSpec spec;
  spec.seed = 99;
  spec.max_stores = 2;
  spec.suspended_fraction = 0.3;
  const Fixture a = *GenerateFixture(spec);
  const Fixture b = *GenerateFixture(spec);
  EXPECT_EQ(a.ToJson(), b.ToJson());
  spec.seed = 100;
  EXPECT_NE(GenerateFixture(spec)->ToJson(), a.ToJson());

  absl::StatusOr<Fixture> back = Fixture::FromJson(a.ToJson());
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->ToJson(), a.ToJson());
  EXPECT_EQ(back->record_count(), a.record_count());

  const std::filesystem::path path =
      std::filesystem::temp_directory_path() /
      ("coop-fixture-" + std::to_string(::getpid()) + ".json");
  ASSERT_TRUE(SaveFixture(a, path).ok());
  absl::StatusOr<Fixture> loaded = LoadFixture(path);
  std::filesystem::remove(path);
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(loaded->ToJson(), a.ToJson());
}

TEST(FixtureTest, PresetsHaveExpectedShape) {
  FixtureSpec ride;
  ride.preset = "rideshare";
  ride.sector_drivers = {2, 3};
  absl::StatusOr<Fixture> r = GenerateFixture(ride);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->members.size(), 5u);

  FixtureSpec income;
  income.preset = "income";
  income.members = 1;
  income.years = 2;
  absl::StatusOr<Fixture> i = GenerateFixture(income);
  ASSERT_TRUE(i.ok()) << i.status();
  EXPECT_EQ(i->record_count(), 24u);

  FixtureSpec unknown;
  unknown.preset = "weather";
  EXPECT_FALSE(GenerateFixture(unknown).ok());
}

TEST(FixtureTest, PlaintextTokensCoverTextAndNumbers) {
  const std::vector<std::string> tokens = TinyFixture().PlaintextTokens(4);
  const std::set<std::string> set(tokens.begin(), tokens.end());
  EXPECT_TRUE(set.contains("north"));
  EXPECT_TRUE(set.contains("south"));
  EXPECT_FALSE(set.contains("10"));  // shorter than the minimum
}

TEST(ProgramGeneratorTest, DeterministicAndParseable) {
  ProgramGenerator a(5), b(5);
  const std::set<std::string> fields = {"amount", "hours", "region",
                                        "note",   "at",    "loc"};
  for (int i = 0; i < 200; ++i) {
    GeneratedProgram p = a.Next();
    EXPECT_EQ(p.source, b.Next().source);
    EXPECT_TRUE(dsl::Parse(p.source).ok()) << p.source;
    for (const FieldSpec& f : p.requires_fields) {
      EXPECT_TRUE(fields.contains(f.name)) << f.name;
      EXPECT_NE(p.source.find(f.name), std::string::npos) << p.source;
    }
  }
}

TEST(ScenarioTest, SplitLine) {
  using V = std::vector<std::string>;
  EXPECT_EQ(*SplitScenarioLine("enroll a querier \"Bank of X\""),
            (V{"enroll", "a", "querier", "Bank of X"}));
  EXPECT_EQ(*SplitScenarioLine("  title=\"two words\"  x  # note"),
            (V{"title=two words", "x"}));
  EXPECT_EQ(*SplitScenarioLine("# only a comment"), V{});
  EXPECT_EQ(*SplitScenarioLine("a#b"), (V{"a#b"}));
  EXPECT_EQ(*SplitScenarioLine("\"\""), (V{""}));
  EXPECT_FALSE(SplitScenarioLine("register \"open").ok());
}

constexpr char kTiny[] =
    "name tiny\n"
    "seed 3\n"
    "k 2\n"
    "fixture generic members=3 records=1..2\n"
    "expect ok\n"
    "enroll analyst querier \"Analyst\"\n"
    "expect ok\n";

TEST(ScenarioTest, RunsAndCountsExpectations) {
  absl::StatusOr<ScenarioReport> r = RunScenario(kTiny, "fallback");
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->name, "tiny");
  EXPECT_EQ(r->expectations, 2);
  EXPECT_TRUE(r->passed());
  EXPECT_EQ(r->ToText(), RunScenario(kTiny, "fallback")->ToText());

  const std::string failing = std::string(kTiny) +
                              "enroll other querier \"Other\"\n"
                              "expect error=role-forbidden\n";
  absl::StatusOr<ScenarioReport> f = RunScenario(failing, "x");
  ASSERT_TRUE(f.ok()) << f.status();
  EXPECT_EQ(f->failures, 1);
  EXPECT_FALSE(f->passed());
}

TEST(ScenarioTest, MalformedLinesCarryLineNumbers) {
  absl::StatusOr<ScenarioReport> r = RunScenario("name a\nfrobnicate x\n", "a");
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.status().message().find("line 2"), std::string_view::npos);

  r = RunScenario("name a\nenroll x querier \"unterminated\n", "a");
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.status().message().find("line 2"), std::string_view::npos);

  r = RunScenario(std::string(kTiny) + "seed 4\n", "a");
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.status().message().find("line 8"), std::string_view::npos);

  EXPECT_FALSE(RunScenarioFile("/nonexistent/x.scn").ok());
}

}  // namespace
}  // namespace coop::sim
