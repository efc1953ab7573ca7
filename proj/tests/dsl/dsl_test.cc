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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "coop/common/status.h"
#include "coop/dsl/ast.h"
#include "coop/dsl/evaluator.h"
#include "coop/dsl/exact_sum.h"
#include "coop/dsl/parser.h"
#include "coop/sim/program_gen.h"
#include "gtest/gtest.h"

namespace coop::dsl {
namespace {

Program MustParse(std::string_view source) {
  absl::StatusOr<Program> p = Parse(source);
  EXPECT_TRUE(p.ok()) << source << ": " << p.status();
  return p.ok() ? *std::move(p) : Program{};
}

TEST(Parser, GroupedMeanWithGuard) {
  Program p = MustParse(
      "groupby(geosector(pickup, 0.1), mean(fare / distance_km)) where distance_km > 0");
  EXPECT_FALSE(p.mode.has_value());
  ASSERT_TRUE(p.key.has_value());
  EXPECT_EQ(p.key->kind, GroupKey::Kind::kGeoSector);
  EXPECT_EQ(p.key->field, "pickup");
  EXPECT_DOUBLE_EQ(p.key->width, 0.1);
  EXPECT_EQ(p.agg.kind, AggKind::kMean);
  ASSERT_TRUE(p.agg.arg);
  EXPECT_EQ(p.agg.arg->op, '/');
  ASSERT_TRUE(p.filter);
  EXPECT_EQ(p.filter->op, CompareOp::kGt);
  EXPECT_EQ(ReferencedFields(p), (std::set<std::string>{"pickup", "fare", "distance_km"}));
}

TEST(Parser, ModeKeywordAndHistogram) {
  Program p = MustParse("subject histogram(amount, 0, 100, 25)");
  EXPECT_EQ(p.mode, Mode::kSubject);
  EXPECT_EQ(p.agg.kind, AggKind::kHistogram);
  EXPECT_EQ(p.agg.BucketCount(), 4u);
  EXPECT_EQ(MustParse("histogram(x, 0, 10, 3)").agg.BucketCount(), 4u);
}

TEST(Parser, ArithmeticPrecedence) {
  EXPECT_EQ(Print(MustParse("sum(a + b * c - d / 2)")), "sum(((a + (b * c)) - (d / 2)))");
  EXPECT_EQ(Print(MustParse("sum((a + b) * c)")), "sum(((a + b) * c))");
}

TEST(Parser, AndBindsTighterThanOr) {
  Program p = MustParse("count() where a > 1 or b > 1 and c > 1");
  ASSERT_TRUE(p.filter);
  EXPECT_EQ(p.filter->kind, Pred::Kind::kOr);
  EXPECT_EQ(p.filter->right->kind, Pred::Kind::kAnd);
}

TEST(Parser, NegativeBoundsAndBucketWidth) {
  Program p = MustParse("groupby(bucket(temp, 2.5), histogram(temp, -10, 10, 5))");
  EXPECT_EQ(p.agg.lo, -10);
  EXPECT_EQ(p.key->width, 2.5);
}

TEST(Parser, BareFieldParsesAsProjection) {
  EXPECT_EQ(MustParse("amount").agg.kind, AggKind::kProjection);
  EXPECT_EQ(MustParse("groupby(region, amount * 2)").agg.kind, AggKind::kProjection);
}

TEST(Parser, KeywordsAreNotFields) {
  EXPECT_TRUE(IsKeyword("where"));
  EXPECT_FALSE(IsKeyword("amount"));
  EXPECT_FALSE(Parse("sum(where)").ok());
  EXPECT_FALSE(Parse("groupby(count, count())").ok());
}

TEST(Parser, ErrorsCarryPositionAndExpectations) {
  absl::Status s = Parse("groupby(region count())").status();
  std::optional<ParseError> e = ParseErrorOf(s);
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->line, 1);
  EXPECT_EQ(e->column, 16);
  EXPECT_EQ(e->expected, std::vector<std::string>{"','"});
  EXPECT_EQ(ErrorSlug(s), "parse-error");

  e = ParseErrorOf(Parse("count()\n  where\n  amount >").status());
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->line, 3);
  EXPECT_EQ(e->column, 11);
  EXPECT_FALSE(ParseErrorOf(absl::OkStatus()).has_value());
}

TEST(Parser, NestedGroupbyRejected) {
  std::optional<ParseError> e =
      ParseErrorOf(Parse("groupby(a, groupby(b, count()))").status());
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->column, 12);
}

TEST(Printer, RoundTripsGeneratedPrograms) {
  sim::ProgramGenerator gen(99);
  for (int i = 0; i < 300; ++i) {
    const std::string source = gen.Next().source;
    Program first = MustParse(source);
    const std::string printed = Print(first);
    Program second = MustParse(printed);
    EXPECT_TRUE(first == second) << source << " -> " << printed;
    EXPECT_EQ(Print(second), printed);
  }
}

TEST(Ast, EqualityIgnoresSpans) {
  EXPECT_TRUE(MustParse("sum( x )") == MustParse("sum(x)"));
  EXPECT_FALSE(MustParse("sum(x)") == MustParse("sum(y)"));
  EXPECT_FALSE(MustParse("sum(x)") == MustParse("mean(x)"));
  EXPECT_FALSE(MustParse("count() where x > 1") == MustParse("count() where x >= 1"));
}

TEST(Ast, FormatNumberIsShortestRoundTrip) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(2), "2");
  EXPECT_EQ(FormatNumber(-2.5), "-2.5");
  for (double v : {0.1 + 0.2, 1e-7, 123456789.125}) {
    EXPECT_EQ(std::stod(FormatNumber(v)), v);
  }
}

// Integers scaled by 2^-20 sum exactly in int64, giving an independent
// reference for the compensated sum.
TEST(ExactSum, MatchesIntegerReferenceInAnyOrder) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int64_t> ints;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 60); ++i) {
      const int64_t magnitude = (rng() % 4 == 0) ? (int64_t{1} << 52) : 1000;
      ints.push_back(static_cast<int64_t>(rng() % (2 * magnitude)) - magnitude);
    }
    int64_t exact = 0;
    for (int64_t v : ints) exact += v;
    const double expected = std::ldexp(static_cast<double>(exact), -20);
    std::shuffle(ints.begin(), ints.end(), rng);
    ExactSum whole, left, right;
    for (size_t i = 0; i < ints.size(); ++i) {
      const double x = std::ldexp(static_cast<double>(ints[i]), -20);
      whole.Add(x);
      (i % 2 ? left : right).Add(x);
    }
    left.Merge(right);
    EXPECT_EQ(whole.Value(), expected);
    EXPECT_EQ(left.Value(), expected);
    EXPECT_EQ(ExactSum::FromPartials(whole.partials()).Value(), expected);
  }
}

TEST(ExactSum, CancellationIsExact) {
  ExactSum s;
  for (double x : {1e16, 1.0, -1e16, 1e-3, 1e100, -1e100}) s.Add(x);
  EXPECT_EQ(s.Value(), 1.001);
}

class EvaluatorTest : public ::testing::Test {
 protected:
  const std::vector<FieldSpec> schema_ = {{"region", FieldKind::kText, ""},
                                          {"amount", FieldKind::kNumber, ""},
                                          {"hours", FieldKind::kNumber, ""},
                                          {"at", FieldKind::kGeo, ""}};
  std::vector<std::vector<FieldValue>> records_ = {
      {std::string("north"), 10.0, 2.0, GeoPoint{42.35, -71.05}},
      {std::string("north"), 30.0, 0.0, GeoPoint{42.36, -71.06}},
      {std::string("south"), 5.0, 1.0, GeoPoint{42.45, -71.05}},
  };

  LocalResult Run(std::string_view source, std::vector<FieldSpec> fields) {
    CompiledAlgorithm a = CompiledAlgorithm::Make({"t", 1}, Mode::kAggregate,
                                                  MustParse(source), std::move(fields));
    absl::StatusOr<LocalResult> r = Evaluate(a, schema_, records_);
    EXPECT_TRUE(r.ok()) << r.status();
    return r.ok() ? *r : LocalResult{};
  }
};

TEST_F(EvaluatorTest, GroupsSumsAndCounts) {
  LocalResult r = Run("groupby(region, sum(amount))",
                      {{"region", FieldKind::kText, ""}, {"amount", FieldKind::kNumber, ""}});
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells["north"].records, 2u);
  EXPECT_EQ(r.cells["north"].sum.Value(), 40.0);
  EXPECT_EQ(r.cells["south"].sum.Value(), 5.0);
  EXPECT_EQ(r.contributing_records, 3u);
}

TEST_F(EvaluatorTest, FilterAndNonFiniteValuesDropRecords) {
  LocalResult guarded = Run("mean(amount / hours) where hours > 0",
                            {{"amount", FieldKind::kNumber, ""}, {"hours", FieldKind::kNumber, ""}});
  EXPECT_EQ(guarded.cells[""].records, 2u);
  EXPECT_EQ(guarded.cells[""].sum.Value(), 10.0);
  LocalResult unguarded = Run("sum(amount / hours)",
                              {{"amount", FieldKind::kNumber, ""}, {"hours", FieldKind::kNumber, ""}});
  EXPECT_EQ(unguarded.cells[""].records, 2u);
}

TEST_F(EvaluatorTest, GeoSectorsAndBuckets) {
  LocalResult r = Run("groupby(geosector(at, 0.1), max(amount))",
                      {{"at", FieldKind::kGeo, ""}, {"amount", FieldKind::kNumber, ""}});
  EXPECT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells["423:-711"].max, 30.0);
  EXPECT_EQ(r.cells["424:-711"].max, 5.0);
  EXPECT_EQ(BucketKey(17, 5), "15");
  EXPECT_EQ(BucketKey(-0.5, 1), "-1");
  EXPECT_EQ(BucketKey(0.5, 1), "0");
  EXPECT_EQ(GeoSectorKey({-0.05, 0.05}, 0.1), "-1:0");
}

TEST_F(EvaluatorTest, HistogramBinsIgnoreOutOfRange) {
  LocalResult r = Run("histogram(amount, 0, 20, 10)", {{"amount", FieldKind::kNumber, ""}});
  EXPECT_EQ(r.cells[""].bins, (std::vector<uint64_t>{1, 1}));
  EXPECT_EQ(r.cells[""].records, 3u);
}

TEST_F(EvaluatorTest, UndeclaredOrMistypedFieldsRefused) {
  CompiledAlgorithm undeclared = CompiledAlgorithm::Make(
      {"t", 1}, Mode::kAggregate, MustParse("sum(amount)"), {});
  EXPECT_EQ(ErrorSlug(Evaluate(undeclared, schema_, records_).status()), "undeclared-field");
  CompiledAlgorithm mistyped = CompiledAlgorithm::Make(
      {"t", 1}, Mode::kAggregate, MustParse("sum(amount)"),
      {{"amount", FieldKind::kTimestamp, ""}});
  EXPECT_EQ(ErrorSlug(Evaluate(mistyped, schema_, records_).status()), "schema-mismatch");
  EXPECT_FALSE(SchemaServes({{"amount", FieldKind::kText, ""}}, schema_));
  EXPECT_TRUE(SchemaServes({{"amount", FieldKind::kNumber, ""}}, schema_));
}

TEST_F(EvaluatorTest, PartialsSerializeAndMerge) {
  LocalResult r = Run("groupby(region, mean(amount))",
                      {{"region", FieldKind::kText, ""}, {"amount", FieldKind::kNumber, ""}});
  absl::StatusOr<LocalResult> back = LocalResultFromJson(LocalResultToJson(r));
  ASSERT_TRUE(back.ok());
  for (const auto& [key, cell] : r.cells) EXPECT_TRUE(back->cells[key].SameAs(cell));
  CellPartial merged = r.cells["north"];
  merged.Merge(r.cells["south"]);
  EXPECT_EQ(merged.records, 3u);
  EXPECT_EQ(merged.sum.Value(), 45.0);
}

TEST(CompiledAlgorithm, DigestTracksProgramAndFields) {
  auto make = [](std::string_view src, std::vector<FieldSpec> f) {
    return CompiledAlgorithm::Make({"t", 1}, Mode::kAggregate, *Parse(src), std::move(f));
  };
  const std::vector<FieldSpec> f = {{"x", FieldKind::kNumber, ""}};
  EXPECT_EQ(make("sum(x)", f).digest, make("sum( x )", f).digest);
  EXPECT_NE(make("sum(x)", f).digest, make("mean(x)", f).digest);
  EXPECT_NE(make("sum(x)", f).digest, make("sum(x)", {{"x", FieldKind::kTimestamp, ""}}).digest);
  CompiledAlgorithm a = make("sum(x) where x > 1", f);
  absl::StatusOr<CompiledAlgorithm> back = CompiledAlgorithmFromJson(CompiledAlgorithmToJson(a));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->digest, a.digest);
  EXPECT_TRUE(back->program == a.program);
}

}  // namespace
}  // namespace coop::dsl
