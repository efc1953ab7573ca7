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

#include "coop/sim/harness.h"

#include <gtest/gtest.h>

#include "coop/sim/fixture.h"
#include "coop/sim/oracle.h"

namespace coop::sim {
namespace {

TEST(HarnessTest, RideshareSectorMeans) {
  FixtureSpec spec;
  spec.preset = "rideshare";
  spec.seed = 7;
  spec.sector_drivers = {6, 6, 5, 3};
  spec.min_records = 4;
  spec.max_records = 8;
  absl::StatusOr<Fixture> fixture = GenerateFixture(spec);
  ASSERT_TRUE(fixture.ok()) << fixture.status();

  absl::StatusOr<std::unique_ptr<Harness>> h = Harness::Create({});
  ASSERT_TRUE(h.ok()) << h.status();
  Harness& harness = **h;
  ASSERT_TRUE(harness.LoadFixture(*fixture).ok());
  ASSERT_TRUE(harness.Enroll("analyst", Role::kQuerier, "Analyst").ok());
  ASSERT_TRUE(harness.Enroll("host", Role::kOperator, "Host").ok());

  const std::string program =
      "groupby(geosector(pickup, 0.1), mean(fare / distance_km)) "
      "where distance_km > 0";
  std::vector<FieldSpec> fields = {{"pickup", FieldKind::kGeo, ""},
                                   {"fare", FieldKind::kNumber, ""},
                                   {"distance_km", FieldKind::kNumber, ""}};
  absl::StatusOr<AlgoRef> algo = harness.Register(
      "fare-per-km", 1, "aggregate", program, fields, {"service-equity"});
  ASSERT_TRUE(algo.ok()) << algo.status();
  const Json scope{{"kind", "all-members"}};
  absl::StatusOr<std::string> token =
      harness.Handshake("analyst", "host", *algo, scope, "service-equity");
  ASSERT_TRUE(token.ok()) << token.status();
  absl::StatusOr<Json> result =
      harness.Execute("analyst", *token, *algo, scope, "service-equity");
  ASSERT_TRUE(result.ok()) << result.status();

  absl::StatusOr<Json> expected = OracleEvaluate(*fixture, program, {});
  ASSERT_TRUE(expected.ok()) << expected.status();
  EXPECT_EQ(CompareCells((*result)["cells"], *expected), std::nullopt);
  int suppressed = 0;
  for (const Json& cell : (*result)["cells"]) {
    suppressed += cell.value("suppressed", false) ? 1 : 0;
  }
  EXPECT_EQ((*result)["cells"].size(), 4u);
  EXPECT_EQ(suppressed, 1);
}

}  // namespace
}  // namespace coop::sim
