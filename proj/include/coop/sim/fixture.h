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

#ifndef COOP_SIM_FIXTURE_H_
#define COOP_SIM_FIXTURE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/schema.h"

namespace coop::sim {

// Plaintext ground truth for a synthetic cooperative. The node only ever
// sees it through ingest calls; the oracle reads it directly.
struct FixtureStore {
  bool suspended = false;
  std::vector<Json> records;  // field name -> wire value
};

struct FixtureMember {
  std::string alias;       // "m1", "m2", ...
  std::string birth_date;  // YYYY-MM-DD
  std::vector<FixtureStore> stores;
};

struct Fixture {
  std::string preset;
  uint64_t seed = 0;
  std::vector<FieldSpec> schema;
  std::vector<FixtureMember> members;

  size_t record_count() const;
  Json ToJson() const;
  static absl::StatusOr<Fixture> FromJson(const Json& json);

  // Every plaintext value rendering of at least `min_length` characters:
  // text values verbatim and numbers in their JSON form.
  std::vector<std::string> PlaintextTokens(size_t min_length = 4) const;
};

struct FixtureSpec {
  std::string preset = "generic";  // generic | rideshare | income
  uint64_t seed = 1;
  int members = 10;
  int min_records = 0;
  int max_records = 20;
  int max_stores = 1;
  double suspended_fraction = 0;
  // rideshare: drivers per sector; members is ignored when non-empty.
  std::vector<int> sector_drivers;
  double sector_size = 0.1;
  // income: first year and number of years of monthly records.
  int first_year = 2021;
  int years = 5;
};

absl::StatusOr<Fixture> GenerateFixture(const FixtureSpec& spec);

absl::Status SaveFixture(const Fixture& fixture,
                         const std::filesystem::path& path);
absl::StatusOr<Fixture> LoadFixture(const std::filesystem::path& path);

// geosector() key of the i-th rideshare sector ("A" is 0), in units of
// FixtureSpec::sector_size.
std::string RideshareSectorKey(int sector);

}  // namespace coop::sim

#endif  // COOP_SIM_FIXTURE_H_
