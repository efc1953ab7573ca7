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

#include "coop/sim/fixture.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "coop/common/clock.h"
#include "coop/common/journal.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::sim {
namespace {

using Rng = std::mt19937_64;

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int UniformInt(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double RoundTo(double v, double quantum) {
  return std::round(v / quantum) * quantum;
}

std::string HexToken(Rng& rng, std::string_view prefix, int digits) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(prefix);
  for (int i = 0; i < digits; ++i) out.push_back(kHex[rng() & 15]);
  return out;
}

std::string BirthDate(Rng& rng) {
  const int year = UniformInt(rng, 1950, 2004);
  const int month = UniformInt(rng, 1, 12);
  const int day = UniformInt(rng, 1, 28);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

constexpr Timestamp kEpoch2025 = 1735689600;  // 2025-01-01T00:00:00Z
const char* const kRegions[] = {"north", "south", "east", "west"};

Fixture Generic(const FixtureSpec& spec, Rng& rng) {
  Fixture f;
  f.schema = {{"amount", FieldKind::kNumber, "EUR"},
              {"hours", FieldKind::kNumber, "h"},
              {"region", FieldKind::kText, ""},
              {"note", FieldKind::kText, ""},
              {"at", FieldKind::kTimestamp, ""},
              {"loc", FieldKind::kGeo, ""}};
  for (int m = 0; m < spec.members; ++m) {
    FixtureMember member;
    member.alias = coop::StrCat("m", m + 1);
    member.birth_date = BirthDate(rng);
    const int home = UniformInt(rng, 0, 3);
    const int stores = UniformInt(rng, 1, std::max(1, spec.max_stores));
    for (int s = 0; s < stores; ++s) {
      FixtureStore store;
      store.suspended = Uniform(rng, 0, 1) < spec.suspended_fraction;
      const int n = UniformInt(rng, spec.min_records, spec.max_records);
      for (int r = 0; r < n; ++r) {
        const int region = Uniform(rng, 0, 1) < 0.7 ? home : UniformInt(rng, 0, 3);
        const double magnitude = std::pow(10.0, UniformInt(rng, 0, 4));
        store.records.push_back(Json{
            {"amount", RoundTo(Uniform(rng, -0.2, 1.0) * magnitude, 1e-4)},
            {"hours", static_cast<double>(UniformInt(rng, 0, 40))},
            {"region", kRegions[region]},
            {"note", HexToken(rng, "nt", 12)},
            {"at", FormatTimestamp(kEpoch2025 + UniformInt(rng, 0, 364 * 86400))},
            {"loc", {{"lat", RoundTo(40 + Uniform(rng, 0, 1), 1e-6)},
                     {"lon", RoundTo(-74 + Uniform(rng, 0, 1), 1e-6)}}}});
      }
      member.stores.push_back(std::move(store));
    }
    f.members.push_back(std::move(member));
  }
  return f;
}

// Sector i sits in grid cell (base_lat + i / 2, base_lon + i % 2).
constexpr int kBaseLatCell = 423;
constexpr int kBaseLonCell = -711;

Fixture Rideshare(const FixtureSpec& spec, Rng& rng) {
  Fixture f;
  f.schema = {{"fare", FieldKind::kNumber, "USD"},
              {"distance_km", FieldKind::kNumber, "km"},
              {"pickup", FieldKind::kGeo, ""},
              {"trip_at", FieldKind::kTimestamp, ""},
              {"vehicle", FieldKind::kText, ""}};
  const double s = spec.sector_size;
  int next = 1;
  for (size_t sector = 0; sector < spec.sector_drivers.size(); ++sector) {
    const double rate = 1.2 + 0.2 * static_cast<double>(sector);
    const int lat_cell = kBaseLatCell + static_cast<int>(sector) / 2;
    const int lon_cell = kBaseLonCell + static_cast<int>(sector) % 2;
    for (int d = 0; d < spec.sector_drivers[sector]; ++d) {
      FixtureMember driver;
      driver.alias = coop::StrCat("m", next++);
      driver.birth_date = BirthDate(rng);
      FixtureStore store;
      const int trips = UniformInt(rng, std::max(1, spec.min_records),
                                   std::max(1, spec.max_records));
      for (int t = 0; t < trips; ++t) {
        const double km = RoundTo(Uniform(rng, 1, 30), 0.01);
        const double fare =
            RoundTo(2.5 + rate * km + Uniform(rng, -1, 1), 0.01);
        store.records.push_back(Json{
            {"fare", fare},
            {"distance_km", km},
            {"pickup",
             {{"lat", RoundTo((lat_cell + Uniform(rng, 0.2, 0.8)) * s, 1e-6)},
              {"lon", RoundTo((lon_cell + Uniform(rng, 0.2, 0.8)) * s, 1e-6)}}},
            {"trip_at",
             FormatTimestamp(kEpoch2025 + UniformInt(rng, 0, 180 * 86400))},
            {"vehicle", HexToken(rng, "veh", 10)}});
      }
      driver.stores.push_back(std::move(store));
      f.members.push_back(std::move(driver));
    }
  }
  return f;
}

Fixture Income(const FixtureSpec& spec, Rng& rng) {
  Fixture f;
  f.schema = {{"year", FieldKind::kNumber, ""},
              {"month", FieldKind::kNumber, ""},
              {"amount", FieldKind::kNumber, "USD"},
              {"employer", FieldKind::kText, ""}};
  for (int m = 0; m < spec.members; ++m) {
    FixtureMember member;
    member.alias = coop::StrCat("m", m + 1);
    member.birth_date = BirthDate(rng);
    FixtureStore store;
    const std::string employer = HexToken(rng, "emp", 10);
    for (int y = 0; y < spec.years; ++y) {
      for (int month = 1; month <= 12; ++month) {
        store.records.push_back(
            Json{{"year", static_cast<double>(spec.first_year + y)},
                 {"month", static_cast<double>(month)},
                 {"amount", RoundTo(Uniform(rng, 3000, 6000), 0.01)},
                 {"employer", employer}});
      }
    }
    member.stores.push_back(std::move(store));
    f.members.push_back(std::move(member));
  }
  return f;
}

}  // namespace

size_t Fixture::record_count() const {
  size_t n = 0;
  for (const FixtureMember& m : members) {
    for (const FixtureStore& s : m.stores) n += s.records.size();
  }
  return n;
}

Json Fixture::ToJson() const {
  Json ms = Json::array();
  for (const FixtureMember& m : members) {
    Json stores = Json::array();
    for (const FixtureStore& s : m.stores) {
      stores.push_back(Json{{"suspended", s.suspended}, {"records", s.records}});
    }
    ms.push_back(Json{{"alias", m.alias},
                      {"birth_date", m.birth_date},
                      {"stores", std::move(stores)}});
  }
  return Json{{"preset", preset},
              {"seed", seed},
              {"schema", SchemaToJson(schema)},
              {"members", std::move(ms)}};
}

absl::StatusOr<Fixture> Fixture::FromJson(const Json& json) {
  Fixture f;
  try {
    f.preset = json.at("preset").get<std::string>();
    f.seed = json.at("seed").get<uint64_t>();
    COOP_ASSIGN_OR_RETURN(f.schema, SchemaFromJson(json.at("schema")));
    for (const Json& m : json.at("members")) {
      FixtureMember member;
      member.alias = m.at("alias").get<std::string>();
      member.birth_date = m.value("birth_date", "");
      for (const Json& s : m.at("stores")) {
        FixtureStore store;
        store.suspended = s.value("suspended", false);
        for (const Json& r : s.at("records")) store.records.push_back(r);
        member.stores.push_back(std::move(store));
      }
      f.members.push_back(std::move(member));
    }
  } catch (const Json::exception& e) {
    return InvalidArgument("bad-fixture", e.what());
  }
  return f;
}

std::vector<std::string> Fixture::PlaintextTokens(size_t min_length) const {
  std::vector<std::string> out;
  auto add = [&](const Json& v, auto& self) -> void {
    if (v.is_string()) {
      if (v.get<std::string>().size() >= min_length) out.push_back(v.get<std::string>());
    } else if (v.is_number()) {
      std::string text = v.dump();
      if (text.size() >= min_length) out.push_back(std::move(text));
    } else if (v.is_object() || v.is_array()) {
      for (const Json& inner : v) self(inner, self);
    }
  };
  for (const FixtureMember& m : members) {
    for (const FixtureStore& s : m.stores) {
      for (const Json& r : s.records) add(r, add);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

absl::StatusOr<Fixture> GenerateFixture(const FixtureSpec& spec) {
  if (spec.members < 0 || spec.min_records < 0 ||
      spec.max_records < spec.min_records) {
    return InvalidArgument("bad-fixture-spec");
  }
  Rng rng(spec.seed);
  Fixture f;
  if (spec.preset == "generic") {
    f = Generic(spec, rng);
  } else if (spec.preset == "rideshare") {
    if (spec.sector_drivers.empty() || spec.sector_drivers.size() > 4) {
      return InvalidArgument("bad-fixture-spec", "1 to 4 sectors");
    }
    f = Rideshare(spec, rng);
  } else if (spec.preset == "income") {
    f = Income(spec, rng);
  } else {
    return InvalidArgument("unknown-preset", spec.preset);
  }
  f.preset = spec.preset;
  f.seed = spec.seed;
  return f;
}

std::string RideshareSectorKey(int sector) {
  return coop::StrCat(kBaseLatCell + sector / 2, ":", kBaseLonCell + sector % 2);
}

absl::Status SaveFixture(const Fixture& fixture,
                         const std::filesystem::path& path) {
  return WriteFileAtomically(path, fixture.ToJson().dump(1) + "\n");
}

absl::StatusOr<Fixture> LoadFixture(const std::filesystem::path& path) {
  COOP_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  COOP_ASSIGN_OR_RETURN(Json json, ParseJson(text));
  return Fixture::FromJson(json);
}

}  // namespace coop::sim
