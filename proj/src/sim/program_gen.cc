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

#include "coop/sim/program_gen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "coop/common/strings.h"

namespace coop::sim {
namespace {

const char* const kNumeric[] = {"amount", "hours", "at"};

FieldKind KindOf(const std::string& field) {
  if (field == "region" || field == "note") return FieldKind::kText;
  if (field == "at") return FieldKind::kTimestamp;
  if (field == "loc") return FieldKind::kGeo;
  return FieldKind::kNumber;
}

}  // namespace

std::string ProgramGenerator::Constant(double lo, double hi, int decimals) {
  const double v = std::uniform_real_distribution<double>(lo, hi)(rng_);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string ProgramGenerator::Expr(int depth, bool& divides_by_hours) {
  if (depth <= 0 || Chance(0.45)) {
    if (Chance(0.75)) {
      std::string f = kNumeric[Pick(Chance(0.85) ? 2 : 3)];
      used_.push_back(f);
      return f;
    }
    return Constant(0.5, 20, Pick(3));
  }
  const int op = Pick(4);
  if (op == 3) {
    // Divide by a non-zero constant or by the guarded `hours` field.
    std::string lhs = Expr(depth - 1, divides_by_hours);
    if (Chance(0.5)) {
      divides_by_hours = true;
      used_.push_back("hours");
      return coop::StrCat("(", lhs, " / hours)");
    }
    return coop::StrCat("(", lhs, " / ", Constant(1, 9, 1), ")");
  }
  static const char kOps[] = {'+', '-', '*'};
  return coop::StrCat("(", Expr(depth - 1, divides_by_hours), " ",
                      std::string(1, kOps[op]), " ",
                      Expr(depth - 1, divides_by_hours), ")");
}

std::string ProgramGenerator::Predicate(int depth) {
  if (depth <= 0 || Chance(0.6)) {
    static const char* const kCmp[] = {"<", "<=", ">", ">=", "==", "!="};
    std::string field = kNumeric[Pick(2)];
    used_.push_back(field);
    const std::string bound =
        field == "hours" ? Constant(0, 40, 0) : Constant(-100, 3000, 1);
    return coop::StrCat(field, " ", kCmp[Pick(Chance(0.9) ? 4 : 6)], " ", bound);
  }
  return coop::StrCat("(", Predicate(depth - 1), Chance(0.5) ? " and " : " or ",
                      Predicate(depth - 1), ")");
}

GeneratedProgram ProgramGenerator::Next() {
  used_.clear();
  bool divides = false;
  std::string agg;
  switch (Pick(6)) {
    case 0: agg = "count()"; break;
    case 1: agg = coop::StrCat("sum(", Expr(2, divides), ")"); break;
    case 2: agg = coop::StrCat("mean(", Expr(2, divides), ")"); break;
    case 3: agg = coop::StrCat("min(", Expr(2, divides), ")"); break;
    case 4: agg = coop::StrCat("max(", Expr(2, divides), ")"); break;
    default: {
      used_.push_back("amount");
      const int lo = -200 + 100 * Pick(3);
      const int width = 100 * (1 + Pick(5));
      const int buckets = 2 + Pick(8);
      agg = coop::StrCat("histogram(amount, ", lo, ", ", lo + width * buckets,
                         ", ", width, ")");
    }
  }
  std::string body = agg;
  if (Chance(0.65)) {
    std::string key;
    switch (Pick(5)) {
      case 0:
        key = "region";
        break;
      case 1:
        key = coop::StrCat("bucket(amount, ", 250 * (1 + Pick(4)), ")");
        used_.push_back("amount");
        break;
      case 2:
        key = "bucket(hours, 10)";
        used_.push_back("hours");
        break;
      case 3:
        key = "bucket(at, 2592000)";
        used_.push_back("at");
        break;
      default:
        key = coop::StrCat("geosector(loc, ", Chance(0.5) ? "0.25" : "0.5", ")");
        used_.push_back("loc");
        break;
    }
    if (key == "region") used_.push_back("region");
    body = coop::StrCat("groupby(", key, ", ", agg, ")");
  }
  std::string filter;
  if (divides) filter = "hours > 0";
  if (Chance(0.5)) {
    const std::string extra = Predicate(2);
    filter = filter.empty() ? extra : coop::StrCat(filter, " and ", extra);
  }
  GeneratedProgram out;
  out.source = coop::StrCat(Chance(0.8) ? "aggregate " : "", body);
  if (!filter.empty()) coop::StrAppend(&out.source, " where ", filter);
  std::set<std::string> seen;
  for (const std::string& f : used_) {
    if (seen.insert(f).second) out.requires_fields.push_back({f, KindOf(f), ""});
  }
  return out;
}

}  // namespace coop::sim
