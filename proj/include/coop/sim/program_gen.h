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

#ifndef COOP_SIM_PROGRAM_GEN_H_
#define COOP_SIM_PROGRAM_GEN_H_

#include <random>
#include <string>
#include <vector>

#include "coop/common/schema.h"

namespace coop::sim {

struct GeneratedProgram {
  std::string source;
  std::vector<FieldSpec> requires_fields;  // exactly the fields it reads
};

// Random programs over the generic fixture schema. Every output passes
// vetting: divisions are by non-zero constants or guarded by a top-level
// `where <divisor> > 0` conjunct, keys match their field kinds and
// histograms stay small.
class ProgramGenerator {
 public:
  explicit ProgramGenerator(uint64_t seed) : rng_(seed) {}

  GeneratedProgram Next();

 private:
  std::string Expr(int depth, bool& divides_by_hours);
  std::string Predicate(int depth);
  std::string Constant(double lo, double hi, int decimals);
  int Pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool Chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::mt19937_64 rng_;
  std::vector<std::string> used_;
};

}  // namespace coop::sim

#endif  // COOP_SIM_PROGRAM_GEN_H_
