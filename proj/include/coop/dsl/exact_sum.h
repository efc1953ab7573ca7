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

#ifndef COOP_DSL_EXACT_SUM_H_
#define COOP_DSL_EXACT_SUM_H_

#include <vector>

namespace coop::dsl {

// Error-free floating point accumulator (Shewchuk expansions, as in
// Python's math.fsum). The represented sum is exact, so partial sums from
// different stores can be merged in any order and Value() is always the
// correctly rounded total. Inputs must be finite.
class ExactSum {
 public:
  void Add(double x);
  void Merge(const ExactSum& other);
  double Value() const;

  const std::vector<double>& partials() const { return partials_; }
  static ExactSum FromPartials(std::vector<double> partials);

 private:
  // Non-overlapping, increasing magnitude.
  std::vector<double> partials_;
};

}  // namespace coop::dsl

#endif  // COOP_DSL_EXACT_SUM_H_
