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

#ifndef COOP_DSL_EVALUATOR_H_
#define COOP_DSL_EVALUATOR_H_

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/schema.h"
#include "coop/common/value.h"
#include "coop/dsl/ast.h"
#include "coop/dsl/exact_sum.h"

namespace coop::dsl {

// Executable form shipped to a store. The field-access set is fixed to
// `required_fields`; touching anything else is a hard fault.
struct CompiledAlgorithm {
  AlgoRef algo;
  Mode mode = Mode::kAggregate;
  Program program;
  std::vector<FieldSpec> required_fields;
  std::string digest;  // identifies program + field set

  static CompiledAlgorithm Make(AlgoRef algo, Mode mode, Program program,
                                std::vector<FieldSpec> required_fields);
};

// Mergeable partial aggregate for one group cell.
struct CellPartial {
  uint64_t records = 0;
  ExactSum sum;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::vector<uint64_t> bins;

  void Merge(const CellPartial& other);
  bool SameAs(const CellPartial& other) const;
};

// What a store hands back: partials per group key ("" when ungrouped) and
// how many records contributed. Raw record values never appear here.
struct LocalResult {
  std::string program_digest;
  std::string store_id;
  MemberId owner;
  uint64_t contributing_records = 0;
  std::map<std::string, CellPartial> cells;
};

// Group-key text forms:
//   text field       the value itself
//   bucket(f, w)     floor(v / w) * w in shortest round-trip form
//                    (negative zero printed as "0")
//   geosector(g, s)  "<floor(lat / s)>:<floor(lon / s)>"
//
// Records whose filter is false are skipped; records whose field expression
// evaluates to a non-finite value are skipped as well. Histogram bucket of v
// is floor((v - lo) / width) clamped to the last bucket; values outside
// [lo, hi) count toward the cell but no bucket.
absl::StatusOr<LocalResult> Evaluate(
    const CompiledAlgorithm& algorithm, const std::vector<FieldSpec>& schema,
    std::span<const std::vector<FieldValue>> records);

// Checks that `schema` can serve `algorithm` (every referenced field present
// with a matching kind). Fails with "undeclared-field" (Internal) when the
// program reaches outside its declared field set.
absl::Status CheckFieldAccess(const CompiledAlgorithm& algorithm,
                              const std::vector<FieldSpec>& schema);

// True when every declared field exists in `schema` with the same kind.
bool SchemaServes(const std::vector<FieldSpec>& required,
                  const std::vector<FieldSpec>& schema);

// Wire forms used between the engine and remotely hosted stores. Decoding a
// compiled algorithm re-parses its program and checks the digest.
Json CompiledAlgorithmToJson(const CompiledAlgorithm& algorithm);
absl::StatusOr<CompiledAlgorithm> CompiledAlgorithmFromJson(const Json& json);
Json LocalResultToJson(const LocalResult& result);
absl::StatusOr<LocalResult> LocalResultFromJson(const Json& json);

std::string BucketKey(double value, double width);
std::string GeoSectorKey(const GeoPoint& point, double size);

}  // namespace coop::dsl

#endif  // COOP_DSL_EVALUATOR_H_
