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

#ifndef COOP_REGISTRY_VETTING_H_
#define COOP_REGISTRY_VETTING_H_

#include <optional>

#include "coop/common/clock.h"
#include "coop/dsl/ast.h"
#include "coop/registry/manifest.h"

namespace coop::registry {

// Static safety rules applied to every algorithm before it may run:
//
//   R1  output is an aggregate combinator; no raw field projection
//   R2  every referenced field is declared in `requires`
//   R3  every divisor is a nonzero constant or guarded by a top-level
//       conjunct of the filter that excludes zero
//   R4  group keys are bucketable: text field, bucket(number|timestamp, w>0)
//       or geosector(geo, s>0)
//   R5  subject-mode algorithms carry at least one purpose tag
//
// plus PARSE, MODE (program header vs output_mode), TYPE (arithmetic over
// non-numeric fields), HIST (histogram shape), META (manifest sanity) and
// a MANUAL warning while the human bias review is outstanding.
//
// The result depends only on the manifest; `now` only stamps checked_at.
VettingStatus Vet(const AlgorithmManifest& manifest, Timestamp now);

// Value of a field-free expression, if it has one.
std::optional<double> ConstantValue(const dsl::Expr& expr);

inline constexpr size_t kMaxHistogramBuckets = 10000;

}  // namespace coop::registry

#endif  // COOP_REGISTRY_VETTING_H_
