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

#ifndef COOP_COMMON_VALUE_H_
#define COOP_COMMON_VALUE_H_

#include <string>
#include <variant>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/schema.h"

namespace coop {

struct GeoPoint {
  double lat = 0;
  double lon = 0;
  bool operator==(const GeoPoint&) const = default;
};

struct TimestampValue {
  Timestamp seconds = 0;
  bool operator==(const TimestampValue&) const = default;
};

// One typed record value; the alternative always matches the field kind.
using FieldValue = std::variant<double, std::string, TimestampValue, GeoPoint>;

// Wire forms: number -> JSON number, text -> string, timestamp -> RFC 3339
// string, geo -> {"lat": .., "lon": ..}.
absl::StatusOr<FieldValue> ValueFromJson(FieldKind kind, const Json& json);
Json ValueToJson(const FieldValue& value);

// Numeric view used by arithmetic (timestamps as epoch seconds).
inline double NumericValue(const FieldValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const auto* t = std::get_if<TimestampValue>(&v)) {
    return static_cast<double>(t->seconds);
  }
  return 0;
}

}  // namespace coop

#endif  // COOP_COMMON_VALUE_H_
