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

#include "coop/common/value.h"

#include <cmath>
#include <string>

#include "coop/common/status.h"

namespace coop {

absl::StatusOr<FieldValue> ValueFromJson(FieldKind kind, const Json& json) {
  switch (kind) {
    case FieldKind::kNumber:
      if (!json.is_number()) break;
      if (!std::isfinite(json.get<double>())) break;
      return FieldValue(json.get<double>());
    case FieldKind::kText:
      if (!json.is_string()) break;
      return FieldValue(json.get<std::string>());
    case FieldKind::kTimestamp: {
      if (!json.is_string()) break;
      absl::StatusOr<Timestamp> t = ParseTimestamp(json.get<std::string>());
      if (!t.ok()) break;
      return FieldValue(TimestampValue{*t});
    }
    case FieldKind::kGeo: {
      if (!json.is_object() || json.size() != 2 || !json.contains("lat") ||
          !json.contains("lon") || !json["lat"].is_number() ||
          !json["lon"].is_number()) {
        break;
      }
      GeoPoint p{json["lat"].get<double>(), json["lon"].get<double>()};
      if (!(p.lat >= -90 && p.lat <= 90 && p.lon >= -180 && p.lon <= 180)) {
        break;
      }
      return FieldValue(p);
    }
  }
  return InvalidArgument("schema-violation");
}

Json ValueToJson(const FieldValue& value) {
  struct Visitor {
    Json operator()(double d) const { return d; }
    Json operator()(const std::string& s) const { return s; }
    Json operator()(const TimestampValue& t) const {
      return FormatTimestamp(t.seconds);
    }
    Json operator()(const GeoPoint& g) const {
      return Json{{"lat", g.lat}, {"lon", g.lon}};
    }
  };
  return std::visit(Visitor{}, value);
}

}  // namespace coop
