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

#include "coop/common/canonical_json.h"

#include <cmath>
#include <string>

#include "coop/common/status.h"

namespace coop {
namespace {

bool AllNumbersFinite(const Json& value) {
  switch (value.type()) {
    case Json::value_t::number_float:
      return std::isfinite(value.get<double>());
    case Json::value_t::array:
    case Json::value_t::object:
      for (const auto& item : value) {
        if (!AllNumbersFinite(item)) return false;
      }
      return true;
    default:
      return true;
  }
}

}  // namespace

absl::StatusOr<std::string> Canonicalize(const Json& value) {
  if (!AllNumbersFinite(value)) {
    return InvalidArgument("non-finite-number");
  }
  try {
    return value.dump(-1, ' ', /*ensure_ascii=*/false,
                      Json::error_handler_t::strict);
  } catch (const Json::exception& e) {
    return InvalidArgument("invalid-utf8", e.what());
  }
}

absl::StatusOr<Json> ParseCanonical(std::string_view bytes) {
  COOP_ASSIGN_OR_RETURN(Json parsed, ParseJson(bytes));
  COOP_ASSIGN_OR_RETURN(std::string again, Canonicalize(parsed));
  if (again != bytes) return InvalidArgument("non-canonical");
  return parsed;
}

absl::StatusOr<Json> ParseJson(std::string_view bytes) {
  Json parsed = Json::parse(bytes, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return InvalidArgument("malformed-json");
  return parsed;
}

}  // namespace coop
