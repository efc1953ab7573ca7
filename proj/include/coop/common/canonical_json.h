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

#ifndef COOP_COMMON_CANONICAL_JSON_H_
#define COOP_COMMON_CANONICAL_JSON_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace coop {

using Json = nlohmann::json;

// One canonical byte form is used repo-wide for anything that is hashed or
// signed: UTF-8, object keys sorted bytewise, no insignificant whitespace,
// integers without leading zeros, doubles in shortest round-trip form.
// Timestamps are carried as RFC 3339 strings by the callers.
absl::StatusOr<std::string> Canonicalize(const Json& value);

// Parses `bytes` and succeeds only if they already are in canonical form.
absl::StatusOr<Json> ParseCanonical(std::string_view bytes);

// Lenient parse for request bodies.
absl::StatusOr<Json> ParseJson(std::string_view bytes);

}  // namespace coop

#endif  // COOP_COMMON_CANONICAL_JSON_H_
