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

#ifndef COOP_DSL_PARSER_H_
#define COOP_DSL_PARSER_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/dsl/ast.h"

namespace coop::dsl {

struct ParseError {
  int line = 1;
  int column = 1;
  std::vector<std::string> expected;
  std::string message;

  std::string ToString() const;
};

// Parses the algorithm language:
//
//   program    := mode? expr filter?
//   mode       := "aggregate" | "subject"
//   expr       := agg | "groupby" "(" key "," agg ")"
//   agg        := "count" "(" ")" | ("sum"|"mean"|"min"|"max") "(" fexpr ")"
//               | "histogram" "(" fexpr "," num "," num "," num ")"
//   fexpr      := field | num | fexpr ("+"|"-"|"*"|"/") fexpr | "(" fexpr ")"
//   key        := field | "bucket" "(" field "," num ")"
//               | "geosector" "(" field "," num ")"
//   filter     := "where" pred
//   pred       := fexpr cmp fexpr | pred ("and"|"or") pred | "(" pred ")"
//
// `*` and `/` bind tighter than `+` and `-`; `and` binds tighter than `or`.
// A numeric literal may carry a leading minus sign.
//
// On failure the status is InvalidArgument with slug "parse-error" and the
// position available through ParseErrorOf().
absl::StatusOr<Program> Parse(std::string_view source);

// Recovers the position and expectation set from a Parse() failure.
std::optional<ParseError> ParseErrorOf(const absl::Status& status);

bool IsKeyword(std::string_view word);

}  // namespace coop::dsl

#endif  // COOP_DSL_PARSER_H_
