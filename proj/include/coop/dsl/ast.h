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

#ifndef COOP_DSL_AST_H_
#define COOP_DSL_AST_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace coop::dsl {

// Source location of a node; line and column are 1-based, column in bytes.
struct Span {
  int line = 1;
  int column = 1;
  size_t offset = 0;
  size_t length = 0;

  std::string ToString() const;  // "line:column"
};

enum class Mode { kAggregate, kSubject };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Numeric field expression. Trees are immutable once built and shared
// between copies of a program.
struct Expr {
  enum class Kind { kField, kNumber, kBinary };

  Kind kind = Kind::kNumber;
  std::string field;
  double number = 0;
  char op = 0;  // one of + - * /
  ExprPtr lhs;
  ExprPtr rhs;
  Span span;
};

enum class CompareOp { kLt, kLe, kGt, kGe, kEq, kNe };
std::string_view CompareOpText(CompareOp op);

struct Pred;
using PredPtr = std::shared_ptr<const Pred>;

struct Pred {
  enum class Kind { kCompare, kAnd, kOr };

  Kind kind = Kind::kCompare;
  CompareOp op = CompareOp::kEq;
  ExprPtr lhs;  // kCompare
  ExprPtr rhs;
  PredPtr left;  // kAnd, kOr
  PredPtr right;
  Span span;
};

struct GroupKey {
  enum class Kind { kField, kBucket, kGeoSector };

  Kind kind = Kind::kField;
  std::string field;
  double width = 0;  // bucket width or sector size
  Span span;
};

enum class AggKind {
  kCount,
  kSum,
  kMean,
  kMin,
  kMax,
  kHistogram,
  // A bare field expression in output position. The grammar does not allow
  // it but the parser accepts it so that vetting can reject it with a
  // location instead of a syntax error.
  kProjection,
};
std::string_view AggName(AggKind kind);

struct Aggregate {
  AggKind kind = AggKind::kCount;
  ExprPtr arg;  // null for count()
  double lo = 0;
  double hi = 0;
  double width = 0;
  Span span;

  // Number of histogram buckets: ceil((hi - lo) / width).
  size_t BucketCount() const;
};

struct Program {
  std::optional<Mode> mode;
  std::optional<GroupKey> key;
  Aggregate agg;
  PredPtr filter;
  Span span;
};

// Structural equality; spans are ignored.
bool operator==(const Expr& a, const Expr& b);
bool operator==(const Pred& a, const Pred& b);
bool operator==(const GroupKey& a, const GroupKey& b);
bool operator==(const Aggregate& a, const Aggregate& b);
bool operator==(const Program& a, const Program& b);
bool SameExpr(const ExprPtr& a, const ExprPtr& b);

// Every field name the program touches.
std::set<std::string> ReferencedFields(const Program& program);

// Canonical text that reparses to a structurally equal program.
std::string Print(const Program& program);
std::string Print(const Expr& expr);
std::string Print(const Pred& pred);
std::string FormatNumber(double value);

}  // namespace coop::dsl

#endif  // COOP_DSL_AST_H_
