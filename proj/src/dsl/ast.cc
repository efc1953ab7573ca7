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

#include "coop/dsl/ast.h"

#include <charconv>
#include <cmath>
#include <string>

#include "coop/common/strings.h"

namespace coop::dsl {

std::string Span::ToString() const { return coop::StrCat(line, ":", column); }

std::string_view CompareOpText(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
    case CompareOp::kEq: return "==";
    case CompareOp::kNe: return "!=";
  }
  return "?";
}

std::string_view AggName(AggKind kind) {
  switch (kind) {
    case AggKind::kCount: return "count";
    case AggKind::kSum: return "sum";
    case AggKind::kMean: return "mean";
    case AggKind::kMin: return "min";
    case AggKind::kMax: return "max";
    case AggKind::kHistogram: return "histogram";
    case AggKind::kProjection: return "projection";
  }
  return "?";
}

size_t Aggregate::BucketCount() const {
  if (kind != AggKind::kHistogram || !(width > 0) || !(hi > lo)) return 0;
  return static_cast<size_t>(std::ceil((hi - lo) / width));
}

bool SameExpr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

namespace {

bool SamePred(const PredPtr& a, const PredPtr& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

void CollectFields(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::kField) out.insert(e->field);
  CollectFields(e->lhs, out);
  CollectFields(e->rhs, out);
}

void CollectFields(const PredPtr& p, std::set<std::string>& out) {
  if (!p) return;
  CollectFields(p->lhs, out);
  CollectFields(p->rhs, out);
  CollectFields(p->left, out);
  CollectFields(p->right, out);
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::kField:
      return a.field == b.field;
    case Expr::Kind::kNumber:
      return a.number == b.number;
    case Expr::Kind::kBinary:
      return a.op == b.op && SameExpr(a.lhs, b.lhs) && SameExpr(a.rhs, b.rhs);
  }
  return false;
}

bool operator==(const Pred& a, const Pred& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Pred::Kind::kCompare) {
    return a.op == b.op && SameExpr(a.lhs, b.lhs) && SameExpr(a.rhs, b.rhs);
  }
  return SamePred(a.left, b.left) && SamePred(a.right, b.right);
}

bool operator==(const GroupKey& a, const GroupKey& b) {
  return a.kind == b.kind && a.field == b.field &&
         (a.kind == GroupKey::Kind::kField || a.width == b.width);
}

bool operator==(const Aggregate& a, const Aggregate& b) {
  if (a.kind != b.kind || !SameExpr(a.arg, b.arg)) return false;
  if (a.kind == AggKind::kHistogram) {
    return a.lo == b.lo && a.hi == b.hi && a.width == b.width;
  }
  return true;
}

bool operator==(const Program& a, const Program& b) {
  return a.mode == b.mode && a.key == b.key && a.agg == b.agg &&
         SamePred(a.filter, b.filter);
}

std::set<std::string> ReferencedFields(const Program& program) {
  std::set<std::string> out;
  if (program.key) out.insert(program.key->field);
  CollectFields(program.agg.arg, out);
  CollectFields(program.filter, out);
  return out;
}

std::string FormatNumber(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string Print(const Expr& expr) {
  switch (expr.kind) {
    case Expr::Kind::kField:
      return expr.field;
    case Expr::Kind::kNumber:
      return FormatNumber(expr.number);
    case Expr::Kind::kBinary:
      return coop::StrCat("(", Print(*expr.lhs), " ", std::string(1, expr.op),
                          " ", Print(*expr.rhs), ")");
  }
  return "";
}

std::string Print(const Pred& pred) {
  switch (pred.kind) {
    case Pred::Kind::kCompare:
      return coop::StrCat(Print(*pred.lhs), " ", CompareOpText(pred.op), " ",
                          Print(*pred.rhs));
    case Pred::Kind::kAnd:
      return coop::StrCat("(", Print(*pred.left), " and ", Print(*pred.right),
                          ")");
    case Pred::Kind::kOr:
      return coop::StrCat("(", Print(*pred.left), " or ", Print(*pred.right),
                          ")");
  }
  return "";
}

namespace {

std::string PrintAggregate(const Aggregate& agg) {
  switch (agg.kind) {
    case AggKind::kCount:
      return "count()";
    case AggKind::kHistogram:
      return coop::StrCat("histogram(", Print(*agg.arg), ", ",
                          FormatNumber(agg.lo), ", ", FormatNumber(agg.hi),
                          ", ", FormatNumber(agg.width), ")");
    case AggKind::kProjection:
      return Print(*agg.arg);
    default:
      return coop::StrCat(AggName(agg.kind), "(", Print(*agg.arg), ")");
  }
}

std::string PrintKey(const GroupKey& key) {
  switch (key.kind) {
    case GroupKey::Kind::kField:
      return key.field;
    case GroupKey::Kind::kBucket:
      return coop::StrCat("bucket(", key.field, ", ", FormatNumber(key.width),
                          ")");
    case GroupKey::Kind::kGeoSector:
      return coop::StrCat("geosector(", key.field, ", ",
                          FormatNumber(key.width), ")");
  }
  return "";
}

}  // namespace

std::string Print(const Program& program) {
  std::string out;
  if (program.mode) {
    out = program.mode == Mode::kAggregate ? "aggregate " : "subject ";
  }
  if (program.key) {
    coop::StrAppend(&out, "groupby(", PrintKey(*program.key), ", ",
                    PrintAggregate(program.agg), ")");
  } else {
    coop::StrAppend(&out, PrintAggregate(program.agg));
  }
  if (program.filter) coop::StrAppend(&out, " where ", Print(*program.filter));
  return out;
}

}  // namespace coop::dsl
