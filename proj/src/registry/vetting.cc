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

#include "coop/registry/vetting.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "coop/common/strings.h"
#include "coop/dsl/parser.h"

namespace coop::registry {
namespace {

using dsl::AggKind;
using dsl::CompareOp;
using dsl::Expr;
using dsl::ExprPtr;
using dsl::GroupKey;
using dsl::Pred;
using dsl::PredPtr;

class Vetter {
 public:
  explicit Vetter(const AlgorithmManifest& manifest) : manifest_(manifest) {}

  std::vector<Finding> Run() {
    CheckMetadata();
    absl::StatusOr<dsl::Program> parsed = dsl::Parse(manifest_.source);
    if (!parsed.ok()) {
      std::optional<dsl::ParseError> err = dsl::ParseErrorOf(parsed.status());
      Error("PARSE",
            err ? coop::StrCat(err->line, ":", err->column) : "source",
            err ? err->message : std::string(parsed.status().message()));
      return std::move(findings_);
    }
    const dsl::Program& program = *parsed;
    CheckMode(program);
    CheckOutputForm(program);
    CheckFields(program);
    CheckDivisions(program);
    CheckKey(program);
    CheckHistogram(program);
    if (manifest_.output_mode == OutputMode::kSubject &&
        manifest_.purpose_tags.empty()) {
      Error("R5", "purpose_tags",
            "subject-mode algorithms must declare at least one purpose");
    }
    if (!manifest_.manual_review_passed) {
      findings_.push_back({"MANUAL", "manual_review_passed",
                           "bias and discrimination review outstanding",
                           Severity::kWarning});
    }
    return std::move(findings_);
  }

 private:
  void Error(std::string rule, std::string location, std::string message) {
    findings_.push_back({std::move(rule), std::move(location),
                         std::move(message), Severity::kError});
  }

  void CheckMetadata() {
    if (manifest_.title.empty()) Error("META", "title", "title is empty");
    std::set<std::string> seen;
    for (const FieldSpec& f : manifest_.required_fields) {
      if (!seen.insert(f.name).second) {
        Error("META", "requires", coop::StrCat("duplicate field '", f.name,
                                               "' in requires"));
      }
    }
  }

  void CheckMode(const dsl::Program& program) {
    if (!program.mode) return;
    const bool program_aggregate = *program.mode == dsl::Mode::kAggregate;
    const bool manifest_aggregate =
        manifest_.output_mode == OutputMode::kAggregate;
    if (program_aggregate != manifest_aggregate) {
      Error("MODE", program.span.ToString(),
            coop::StrCat("program mode does not match output_mode '",
                         OutputModeName(manifest_.output_mode), "'"));
    }
  }

  // R1. Subject-mode results end up in portable assertions, so projections
  // are refused there as well.
  void CheckOutputForm(const dsl::Program& program) {
    if (program.agg.kind == AggKind::kProjection) {
      Error("R1", program.agg.span.ToString(),
            coop::StrCat("raw projection '", dsl::Print(*program.agg.arg),
                         "' in output; wrap it in an aggregate"));
    }
  }

  const FieldSpec* Declared(const std::string& name) const {
    return FindField(manifest_.required_fields, name);
  }

  void CheckExprFields(const ExprPtr& e) {
    if (!e) return;
    if (e->kind == Expr::Kind::kField) {
      const FieldSpec* spec = Declared(e->field);
      if (spec == nullptr) {
        Error("R2", e->span.ToString(),
              coop::StrCat("field '", e->field, "' is not declared in requires"));
      } else if (spec->kind != FieldKind::kNumber &&
                 spec->kind != FieldKind::kTimestamp) {
        Error("TYPE", e->span.ToString(),
              coop::StrCat("field '", e->field, "' of kind ",
                           FieldKindName(spec->kind),
                           " used in arithmetic"));
      }
    }
    CheckExprFields(e->lhs);
    CheckExprFields(e->rhs);
  }

  void CheckPredFields(const PredPtr& p) {
    if (!p) return;
    CheckExprFields(p->lhs);
    CheckExprFields(p->rhs);
    CheckPredFields(p->left);
    CheckPredFields(p->right);
  }

  void CheckFields(const dsl::Program& program) {
    if (program.key && Declared(program.key->field) == nullptr) {
      Error("R2", program.key->span.ToString(),
            coop::StrCat("field '", program.key->field,
                         "' is not declared in requires"));
    }
    CheckExprFields(program.agg.arg);
    CheckPredFields(program.filter);
  }

  // ---- R3 ----

  static void Conjuncts(const PredPtr& p, std::vector<const Pred*>& out) {
    if (!p) return;
    if (p->kind == Pred::Kind::kAnd) {
      Conjuncts(p->left, out);
      Conjuncts(p->right, out);
    } else {
      out.push_back(p.get());
    }
  }

  static bool ExcludesZero(CompareOp op, double c) {
    switch (op) {
      case CompareOp::kGt: return c >= 0;
      case CompareOp::kGe: return c > 0;
      case CompareOp::kLt: return c <= 0;
      case CompareOp::kLe: return c < 0;
      case CompareOp::kNe: return c == 0;
      case CompareOp::kEq: return c != 0;
    }
    return false;
  }

  static CompareOp Mirror(CompareOp op) {
    switch (op) {
      case CompareOp::kGt: return CompareOp::kLt;
      case CompareOp::kGe: return CompareOp::kLe;
      case CompareOp::kLt: return CompareOp::kGt;
      case CompareOp::kLe: return CompareOp::kGe;
      default: return op;
    }
  }

  bool Guarded(const ExprPtr& divisor) const {
    for (const Pred* c : guards_) {
      if (c->kind != Pred::Kind::kCompare) continue;
      if (dsl::SameExpr(c->lhs, divisor)) {
        std::optional<double> k = ConstantValue(*c->rhs);
        if (k && ExcludesZero(c->op, *k)) return true;
      }
      if (dsl::SameExpr(c->rhs, divisor)) {
        std::optional<double> k = ConstantValue(*c->lhs);
        if (k && ExcludesZero(Mirror(c->op), *k)) return true;
      }
    }
    return false;
  }

  void CheckDivisionsIn(const ExprPtr& e, bool guards_apply) {
    if (!e) return;
    if (e->kind == Expr::Kind::kBinary && e->op == '/') {
      std::optional<double> k = ConstantValue(*e->rhs);
      const bool nonzero_constant = k && *k != 0 && std::isfinite(*k);
      if (!nonzero_constant && !(guards_apply && Guarded(e->rhs))) {
        Error("R3", e->rhs->span.ToString(),
              coop::StrCat("divisor '", dsl::Print(*e->rhs),
                           "' may be zero; add a filter such as 'where ",
                           dsl::Print(*e->rhs), " > 0'"));
      }
    }
    CheckDivisionsIn(e->lhs, guards_apply);
    CheckDivisionsIn(e->rhs, guards_apply);
  }

  void CheckDivisionsInPred(const PredPtr& p) {
    if (!p) return;
    CheckDivisionsIn(p->lhs, false);
    CheckDivisionsIn(p->rhs, false);
    CheckDivisionsInPred(p->left);
    CheckDivisionsInPred(p->right);
  }

  void CheckDivisions(const dsl::Program& program) {
    Conjuncts(program.filter, guards_);
    CheckDivisionsIn(program.agg.arg, true);
    CheckDivisionsInPred(program.filter);
  }

  // ---- R4 ----

  void CheckKey(const dsl::Program& program) {
    if (!program.key) return;
    const GroupKey& key = *program.key;
    const FieldSpec* spec = Declared(key.field);
    if (spec == nullptr) return;  // already an R2 finding
    const std::string loc = key.span.ToString();
    switch (key.kind) {
      case GroupKey::Kind::kField:
        if (spec->kind != FieldKind::kText) {
          Error("R4", loc,
                coop::StrCat("group key '", key.field, "' of kind ",
                             FieldKindName(spec->kind),
                             " is not bucketable; use bucket() or geosector()"));
        }
        break;
      case GroupKey::Kind::kBucket:
        if (spec->kind != FieldKind::kNumber &&
            spec->kind != FieldKind::kTimestamp) {
          Error("R4", loc, "bucket() needs a number or timestamp field");
        }
        if (!(key.width > 0)) Error("R4", loc, "bucket width must be positive");
        break;
      case GroupKey::Kind::kGeoSector:
        if (spec->kind != FieldKind::kGeo) {
          Error("R4", loc, "geosector() needs a geo field");
        }
        if (!(key.width > 0)) Error("R4", loc, "sector size must be positive");
        break;
    }
  }

  void CheckHistogram(const dsl::Program& program) {
    const dsl::Aggregate& agg = program.agg;
    if (agg.kind != AggKind::kHistogram) return;
    const std::string loc = agg.span.ToString();
    if (!(agg.width > 0) || !(agg.hi > agg.lo)) {
      Error("HIST", loc, "histogram needs lo < hi and a positive width");
    } else if (agg.BucketCount() > kMaxHistogramBuckets) {
      Error("HIST", loc, "too many histogram buckets");
    }
  }

  const AlgorithmManifest& manifest_;
  std::vector<Finding> findings_;
  std::vector<const Pred*> guards_;
};

}  // namespace

std::optional<double> ConstantValue(const dsl::Expr& expr) {
  switch (expr.kind) {
    case Expr::Kind::kField:
      return std::nullopt;
    case Expr::Kind::kNumber:
      return expr.number;
    case Expr::Kind::kBinary: {
      std::optional<double> l = ConstantValue(*expr.lhs);
      std::optional<double> r = ConstantValue(*expr.rhs);
      if (!l || !r) return std::nullopt;
      switch (expr.op) {
        case '+': return *l + *r;
        case '-': return *l - *r;
        case '*': return *l * *r;
        case '/': return *l / *r;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

VettingStatus Vet(const AlgorithmManifest& manifest, Timestamp now) {
  VettingStatus status;
  status.checked_at = now;
  status.findings = Vetter(manifest).Run();
  status.state =
      status.HasErrors() ? VettingState::kRejected : VettingState::kVetted;
  return status;
}

}  // namespace coop::registry
