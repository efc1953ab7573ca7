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

#include "coop/dsl/evaluator.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "coop/common/strings.h"
#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/dsl/parser.h"

namespace coop::dsl {
namespace {

// Expression tree with field names resolved to schema positions.
struct Bound {
  Expr::Kind kind;
  int index = -1;
  double number = 0;
  char op = 0;
  int lhs = -1;
  int rhs = -1;
};

struct BoundPred {
  Pred::Kind kind;
  CompareOp op;
  int lhs = -1;  // into exprs
  int rhs = -1;
  int left = -1;  // into preds
  int right = -1;
};

class Binder {
 public:
  explicit Binder(const std::vector<FieldSpec>& schema) : schema_(schema) {}

  int Bind(const Expr& e) {
    Bound b{e.kind};
    switch (e.kind) {
      case Expr::Kind::kField:
        b.index = IndexOf(e.field);
        break;
      case Expr::Kind::kNumber:
        b.number = e.number;
        break;
      case Expr::Kind::kBinary:
        b.op = e.op;
        b.lhs = Bind(*e.lhs);
        b.rhs = Bind(*e.rhs);
        break;
    }
    exprs.push_back(b);
    return static_cast<int>(exprs.size()) - 1;
  }

  int Bind(const Pred& p) {
    BoundPred b{p.kind, p.op};
    if (p.kind == Pred::Kind::kCompare) {
      b.lhs = Bind(*p.lhs);
      b.rhs = Bind(*p.rhs);
    } else {
      b.left = Bind(*p.left);
      b.right = Bind(*p.right);
    }
    preds.push_back(b);
    return static_cast<int>(preds.size()) - 1;
  }

  int IndexOf(const std::string& name) const {
    for (size_t i = 0; i < schema_.size(); ++i) {
      if (schema_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  std::vector<Bound> exprs;
  std::vector<BoundPred> preds;

 private:
  const std::vector<FieldSpec>& schema_;
};

class RecordEvaluator {
 public:
  RecordEvaluator(const Binder& binder, const std::vector<FieldValue>& record)
      : binder_(binder), record_(record) {}

  double Eval(int i) const {
    const Bound& b = binder_.exprs[i];
    switch (b.kind) {
      case Expr::Kind::kField:
        return NumericValue(record_[b.index]);
      case Expr::Kind::kNumber:
        return b.number;
      case Expr::Kind::kBinary: {
        const double l = Eval(b.lhs);
        const double r = Eval(b.rhs);
        switch (b.op) {
          case '+': return l + r;
          case '-': return l - r;
          case '*': return l * r;
          case '/': return l / r;
        }
      }
    }
    return 0;
  }

  bool Test(int i) const {
    const BoundPred& p = binder_.preds[i];
    switch (p.kind) {
      case Pred::Kind::kAnd:
        return Test(p.left) && Test(p.right);
      case Pred::Kind::kOr:
        return Test(p.left) || Test(p.right);
      case Pred::Kind::kCompare: {
        const double l = Eval(p.lhs);
        const double r = Eval(p.rhs);
        switch (p.op) {
          case CompareOp::kLt: return l < r;
          case CompareOp::kLe: return l <= r;
          case CompareOp::kGt: return l > r;
          case CompareOp::kGe: return l >= r;
          case CompareOp::kEq: return l == r;
          case CompareOp::kNe: return l != r;
        }
      }
    }
    return false;
  }

 private:
  const Binder& binder_;
  const std::vector<FieldValue>& record_;
};

}  // namespace

CompiledAlgorithm CompiledAlgorithm::Make(
    AlgoRef algo, Mode mode, Program program,
    std::vector<FieldSpec> required_fields) {
  CompiledAlgorithm c;
  std::string material =
      coop::StrCat(algo.ToString(), "\n", mode == Mode::kAggregate ? "a" : "s",
                   "\n", Print(program));
  for (const FieldSpec& f : required_fields) {
    coop::StrAppend(&material, "\n", f.name, ":", FieldKindName(f.kind));
  }
  c.digest = crypto::Sha256Hex(material);
  c.algo = std::move(algo);
  c.mode = mode;
  c.program = std::move(program);
  c.required_fields = std::move(required_fields);
  return c;
}

void CellPartial::Merge(const CellPartial& other) {
  records += other.records;
  sum.Merge(other.sum);
  min = std::min(min, other.min);
  max = std::max(max, other.max);
  if (bins.size() < other.bins.size()) bins.resize(other.bins.size(), 0);
  for (size_t i = 0; i < other.bins.size(); ++i) bins[i] += other.bins[i];
}

bool CellPartial::SameAs(const CellPartial& other) const {
  return records == other.records && sum.Value() == other.sum.Value() &&
         min == other.min && max == other.max && bins == other.bins;
}

std::string BucketKey(double value, double width) {
  double lower = std::floor(value / width) * width;
  if (lower == 0) lower = 0;  // drop the sign of negative zero
  return FormatNumber(lower);
}

std::string GeoSectorKey(const GeoPoint& point, double size) {
  return coop::StrCat(static_cast<int64_t>(std::floor(point.lat / size)), ":",
                      static_cast<int64_t>(std::floor(point.lon / size)));
}

bool SchemaServes(const std::vector<FieldSpec>& required,
                  const std::vector<FieldSpec>& schema) {
  for (const FieldSpec& f : required) {
    const FieldSpec* have = FindField(schema, f.name);
    if (have == nullptr || have->kind != f.kind) return false;
  }
  return true;
}

absl::Status CheckFieldAccess(const CompiledAlgorithm& algorithm,
                              const std::vector<FieldSpec>& schema) {
  for (const std::string& name : ReferencedFields(algorithm.program)) {
    const FieldSpec* declared = FindField(algorithm.required_fields, name);
    if (declared == nullptr) {
      return Internal("undeclared-field", name);
    }
    const FieldSpec* have = FindField(schema, name);
    if (have == nullptr || have->kind != declared->kind) {
      return FailedPrecondition("schema-mismatch", name);
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<LocalResult> Evaluate(
    const CompiledAlgorithm& algorithm, const std::vector<FieldSpec>& schema,
    std::span<const std::vector<FieldValue>> records) {
  COOP_RETURN_IF_ERROR(CheckFieldAccess(algorithm, schema));
  const Program& program = algorithm.program;
  if (program.agg.kind == AggKind::kProjection) {
    return Internal("projection-not-executable");
  }

  Binder binder(schema);
  const int filter = program.filter ? binder.Bind(*program.filter) : -1;
  const int arg = program.agg.arg ? binder.Bind(*program.agg.arg) : -1;
  const int key_index = program.key ? binder.IndexOf(program.key->field) : -1;
  const size_t buckets = program.agg.BucketCount();
  if (program.key) {
    bool ok = key_index >= 0;
    if (ok) {
      const FieldKind have = schema[key_index].kind;
      switch (program.key->kind) {
        case GroupKey::Kind::kField:
          ok = have == FieldKind::kText;
          break;
        case GroupKey::Kind::kBucket:
          ok = have == FieldKind::kNumber || have == FieldKind::kTimestamp;
          break;
        case GroupKey::Kind::kGeoSector:
          ok = have == FieldKind::kGeo;
          break;
      }
    }
    if (!ok) return FailedPrecondition("schema-mismatch", program.key->field);
  }

  LocalResult result;
  result.program_digest = algorithm.digest;
  for (const std::vector<FieldValue>& record : records) {
    RecordEvaluator eval(binder, record);
    if (filter >= 0 && !eval.Test(filter)) continue;
    double v = 0;
    if (arg >= 0) {
      v = eval.Eval(arg);
      if (!std::isfinite(v)) continue;
    }
    std::string key;
    if (program.key) {
      const FieldValue& kv = record[key_index];
      switch (program.key->kind) {
        case GroupKey::Kind::kField:
          key = std::get<std::string>(kv);
          break;
        case GroupKey::Kind::kBucket:
          key = BucketKey(NumericValue(kv), program.key->width);
          break;
        case GroupKey::Kind::kGeoSector:
          key = GeoSectorKey(std::get<GeoPoint>(kv), program.key->width);
          break;
      }
    }
    CellPartial& cell = result.cells[key];
    ++cell.records;
    ++result.contributing_records;
    switch (program.agg.kind) {
      case AggKind::kSum:
      case AggKind::kMean:
        cell.sum.Add(v);
        break;
      case AggKind::kMin:
        cell.min = std::min(cell.min, v);
        break;
      case AggKind::kMax:
        cell.max = std::max(cell.max, v);
        break;
      case AggKind::kHistogram: {
        if (cell.bins.empty()) cell.bins.assign(buckets, 0);
        if (v >= program.agg.lo && v < program.agg.hi) {
          size_t idx = static_cast<size_t>(
              std::floor((v - program.agg.lo) / program.agg.width));
          cell.bins[std::min(idx, buckets - 1)]++;
        }
        break;
      }
      default:
        break;
    }
  }
  return result;
}

Json CompiledAlgorithmToJson(const CompiledAlgorithm& algorithm) {
  return Json{{"algo", AlgoRefToJson(algorithm.algo)},
              {"mode", algorithm.mode == Mode::kAggregate ? "aggregate"
                                                          : "subject"},
              {"program", Print(algorithm.program)},
              {"requires", SchemaToJson(algorithm.required_fields)},
              {"digest", algorithm.digest}};
}

absl::StatusOr<CompiledAlgorithm> CompiledAlgorithmFromJson(const Json& json) {
  if (!json.is_object() || !json.contains("program") ||
      !json["program"].is_string() || !json.contains("digest") ||
      !json["digest"].is_string() || !json.contains("mode") ||
      !json["mode"].is_string() || !json.contains("algo") ||
      !json.contains("requires")) {
    return InvalidArgument("bad-compiled-algorithm");
  }
  COOP_ASSIGN_OR_RETURN(AlgoRef algo, AlgoRefFromJson(json["algo"]));
  COOP_ASSIGN_OR_RETURN(std::vector<FieldSpec> fields,
                        SchemaFromJson(json["requires"]));
  COOP_ASSIGN_OR_RETURN(Program program,
                        Parse(json["program"].get<std::string>()));
  const Mode mode = json["mode"] == "subject" ? Mode::kSubject
                                              : Mode::kAggregate;
  CompiledAlgorithm c = CompiledAlgorithm::Make(
      std::move(algo), mode, std::move(program), std::move(fields));
  if (c.digest != json["digest"].get<std::string>()) {
    return InvalidArgument("digest-mismatch");
  }
  return c;
}

namespace {

Json BoundToJson(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

absl::StatusOr<double> BoundFrom(const Json& j, double missing) {
  if (j.is_null()) return missing;
  if (!j.is_number()) return InvalidArgument("bad-local-result");
  return j.get<double>();
}

}  // namespace

Json LocalResultToJson(const LocalResult& result) {
  Json cells = Json::object();
  for (const auto& [key, cell] : result.cells) {
    cells[key] = Json{{"records", cell.records},
                      {"sum", cell.sum.partials()},
                      {"min", BoundToJson(cell.min)},
                      {"max", BoundToJson(cell.max)},
                      {"bins", cell.bins}};
  }
  return Json{{"program_digest", result.program_digest},
              {"store_id", result.store_id},
              {"owner", result.owner},
              {"contributing_records", result.contributing_records},
              {"cells", std::move(cells)}};
}

absl::StatusOr<LocalResult> LocalResultFromJson(const Json& json) {
  LocalResult r;
  try {
    r.program_digest = json.at("program_digest").get<std::string>();
    r.store_id = json.at("store_id").get<std::string>();
    r.owner = json.at("owner").get<std::string>();
    r.contributing_records = json.at("contributing_records").get<uint64_t>();
    for (const auto& [key, c] : json.at("cells").items()) {
      CellPartial cell;
      cell.records = c.at("records").get<uint64_t>();
      cell.sum =
          ExactSum::FromPartials(c.at("sum").get<std::vector<double>>());
      COOP_ASSIGN_OR_RETURN(
          cell.min,
          BoundFrom(c.at("min"), std::numeric_limits<double>::infinity()));
      COOP_ASSIGN_OR_RETURN(
          cell.max,
          BoundFrom(c.at("max"), -std::numeric_limits<double>::infinity()));
      cell.bins = c.at("bins").get<std::vector<uint64_t>>();
      r.cells.emplace(key, std::move(cell));
    }
  } catch (const Json::exception&) {
    return InvalidArgument("bad-local-result");
  }
  return r;
}

}  // namespace coop::dsl
