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

#include "coop/sim/oracle.h"

#include <gmp.h>
#include <mpfr.h>

#include <charconv>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>

#include "coop/common/clock.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::sim {
namespace {

// ---- syntax

struct Token {
  enum Kind { kWord, kNum, kSym, kEnd } kind = kEnd;
  std::string text;
  double num = 0;
};

absl::StatusOr<std::vector<Token>> Lex(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Token::kWord, std::string(s.substr(i, j - i))});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      double v = 0;
      auto [end, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
      if (ec != std::errc()) return InvalidArgument("oracle-parse", "number");
      const size_t j = end - s.data();
      out.push_back({Token::kNum, std::string(s.substr(i, j - i)), v});
      i = j;
    } else {
      static const char* const kTwo[] = {"<=", ">=", "==", "!="};
      std::string sym(1, c);
      for (const char* two : kTwo) {
        if (s.substr(i, 2) == two) sym = two;
      }
      if (std::string_view("()+-*/<>,").find(c) == std::string_view::npos &&
          sym.size() == 1) {
        return InvalidArgument("oracle-parse", sym);
      }
      out.push_back({Token::kSym, sym});
      i += sym.size();
    }
  }
  out.push_back({Token::kEnd, ""});
  return out;
}

struct Num;
using NumP = std::unique_ptr<Num>;
struct Num {
  enum { kField, kConst, kOp } kind = kConst;
  std::string field;
  double value = 0;
  char op = 0;
  NumP a, b;
};

struct Cond;
using CondP = std::unique_ptr<Cond>;
struct Cond {
  enum { kCmp, kAnd, kOr } kind = kCmp;
  std::string cmp;
  NumP l, r;
  CondP x, y;
};

struct Query {
  bool subject = false;
  std::string key_kind;  // "", "field", "bucket", "geosector"
  std::string key_field;
  double key_width = 0;
  std::string agg;
  NumP arg;
  double lo = 0, hi = 0, width = 0;
  CondP where;
};

class Reader {
 public:
  explicit Reader(std::vector<Token> t) : t_(std::move(t)) {}

  absl::StatusOr<Query> Program() {
    Query q;
    if (Word("aggregate")) {
      Next();
    } else if (Word("subject")) {
      q.subject = true;
      Next();
    }
    if (Word("groupby")) {
      Next();
      COOP_RETURN_IF_ERROR(Expect("("));
      COOP_RETURN_IF_ERROR(Key(q));
      COOP_RETURN_IF_ERROR(Expect(","));
      COOP_RETURN_IF_ERROR(Agg(q));
      COOP_RETURN_IF_ERROR(Expect(")"));
    } else {
      COOP_RETURN_IF_ERROR(Agg(q));
    }
    if (Word("where")) {
      Next();
      COOP_ASSIGN_OR_RETURN(q.where, Or());
    }
    if (t_[p_].kind != Token::kEnd) return Fail();
    return q;
  }

 private:
  bool Word(std::string_view w) const {
    return t_[p_].kind == Token::kWord && t_[p_].text == w;
  }
  bool Sym(std::string_view s) const {
    return t_[p_].kind == Token::kSym && t_[p_].text == s;
  }
  void Next() { ++p_; }
  absl::Status Fail() const {
    return InvalidArgument("oracle-parse", coop::StrCat("at token ", p_));
  }
  absl::Status Expect(std::string_view s) {
    if (!Sym(s)) return Fail();
    Next();
    return absl::OkStatus();
  }
  absl::StatusOr<std::string> Ident() {
    if (t_[p_].kind != Token::kWord) return Fail();
    return t_[p_++].text;
  }
  absl::StatusOr<double> Constant() {
    bool neg = false;
    if (Sym("-")) {
      neg = true;
      Next();
    }
    if (t_[p_].kind != Token::kNum) return Fail();
    const double v = t_[p_++].num;
    return neg ? -v : v;
  }

  absl::Status Key(Query& q) {
    if (Word("bucket") || Word("geosector")) {
      q.key_kind = t_[p_].text;
      Next();
      COOP_RETURN_IF_ERROR(Expect("("));
      COOP_ASSIGN_OR_RETURN(q.key_field, Ident());
      COOP_RETURN_IF_ERROR(Expect(","));
      COOP_ASSIGN_OR_RETURN(q.key_width, Constant());
      return Expect(")");
    }
    q.key_kind = "field";
    COOP_ASSIGN_OR_RETURN(q.key_field, Ident());
    return absl::OkStatus();
  }

  absl::Status Agg(Query& q) {
    COOP_ASSIGN_OR_RETURN(q.agg, Ident());
    COOP_RETURN_IF_ERROR(Expect("("));
    if (q.agg == "count") return Expect(")");
    if (q.agg != "sum" && q.agg != "mean" && q.agg != "min" &&
        q.agg != "max" && q.agg != "histogram") {
      return Fail();
    }
    COOP_ASSIGN_OR_RETURN(q.arg, Sum());
    if (q.agg == "histogram") {
      COOP_RETURN_IF_ERROR(Expect(","));
      COOP_ASSIGN_OR_RETURN(q.lo, Constant());
      COOP_RETURN_IF_ERROR(Expect(","));
      COOP_ASSIGN_OR_RETURN(q.hi, Constant());
      COOP_RETURN_IF_ERROR(Expect(","));
      COOP_ASSIGN_OR_RETURN(q.width, Constant());
    }
    return Expect(")");
  }

  absl::StatusOr<NumP> Sum() {
    COOP_ASSIGN_OR_RETURN(NumP lhs, Product());
    while (Sym("+") || Sym("-")) {
      const char op = t_[p_++].text[0];
      COOP_ASSIGN_OR_RETURN(NumP rhs, Product());
      lhs = Combine(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }
  absl::StatusOr<NumP> Product() {
    COOP_ASSIGN_OR_RETURN(NumP lhs, Atom());
    while (Sym("*") || Sym("/")) {
      const char op = t_[p_++].text[0];
      COOP_ASSIGN_OR_RETURN(NumP rhs, Atom());
      lhs = Combine(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }
  static NumP Combine(char op, NumP a, NumP b) {
    auto n = std::make_unique<Num>();
    n->kind = Num::kOp;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
  absl::StatusOr<NumP> Atom() {
    auto n = std::make_unique<Num>();
    if (Sym("(")) {
      Next();
      COOP_ASSIGN_OR_RETURN(n, Sum());
      COOP_RETURN_IF_ERROR(Expect(")"));
      return n;
    }
    if (t_[p_].kind == Token::kWord) {
      n->kind = Num::kField;
      n->field = t_[p_++].text;
      return n;
    }
    COOP_ASSIGN_OR_RETURN(n->value, Constant());
    return n;
  }

  absl::StatusOr<CondP> Or() {
    COOP_ASSIGN_OR_RETURN(CondP lhs, And());
    while (Word("or")) {
      Next();
      COOP_ASSIGN_OR_RETURN(CondP rhs, And());
      lhs = Join(Cond::kOr, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }
  absl::StatusOr<CondP> And() {
    COOP_ASSIGN_OR_RETURN(CondP lhs, CondAtom());
    while (Word("and")) {
      Next();
      COOP_ASSIGN_OR_RETURN(CondP rhs, CondAtom());
      lhs = Join(Cond::kAnd, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }
  static CondP Join(decltype(Cond::kind) kind, CondP x, CondP y) {
    auto c = std::make_unique<Cond>();
    c->kind = kind;
    c->x = std::move(x);
    c->y = std::move(y);
    return c;
  }
  absl::StatusOr<CondP> CondAtom() {
    if (Sym("(")) {
      // Either a parenthesised condition or a comparison whose left side
      // starts with "(": try the former and rewind on failure.
      const size_t save = p_;
      Next();
      absl::StatusOr<CondP> inner = Or();
      if (inner.ok() && Sym(")")) {
        Next();
        return inner;
      }
      p_ = save;
    }
    auto c = std::make_unique<Cond>();
    COOP_ASSIGN_OR_RETURN(c->l, Sum());
    static const char* const kOps[] = {"<", "<=", ">", ">=", "==", "!="};
    bool found = false;
    for (const char* op : kOps) found = found || Sym(op);
    if (!found) return Fail();
    c->cmp = t_[p_++].text;
    COOP_ASSIGN_OR_RETURN(c->r, Sum());
    return c;
  }

  std::vector<Token> t_;
  size_t p_ = 0;
};

// ---- evaluation

class Row {
 public:
  Row(const Json& record, const std::vector<FieldSpec>& schema)
      : record_(record), schema_(schema) {}

  double Field(const std::string& name) const {
    const Json& v = record_.at(name);
    if (v.is_number()) return v.get<double>();
    for (const FieldSpec& f : schema_) {
      if (f.name == name && f.kind == FieldKind::kTimestamp) {
        return static_cast<double>(*ParseTimestamp(v.get<std::string>()));
      }
    }
    return std::nan("");
  }
  double Eval(const Num& n) const {
    switch (n.kind) {
      case Num::kField: return Field(n.field);
      case Num::kConst: return n.value;
      case Num::kOp: {
        const double a = Eval(*n.a), b = Eval(*n.b);
        if (n.op == '+') return a + b;
        if (n.op == '-') return a - b;
        if (n.op == '*') return a * b;
        return a / b;
      }
    }
    return 0;
  }
  bool Holds(const Cond& c) const {
    if (c.kind == Cond::kAnd) return Holds(*c.x) && Holds(*c.y);
    if (c.kind == Cond::kOr) return Holds(*c.x) || Holds(*c.y);
    const double a = Eval(*c.l), b = Eval(*c.r);
    if (c.cmp == "<") return a < b;
    if (c.cmp == "<=") return a <= b;
    if (c.cmp == ">") return a > b;
    if (c.cmp == ">=") return a >= b;
    if (c.cmp == "==") return a == b;
    return a != b;
  }
  const Json& Raw(const std::string& name) const { return record_.at(name); }

 private:
  const Json& record_;
  const std::vector<FieldSpec>& schema_;
};

std::string Shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

class Rational {
 public:
  Rational() { mpq_init(q_); }
  ~Rational() { mpq_clear(q_); }
  Rational(const Rational&) = delete;
  Rational& operator=(const Rational&) = delete;

  void Add(double v) {
    mpq_t t;
    mpq_init(t);
    mpq_set_d(t, v);
    mpq_add(q_, q_, t);
    mpq_clear(t);
  }
  // Nearest double to this value divided by `divisor`.
  double Nearest(unsigned long divisor = 1) const {
    mpq_t t;
    mpq_init(t);
    mpq_set(t, q_);
    if (divisor != 1) {
      mpq_t d;
      mpq_init(d);
      mpq_set_ui(d, divisor, 1);
      mpq_div(t, t, d);
      mpq_clear(d);
    }
    mpfr_t f;
    mpfr_init2(f, 53);
    mpfr_set_q(f, t, MPFR_RNDN);
    const double out = mpfr_get_d(f, MPFR_RNDN);
    mpfr_clear(f);
    mpq_clear(t);
    return out;
  }

 private:
  mpq_t q_;
};

struct Bucket {
  uint64_t records = 0;
  Rational total;
  double lo = INFINITY;
  double hi = -INFINITY;
  std::set<std::string> owners;
  std::vector<uint64_t> bins;
  std::vector<std::set<std::string>> bin_owners;
};

}  // namespace

absl::StatusOr<Json> OracleEvaluate(const Fixture& fixture,
                                    std::string_view program,
                                    const OracleOptions& options) {
  COOP_ASSIGN_OR_RETURN(std::vector<Token> tokens, Lex(program));
  Reader reader(std::move(tokens));
  COOP_ASSIGN_OR_RETURN(Query q, reader.Program());

  size_t nbins = 0;
  if (q.agg == "histogram") {
    nbins = static_cast<size_t>(std::ceil((q.hi - q.lo) / q.width));
  }
  std::map<std::string, Bucket> cells;
  for (const FixtureMember& m : fixture.members) {
    if (options.scope && !options.scope->contains(m.alias)) continue;
    for (const FixtureStore& s : m.stores) {
      if (s.suspended) continue;
      for (const Json& rec : s.records) {
        Row row(rec, fixture.schema);
        if (q.where && !row.Holds(*q.where)) continue;
        double v = 0;
        if (q.arg) {
          v = row.Eval(*q.arg);
          if (!std::isfinite(v)) continue;
        }
        std::string key;
        if (q.key_kind == "field") {
          key = row.Raw(q.key_field).get<std::string>();
        } else if (q.key_kind == "bucket") {
          const double x = row.Field(q.key_field);
          double lower = std::floor(x / q.key_width) * q.key_width;
          if (lower == 0) lower = 0;
          key = Shortest(lower);
        } else if (q.key_kind == "geosector") {
          const Json& g = row.Raw(q.key_field);
          key = coop::StrCat(
              static_cast<int64_t>(std::floor(g["lat"].get<double>() / q.key_width)),
              ":",
              static_cast<int64_t>(std::floor(g["lon"].get<double>() / q.key_width)));
        }
        Bucket& b = cells[key];
        ++b.records;
        b.owners.insert(m.alias);
        if (q.agg == "sum" || q.agg == "mean") b.total.Add(v);
        if (q.agg == "min") b.lo = std::min(b.lo, v);
        if (q.agg == "max") b.hi = std::max(b.hi, v);
        if (q.agg == "histogram") {
          if (b.bins.empty()) {
            b.bins.assign(nbins, 0);
            b.bin_owners.resize(nbins);
          }
          if (v >= q.lo && v < q.hi) {
            size_t i = static_cast<size_t>(std::floor((v - q.lo) / q.width));
            if (i >= nbins) i = nbins - 1;
            ++b.bins[i];
            b.bin_owners[i].insert(m.alias);
          }
        }
      }
    }
  }

  const size_t k = static_cast<size_t>(options.k);
  auto render = [&](Json group, const Bucket* b) {
    if (b == nullptr || (!options.subject_release && b->owners.size() < k)) {
      return Json{{"group", group}, {"suppressed", true}};
    }
    Json values;
    if (q.agg == "count") values["count"] = b->records;
    if (q.agg == "sum") values["sum"] = b->total.Nearest();
    if (q.agg == "mean") values["mean"] = b->total.Nearest(b->records);
    if (q.agg == "min") values["min"] = b->lo;
    if (q.agg == "max") values["max"] = b->hi;
    if (q.agg == "histogram") {
      Json bins = Json::array();
      for (size_t i = 0; i < b->bins.size(); ++i) {
        const bool hide = !options.subject_release && b->bins[i] > 0 &&
                          b->bin_owners[i].size() < k;
        bins.push_back(hide ? Json(nullptr) : Json(b->bins[i]));
      }
      values["histogram"] = std::move(bins);
    }
    return Json{{"group", group}, {"values", values}, {"members", b->owners.size()}};
  };
  Json out = Json::array();
  if (q.key_kind.empty()) {
    auto it = cells.find("");
    out.push_back(render(nullptr, it == cells.end() ? nullptr : &it->second));
  } else {
    for (const auto& [key, b] : cells) out.push_back(render(key, &b));
  }
  return out;
}

std::optional<std::string> CompareCells(const Json& actual,
                                        const Json& expected,
                                        double mean_rel_tol) {
  if (!actual.is_array() || !expected.is_array()) return "not a cell list";
  if (actual.size() != expected.size()) {
    return coop::StrCat("cell count ", actual.size(), " != ", expected.size());
  }
  std::map<std::string, const Json*> by_group;
  for (const Json& c : actual) by_group[c["group"].dump()] = &c;
  for (const Json& e : expected) {
    const std::string g = e["group"].dump();
    auto it = by_group.find(g);
    if (it == by_group.end()) return coop::StrCat("missing group ", g);
    const Json& a = *it->second;
    const bool as = a.value("suppressed", false), es = e.value("suppressed", false);
    if (as != es) return coop::StrCat("group ", g, " suppression differs");
    if (es) {
      if (a.contains("values") || a.contains("members")) {
        return coop::StrCat("group ", g, " suppressed cell carries values");
      }
      continue;
    }
    if (a["members"] != e["members"]) {
      return coop::StrCat("group ", g, " members ", a["members"].dump(), " != ",
                          e["members"].dump());
    }
    for (const auto& [name, ev] : e["values"].items()) {
      if (!a["values"].contains(name)) return coop::StrCat("group ", g, " lacks ", name);
      const Json& av = a["values"][name];
      if (name == "mean") {
        const double x = av.get<double>(), y = ev.get<double>();
        const double err = y == 0 ? std::abs(x) : std::abs(x - y) / std::abs(y);
        if (!(err <= mean_rel_tol)) {
          return coop::StrCat("group ", g, " mean ", av.dump(), " vs ", ev.dump());
        }
      } else if (av != ev) {
        return coop::StrCat("group ", g, " ", name, " ", av.dump(), " vs ", ev.dump());
      }
    }
    if (a["values"].size() != e["values"].size()) {
      return coop::StrCat("group ", g, " has extra values");
    }
  }
  return std::nullopt;
}

}  // namespace coop::sim
