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

#include "coop/dsl/parser.h"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/strings/numbers.h"
#include "coop/common/strings.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "coop/common/status.h"

namespace coop::dsl {
namespace {

constexpr std::array<std::string_view, 14> kKeywords = {
    "aggregate", "subject", "groupby", "count",     "sum",
    "mean",      "min",     "max",     "histogram", "bucket",
    "geosector", "where",   "and",     "or"};

enum class Tok {
  kIdent,
  kNumber,
  kLParen,
  kRParen,
  kComma,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kLt,
  kLe,
  kGt,
  kGe,
  kEqEq,
  kNe,
  kEnd,
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string_view text;
  double number = 0;
  int line = 1;
  int column = 1;
  size_t offset = 0;
};

const std::vector<std::string> kFieldExprStart = {"identifier", "number",
                                                  "'('"};

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  std::optional<Program> Run() {
    if (!Lex()) return std::nullopt;
    return ParseProgram();
  }

  const std::optional<ParseError>& error() const { return error_; }

 private:
  // ---- lexing ----

  bool Lex() {
    int line = 1;
    int column = 1;
    size_t i = 0;
    auto push = [&](Tok kind, size_t len) {
      tokens_.push_back(
          Token{kind, source_.substr(i, len), 0, line, column, i});
      i += len;
      column += static_cast<int>(len);
    };
    while (i < source_.size()) {
      const char c = source_[i];
      if (c == '\n') {
        ++line;
        column = 1;
        ++i;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        ++column;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < source_.size() &&
               (std::isalnum(static_cast<unsigned char>(source_[j])) ||
                source_[j] == '_')) {
          ++j;
        }
        push(Tok::kIdent, j - i);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = ScanNumber(i);
        double value = 0;
        auto [ptr, ec] =
            std::from_chars(source_.data() + i, source_.data() + j, value);
        if (ec != std::errc() || ptr != source_.data() + j ||
            !std::isfinite(value)) {
          Fail(line, column, i, {"number"}, "malformed number");
          return false;
        }
        push(Tok::kNumber, j - i);
        tokens_.back().number = value;
        continue;
      }
      const char next = i + 1 < source_.size() ? source_[i + 1] : '\0';
      switch (c) {
        case '(': push(Tok::kLParen, 1); continue;
        case ')': push(Tok::kRParen, 1); continue;
        case ',': push(Tok::kComma, 1); continue;
        case '+': push(Tok::kPlus, 1); continue;
        case '-': push(Tok::kMinus, 1); continue;
        case '*': push(Tok::kStar, 1); continue;
        case '/': push(Tok::kSlash, 1); continue;
        case '<':
          push(next == '=' ? Tok::kLe : Tok::kLt, next == '=' ? 2 : 1);
          continue;
        case '>':
          push(next == '=' ? Tok::kGe : Tok::kGt, next == '=' ? 2 : 1);
          continue;
        case '=':
          if (next == '=') {
            push(Tok::kEqEq, 2);
            continue;
          }
          break;
        case '!':
          if (next == '=') {
            push(Tok::kNe, 2);
            continue;
          }
          break;
        default:
          break;
      }
      Fail(line, column, i, {},
           coop::StrCat("unexpected character '", std::string(1, c), "'"));
      return false;
    }
    tokens_.push_back(Token{Tok::kEnd, {}, 0, line, column, source_.size()});
    return true;
  }

  size_t ScanNumber(size_t i) const {
    auto digits = [&](size_t j) {
      while (j < source_.size() &&
             std::isdigit(static_cast<unsigned char>(source_[j]))) {
        ++j;
      }
      return j;
    };
    size_t j = digits(i);
    if (j + 1 < source_.size() && source_[j] == '.' &&
        std::isdigit(static_cast<unsigned char>(source_[j + 1]))) {
      j = digits(j + 1);
    }
    if (j < source_.size() && (source_[j] == 'e' || source_[j] == 'E')) {
      size_t k = j + 1;
      if (k < source_.size() && (source_[k] == '+' || source_[k] == '-')) ++k;
      if (k < source_.size() &&
          std::isdigit(static_cast<unsigned char>(source_[k]))) {
        j = digits(k);
      }
    }
    return j;
  }

  // ---- helpers ----

  const Token& Cur() const { return tokens_[pos_]; }
  const Token& Peek(size_t ahead = 1) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool At(Tok kind) const { return Cur().kind == kind; }
  bool AtWord(std::string_view word) const {
    return At(Tok::kIdent) && Cur().text == word;
  }

  // Keeps the failure that got furthest into the input.
  bool Fail(int line, int column, size_t offset,
            std::vector<std::string> expected, std::string message) {
    if (!error_ || offset > error_offset_) {
      error_ = ParseError{line, column, std::move(expected),
                          std::move(message)};
      error_offset_ = offset;
    }
    return false;
  }
  bool FailHere(std::vector<std::string> expected, std::string message) {
    return Fail(Cur().line, Cur().column, Cur().offset, std::move(expected),
                std::move(message));
  }

  bool Expect(Tok kind, std::string_view shown) {
    if (!At(kind)) {
      return FailHere({std::string(shown)}, coop::StrCat("expected ", shown));
    }
    ++pos_;
    return true;
  }

  Span SpanFrom(const Token& start) const {
    const Token& last = tokens_[pos_ == 0 ? 0 : pos_ - 1];
    size_t end = last.offset + last.text.size();
    return Span{start.line, start.column, start.offset,
                end > start.offset ? end - start.offset : 0};
  }

  // ---- grammar ----

  std::optional<Program> ParseProgram() {
    Program program;
    const Token& start = Cur();
    if (AtWord("aggregate")) {
      program.mode = Mode::kAggregate;
      ++pos_;
    } else if (AtWord("subject")) {
      program.mode = Mode::kSubject;
      ++pos_;
    }
    if (AtWord("groupby")) {
      ++pos_;
      if (!Expect(Tok::kLParen, "'('")) return std::nullopt;
      std::optional<GroupKey> key = ParseKey();
      if (!key) return std::nullopt;
      program.key = std::move(key);
      if (!Expect(Tok::kComma, "','")) return std::nullopt;
      if (AtWord("groupby")) {
        FailHere({"aggregate function"}, "nested groupby is not allowed");
        return std::nullopt;
      }
      std::optional<Aggregate> agg = ParseAggregate();
      if (!agg) return std::nullopt;
      program.agg = std::move(*agg);
      if (!Expect(Tok::kRParen, "')'")) return std::nullopt;
    } else {
      std::optional<Aggregate> agg = ParseAggregate();
      if (!agg) return std::nullopt;
      program.agg = std::move(*agg);
    }
    if (AtWord("where")) {
      ++pos_;
      PredPtr filter = ParseOr();
      if (!filter) return std::nullopt;
      program.filter = std::move(filter);
    }
    if (!At(Tok::kEnd)) {
      FailHere({"'where'", "end of input"},
               "expected 'where' or end of input");
      return std::nullopt;
    }
    program.span = SpanFrom(start);
    return program;
  }

  std::optional<GroupKey> ParseKey() {
    const Token& start = Cur();
    GroupKey key;
    if ((AtWord("bucket") || AtWord("geosector")) &&
        Peek().kind == Tok::kLParen) {
      key.kind = AtWord("bucket") ? GroupKey::Kind::kBucket
                                  : GroupKey::Kind::kGeoSector;
      pos_ += 2;
      std::optional<std::string> field = ParseFieldName();
      if (!field) return std::nullopt;
      key.field = std::move(*field);
      if (!Expect(Tok::kComma, "','")) return std::nullopt;
      std::optional<double> width = ParseSignedNumber();
      if (!width) return std::nullopt;
      key.width = *width;
      if (!Expect(Tok::kRParen, "')'")) return std::nullopt;
    } else if (At(Tok::kIdent) && !IsKeyword(Cur().text)) {
      key.kind = GroupKey::Kind::kField;
      key.field = std::string(Cur().text);
      ++pos_;
    } else {
      FailHere({"field", "'bucket'", "'geosector'"}, "expected group key");
      return std::nullopt;
    }
    key.span = SpanFrom(start);
    return key;
  }

  std::optional<std::string> ParseFieldName() {
    if (!At(Tok::kIdent) || IsKeyword(Cur().text)) {
      FailHere({"field"}, "expected field name");
      return std::nullopt;
    }
    return std::string(tokens_[pos_++].text);
  }

  std::optional<double> ParseSignedNumber() {
    bool negative = false;
    if (At(Tok::kMinus)) {
      negative = true;
      ++pos_;
    }
    if (!At(Tok::kNumber)) {
      FailHere({"number"}, "expected number");
      return std::nullopt;
    }
    double v = tokens_[pos_++].number;
    return negative ? -v : v;
  }

  std::optional<Aggregate> ParseAggregate() {
    const Token& start = Cur();
    Aggregate agg;
    static constexpr std::array<std::pair<std::string_view, AggKind>, 6>
        kAggs = {{{"count", AggKind::kCount},
                  {"sum", AggKind::kSum},
                  {"mean", AggKind::kMean},
                  {"min", AggKind::kMin},
                  {"max", AggKind::kMax},
                  {"histogram", AggKind::kHistogram}}};
    for (const auto& [word, kind] : kAggs) {
      if (!AtWord(word)) continue;
      agg.kind = kind;
      ++pos_;
      if (!Expect(Tok::kLParen, "'('")) return std::nullopt;
      if (kind != AggKind::kCount) {
        agg.arg = ParseAdditive();
        if (!agg.arg) return std::nullopt;
      }
      if (kind == AggKind::kHistogram) {
        for (double* slot : {&agg.lo, &agg.hi, &agg.width}) {
          if (!Expect(Tok::kComma, "','")) return std::nullopt;
          std::optional<double> v = ParseSignedNumber();
          if (!v) return std::nullopt;
          *slot = *v;
        }
      }
      if (!Expect(Tok::kRParen, "')'")) return std::nullopt;
      agg.span = SpanFrom(start);
      return agg;
    }
    if (!StartsFieldExpr()) {
      FailHere({"aggregate function", "field expression"},
               "expected aggregate expression");
      return std::nullopt;
    }
    agg.kind = AggKind::kProjection;
    agg.arg = ParseAdditive();
    if (!agg.arg) return std::nullopt;
    agg.span = SpanFrom(start);
    return agg;
  }

  bool StartsFieldExpr() const {
    return (At(Tok::kIdent) && !IsKeyword(Cur().text)) || At(Tok::kNumber) ||
           At(Tok::kLParen) || At(Tok::kMinus);
  }

  ExprPtr MakeBinary(char op, ExprPtr lhs, ExprPtr rhs, const Token& start) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::kBinary;
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->span = SpanFrom(start);
    return e;
  }

  ExprPtr ParseAdditive() {
    const Token& start = Cur();
    ExprPtr lhs = ParseTerm();
    while (lhs && (At(Tok::kPlus) || At(Tok::kMinus))) {
      char op = At(Tok::kPlus) ? '+' : '-';
      ++pos_;
      ExprPtr rhs = ParseTerm();
      if (!rhs) return nullptr;
      lhs = MakeBinary(op, std::move(lhs), std::move(rhs), start);
    }
    return lhs;
  }

  ExprPtr ParseTerm() {
    const Token& start = Cur();
    ExprPtr lhs = ParsePrimary();
    while (lhs && (At(Tok::kStar) || At(Tok::kSlash))) {
      char op = At(Tok::kStar) ? '*' : '/';
      ++pos_;
      ExprPtr rhs = ParsePrimary();
      if (!rhs) return nullptr;
      lhs = MakeBinary(op, std::move(lhs), std::move(rhs), start);
    }
    return lhs;
  }

  ExprPtr ParsePrimary() {
    const Token& start = Cur();
    auto e = std::make_shared<Expr>();
    if (At(Tok::kIdent) && !IsKeyword(Cur().text)) {
      e->kind = Expr::Kind::kField;
      e->field = std::string(Cur().text);
      ++pos_;
    } else if (At(Tok::kNumber) ||
               (At(Tok::kMinus) && Peek().kind == Tok::kNumber)) {
      std::optional<double> v = ParseSignedNumber();
      e->kind = Expr::Kind::kNumber;
      e->number = *v;
    } else if (At(Tok::kLParen)) {
      ++pos_;
      ExprPtr inner = ParseAdditive();
      if (!inner || !Expect(Tok::kRParen, "')'")) return nullptr;
      return inner;
    } else {
      FailHere(kFieldExprStart, "expected field expression");
      return nullptr;
    }
    e->span = SpanFrom(start);
    return e;
  }

  PredPtr MakeLogical(Pred::Kind kind, PredPtr l, PredPtr r,
                      const Token& start) {
    auto p = std::make_shared<Pred>();
    p->kind = kind;
    p->left = std::move(l);
    p->right = std::move(r);
    p->span = SpanFrom(start);
    return p;
  }

  PredPtr ParseOr() {
    const Token& start = Cur();
    PredPtr lhs = ParseAnd();
    while (lhs && AtWord("or")) {
      ++pos_;
      PredPtr rhs = ParseAnd();
      if (!rhs) return nullptr;
      lhs = MakeLogical(Pred::Kind::kOr, std::move(lhs), std::move(rhs), start);
    }
    return lhs;
  }

  PredPtr ParseAnd() {
    const Token& start = Cur();
    PredPtr lhs = ParsePredPrimary();
    while (lhs && AtWord("and")) {
      ++pos_;
      PredPtr rhs = ParsePredPrimary();
      if (!rhs) return nullptr;
      lhs =
          MakeLogical(Pred::Kind::kAnd, std::move(lhs), std::move(rhs), start);
    }
    return lhs;
  }

  PredPtr ParsePredPrimary() {
    if (At(Tok::kLParen)) {
      // "(" may open a parenthesized predicate or a field expression that
      // starts a comparison; try the predicate reading first.
      const size_t saved = pos_;
      ++pos_;
      PredPtr inner = ParseOr();
      if (inner && At(Tok::kRParen)) {
        ++pos_;
        return inner;
      }
      pos_ = saved;
    }
    return ParseCompare();
  }

  PredPtr ParseCompare() {
    const Token& start = Cur();
    ExprPtr lhs = ParseAdditive();
    if (!lhs) return nullptr;
    static constexpr std::array<std::pair<Tok, CompareOp>, 6> kOps = {{
        {Tok::kLt, CompareOp::kLt},
        {Tok::kLe, CompareOp::kLe},
        {Tok::kGt, CompareOp::kGt},
        {Tok::kGe, CompareOp::kGe},
        {Tok::kEqEq, CompareOp::kEq},
        {Tok::kNe, CompareOp::kNe},
    }};
    std::optional<CompareOp> op;
    for (const auto& [tok, cmp] : kOps) {
      if (At(tok)) op = cmp;
    }
    if (!op) {
      FailHere({"'<'", "'<='", "'>'", "'>='", "'=='", "'!='"},
               "expected comparison operator");
      return nullptr;
    }
    ++pos_;
    ExprPtr rhs = ParseAdditive();
    if (!rhs) return nullptr;
    auto p = std::make_shared<Pred>();
    p->kind = Pred::Kind::kCompare;
    p->op = *op;
    p->lhs = std::move(lhs);
    p->rhs = std::move(rhs);
    p->span = SpanFrom(start);
    return p;
  }

  std::string_view source_;
  std::vector<Token> tokens_;
  size_t pos_ = 0;
  std::optional<ParseError> error_;
  size_t error_offset_ = 0;
};

constexpr char kExpectedSep = '\x1f';

}  // namespace

std::string ParseError::ToString() const {
  std::string out = coop::StrCat(line, ":", column, ": ", message);
  if (!expected.empty()) {
    coop::StrAppend(&out, " (expected one of: ", absl::StrJoin(expected, ", "),
                    ")");
  }
  return out;
}

bool IsKeyword(std::string_view word) {
  for (std::string_view k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

absl::StatusOr<Program> Parse(std::string_view source) {
  Parser parser(source);
  std::optional<Program> program = parser.Run();
  if (program) return *std::move(program);
  const ParseError& err = *parser.error();
  absl::Status status = InvalidArgument("parse-error", err.ToString());
  SetDetail(status, "line", std::to_string(err.line));
  SetDetail(status, "column", std::to_string(err.column));
  SetDetail(status, "expected",
            absl::StrJoin(err.expected, std::string(1, kExpectedSep)));
  SetDetail(status, "message", err.message);
  return status;
}

std::optional<ParseError> ParseErrorOf(const absl::Status& status) {
  if (ErrorSlug(status) != "parse-error") return std::nullopt;
  ParseError err;
  if (!absl::SimpleAtoi(GetDetail(status, "line"), &err.line) ||
      !absl::SimpleAtoi(GetDetail(status, "column"), &err.column)) {
    return std::nullopt;
  }
  std::string expected = GetDetail(status, "expected");
  if (!expected.empty()) {
    err.expected = absl::StrSplit(expected, kExpectedSep);
  }
  err.message = GetDetail(status, "message");
  return err;
}

}  // namespace coop::dsl
