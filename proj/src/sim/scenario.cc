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

#include "coop/sim/scenario.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "coop/common/canonical_json.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"
#include "coop/node/config.h"
#include "coop/sim/fixture.h"
#include "coop/sim/harness.h"
#include "coop/sim/oracle.h"

namespace coop::sim {
namespace {

using Args = std::vector<std::string>;

std::string FormatNumber(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, end) : "nan";
}

std::string Render(const Json& v) {
  if (v.is_number_float()) return FormatNumber(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string GroupName(const Json& cell) {
  return cell["group"].is_null() ? "(all)" : cell["group"].get<std::string>();
}

// Splits `key=value` options off positional words.
struct Words {
  Args positional;
  std::map<std::string, std::string> options;
  std::set<std::string> flags;
};

Words Classify(const Args& args, size_t positional_count) {
  Words w;
  for (size_t i = 0; i < args.size(); ++i) {
    if (i < positional_count) {
      w.positional.push_back(args[i]);
      continue;
    }
    const size_t eq = args[i].find('=');
    if (eq == std::string::npos) {
      w.flags.insert(args[i]);
    } else {
      w.options[args[i].substr(0, eq)] = args[i].substr(eq + 1);
    }
  }
  return w;
}

absl::StatusOr<AlgoRef> ParseAlgo(const std::string& text) {
  const size_t at = text.rfind('@');
  AlgoRef ref;
  if (at == std::string::npos ||
      !absl::SimpleAtoi(AbslView(std::string_view(text).substr(at + 1)),
                        &ref.version)) {
    return InvalidArgument("bad-algo", text);
  }
  ref.algo_id = text.substr(0, at);
  return ref;
}

absl::StatusOr<int> ParseInt(const std::string& text) {
  int v = 0;
  if (!absl::SimpleAtoi(AbslView(text), &v)) return InvalidArgument("bad-integer", text);
  return v;
}

absl::StatusOr<double> ParseDouble(const std::string& text) {
  double v = 0;
  if (!absl::SimpleAtod(AbslView(text), &v)) return InvalidArgument("bad-number", text);
  return v;
}

// Approximate equality used only for means; counts and sums compare exactly.
bool NumbersMatch(const std::string& agg, double actual, double expected) {
  if (agg != "mean") return actual == expected;
  const double scale = std::max(std::fabs(actual), std::fabs(expected));
  return std::fabs(actual - expected) <= 1e-12 * scale;
}

class Runner {
 public:
  explicit Runner(std::string name) { report_.name = std::move(name); }

  absl::Status Line(int number, const Args& args);
  ScenarioReport Finish() {
    CloseAction();
    return std::move(report_);
  }

 private:
  struct Algo {
    AlgoRef ref;
    std::string mode;
    std::string source;
  };
  struct Outcome {
    std::string kind;
    absl::Status status;
    Json result;  // action-specific
    std::optional<OracleOptions> oracle;
    std::string program;
    bool error_checked = false;
  };

  absl::Status EnsureNode();
  absl::Status Action(const Args& args);
  absl::Status Expect(const Args& args);
  void CloseAction();
  void Check(bool pass, const std::string& what, const std::string& actual = "");
  void Say(std::string line) { report_.lines.push_back(std::move(line)); }

  absl::StatusOr<Json> ScopeJson(const std::string& text, OracleOptions* oracle);
  absl::StatusOr<const Algo*> FindAlgo(const std::string& text);
  absl::StatusOr<std::string> PrincipalOrAny(const std::string& alias);
  absl::StatusOr<Json> WireValue(FieldKind kind, const std::string& text);
  void Table(const Json& cells);

  ScenarioReport report_;
  Harness::Options options_;
  uint64_t fixture_seed_ = 1;
  std::unique_ptr<Harness> harness_;
  std::optional<Fixture> fixture_;
  std::map<std::string, std::vector<std::string>> stores_;
  std::map<std::string, Algo> algos_;
  std::map<std::string, std::string> tokens_;
  std::vector<std::string> documents_;
  std::optional<Outcome> last_;
  int step_ = 0;
};

void Runner::Check(bool pass, const std::string& what, const std::string& actual) {
  ++report_.expectations;
  if (!pass) ++report_.failures;
  std::string line = coop::StrCat("    ", pass ? "PASS " : "FAIL ", what);
  if (!pass && !actual.empty()) coop::StrAppend(&line, " (actual ", actual, ")");
  Say(std::move(line));
}

void Runner::CloseAction() {
  if (last_ && !last_->status.ok() && !last_->error_checked) {
    Check(false, "action succeeds", std::string(ErrorSlug(last_->status)));
  }
  last_.reset();
}

absl::Status Runner::EnsureNode() {
  if (harness_) return absl::OkStatus();
  COOP_ASSIGN_OR_RETURN(harness_, Harness::Create(options_));
  return absl::OkStatus();
}

absl::StatusOr<const Runner::Algo*> Runner::FindAlgo(const std::string& text) {
  auto it = algos_.find(text);
  if (it == algos_.end()) return InvalidArgument("unregistered-algorithm", text);
  return &it->second;
}

absl::StatusOr<std::string> Runner::PrincipalOrAny(const std::string& alias) {
  if (alias == "any") return std::string("any");
  if (!harness_->Known(alias)) return InvalidArgument("unknown-alias", alias);
  return harness_->IdOf(alias);
}

absl::StatusOr<Json> Runner::ScopeJson(const std::string& text,
                                       OracleOptions* oracle) {
  if (text == "all") return Json{{"kind", "all-members"}};
  if (absl::StartsWith(AbslView(text), "subject:")) {
    const std::string alias = text.substr(8);
    if (!harness_->Known(alias)) return InvalidArgument("unknown-alias", alias);
    oracle->scope = std::set<std::string>{alias};
    oracle->subject_release = true;
    return Json{{"kind", "single-subject"}, {"subject", harness_->IdOf(alias)}};
  }
  if (absl::StartsWith(AbslView(text), "members:")) {
    Json ids = Json::array();
    std::set<std::string> aliases;
    for (absl::string_view a : absl::StrSplit(AbslView(text).substr(8), ',')) {
      const std::string alias(a);
      if (!harness_->Known(alias)) return InvalidArgument("unknown-alias", alias);
      ids.push_back(harness_->IdOf(alias));
      aliases.insert(alias);
    }
    oracle->scope = std::move(aliases);
    return Json{{"kind", "member-set"}, {"members", std::move(ids)}};
  }
  return InvalidArgument("bad-scope", text);
}

absl::StatusOr<Json> Runner::WireValue(FieldKind kind, const std::string& text) {
  switch (kind) {
    case FieldKind::kNumber: {
      COOP_ASSIGN_OR_RETURN(double v, ParseDouble(text));
      return Json(v);
    }
    case FieldKind::kText:
    case FieldKind::kTimestamp:
      return Json(text);
    case FieldKind::kGeo: {
      std::vector<std::string> parts = absl::StrSplit(AbslView(text), ',');
      if (parts.size() != 2) return InvalidArgument("bad-geo", text);
      COOP_ASSIGN_OR_RETURN(double lat, ParseDouble(parts[0]));
      COOP_ASSIGN_OR_RETURN(double lon, ParseDouble(parts[1]));
      return Json{{"lat", lat}, {"lon", lon}};
    }
  }
  return InvalidArgument("bad-kind");
}

void Runner::Table(const Json& cells) {
  for (const Json& cell : cells) {
    std::string line = coop::StrCat("      ", GroupName(cell), ":");
    if (cell.value("suppressed", false)) {
      coop::StrAppend(&line, " suppressed");
    } else {
      coop::StrAppend(&line, " members=", cell["members"].dump());
      for (const auto& [agg, v] : cell["values"].items()) {
        coop::StrAppend(&line, " ", agg, "=", Render(v));
      }
    }
    Say(std::move(line));
  }
}

absl::Status Runner::Line(int number, const Args& args) {
  if (args.empty()) return absl::OkStatus();
  absl::Status s = args[0] == "expect" ? Expect(args) : Action(args);
  if (s.ok()) return s;
  return InvalidArgument("scenario-line",
                         coop::StrCat("line ", number, ": ", s.message()));
}

absl::Status Runner::Action(const Args& args) {
  const std::string& verb = args[0];
  // Settings.
  if (verb == "name" || verb == "seed" || verb == "k" || verb == "stages" ||
      verb == "clock") {
    if (args.size() != 2) return InvalidArgument("arity", verb);
    if (harness_) return FailedPrecondition("setting-after-start", verb);
    if (verb == "name") {
      report_.name = args[1];
    } else if (verb == "seed") {
      COOP_ASSIGN_OR_RETURN(int seed, ParseInt(args[1]));
      options_.seed = static_cast<uint64_t>(seed);
      fixture_seed_ = options_.seed;
    } else if (verb == "k") {
      COOP_ASSIGN_OR_RETURN(options_.k, ParseInt(args[1]));
    } else if (verb == "stages") {
      COOP_ASSIGN_OR_RETURN(options_.stages, ParseInt(args[1]));
    } else {
      COOP_ASSIGN_OR_RETURN(options_.start, ParseTimestamp(args[1]));
    }
    return absl::OkStatus();
  }

  CloseAction();
  COOP_RETURN_IF_ERROR(EnsureNode());
  Harness& h = *harness_;
  Outcome out;
  out.kind = verb;
  std::string summary;
  auto need = [&](size_t n) -> absl::Status {
    if (args.size() < n + 1) return InvalidArgument("arity", verb);
    return absl::OkStatus();
  };

  if (verb == "advance-clock") {
    COOP_RETURN_IF_ERROR(need(1));
    COOP_ASSIGN_OR_RETURN(Duration d, node::ParseDuration(args[1]));
    h.clock().Advance(d);
  } else if (verb == "fixture") {
    COOP_RETURN_IF_ERROR(need(1));
    if (fixture_) return FailedPrecondition("second-fixture");
    Words w = Classify(args, 2);
    FixtureSpec spec;
    spec.preset = args[1];
    spec.seed = fixture_seed_;
    for (const auto& [key, value] : w.options) {
      if (key == "members") {
        COOP_ASSIGN_OR_RETURN(spec.members, ParseInt(value));
      } else if (key == "records") {
        std::vector<std::string> range = absl::StrSplit(AbslView(value), "..");
        COOP_ASSIGN_OR_RETURN(spec.min_records, ParseInt(range.front()));
        COOP_ASSIGN_OR_RETURN(spec.max_records, ParseInt(range.back()));
      } else if (key == "sectors") {
        for (absl::string_view n : absl::StrSplit(AbslView(value), ',')) {
          COOP_ASSIGN_OR_RETURN(int d, ParseInt(std::string(n)));
          spec.sector_drivers.push_back(d);
        }
      } else if (key == "sector-size") {
        COOP_ASSIGN_OR_RETURN(spec.sector_size, ParseDouble(value));
      } else if (key == "stores") {
        COOP_ASSIGN_OR_RETURN(spec.max_stores, ParseInt(value));
      } else if (key == "years") {
        COOP_ASSIGN_OR_RETURN(spec.years, ParseInt(value));
      } else if (key == "first-year") {
        COOP_ASSIGN_OR_RETURN(spec.first_year, ParseInt(value));
      } else {
        return InvalidArgument("unknown-fixture-option", key);
      }
    }
    COOP_ASSIGN_OR_RETURN(Fixture f, GenerateFixture(spec));
    absl::StatusOr<std::map<std::string, std::vector<std::string>>> stores =
        h.LoadFixture(f);
    out.status = stores.status();
    if (stores.ok()) {
      stores_ = *std::move(stores);
      summary = coop::StrCat(f.members.size(), " members, ", f.record_count(),
                             " records");
    }
    fixture_ = std::move(f);
  } else if (verb == "enroll") {
    COOP_RETURN_IF_ERROR(need(3));
    Words w = Classify(args, 4);
    std::optional<Role> role = RoleFromName(args[2]);
    if (!role) return InvalidArgument("bad-role", args[2]);
    const std::string birth = w.options.count("birth") ? w.options["birth"] : "";
    out.status = h.Enroll(args[1], *role, args[3], birth, w.flags.count("key") > 0)
                     .status();
  } else if (verb == "ingest") {
    COOP_RETURN_IF_ERROR(need(2));
    if (!fixture_) return FailedPrecondition("ingest-needs-fixture");
    Words w = Classify(args, 2);
    auto it = stores_.find(args[1]);
    if (it == stores_.end() || it->second.empty()) {
      return FailedPrecondition("member-has-no-store", args[1]);
    }
    Json record = Json::object();
    for (const FieldSpec& f : fixture_->schema) {
      auto v = w.options.find(f.name);
      if (v == w.options.end()) return InvalidArgument("missing-field", f.name);
      COOP_ASSIGN_OR_RETURN(record[f.name], WireValue(f.kind, v->second));
    }
    absl::StatusOr<Json> r = h.CallOk(
        args[1], "POST", coop::StrCat("/stores/", it->second.front(), "/records"),
        Json{{"records", Json::array({record})}});
    out.status = r.status();
    if (r.ok()) {
      for (FixtureMember& m : fixture_->members) {
        if (m.alias == args[1]) m.stores.front().records.push_back(record);
      }
    }
  } else if (verb == "suspend") {
    COOP_RETURN_IF_ERROR(need(1));
    for (const std::string& id : stores_[args[1]]) {
      absl::Status s = h.CallOk(args[1], "POST",
                                coop::StrCat("/stores/", id, "/suspend"),
                                Json::object())
                           .status();
      if (!s.ok()) out.status = s;
    }
    if (out.status.ok() && fixture_) {
      for (FixtureMember& m : fixture_->members) {
        if (m.alias != args[1]) continue;
        for (FixtureStore& s : m.stores) s.suspended = true;
      }
    }
  } else if (verb == "register") {
    COOP_RETURN_IF_ERROR(need(3));
    Words w = Classify(args, 4);
    COOP_ASSIGN_OR_RETURN(AlgoRef ref, ParseAlgo(args[1]));
    std::vector<FieldSpec> fields;
    for (absl::string_view f : absl::StrSplit(AbslView(w.options["fields"]), ',',
                                              absl::SkipEmpty())) {
      std::vector<std::string> parts = absl::StrSplit(f, ':');
      std::optional<FieldKind> kind =
          parts.size() == 2 ? FieldKindFromName(parts[1]) : std::nullopt;
      if (!kind) return InvalidArgument("bad-field", std::string(f));
      fields.push_back({parts[0], *kind, ""});
    }
    std::vector<std::string> purposes = absl::StrSplit(
        AbslView(w.options["purposes"]), ',', absl::SkipEmpty());
    absl::StatusOr<AlgoRef> r =
        h.Register(ref.algo_id, ref.version, args[2], args[3], fields, purposes,
                   w.options["title"], w.options["lay"]);
    out.status = r.status();
    if (r.ok()) algos_[args[1]] = Algo{ref, args[2], args[3]};
  } else if (verb == "handshake") {
    COOP_RETURN_IF_ERROR(need(5));
    COOP_ASSIGN_OR_RETURN(const Algo* algo, FindAlgo(args[3]));
    OracleOptions ignored;
    COOP_ASSIGN_OR_RETURN(Json scope, ScopeJson(args[4], &ignored));
    absl::StatusOr<std::string> token = h.Handshake(
        args[1], args[2] == "-" ? "" : args[2], algo->ref, scope, args[5]);
    out.status = token.status();
    if (token.ok()) {
      tokens_[args[1]] = *token;
      summary = "bound";
    }
  } else if (verb == "execute") {
    COOP_RETURN_IF_ERROR(need(4));
    COOP_ASSIGN_OR_RETURN(const Algo* algo, FindAlgo(args[2]));
    OracleOptions oracle;
    oracle.k = options_.k;
    COOP_ASSIGN_OR_RETURN(Json scope, ScopeJson(args[3], &oracle));
    absl::StatusOr<Json> r =
        h.Execute(args[1], tokens_[args[1]], algo->ref, scope, args[4]);
    out.status = r.status();
    if (r.ok()) {
      out.result = (*r)["cells"];
      out.oracle = oracle;
      out.program = algo->source;
      summary = coop::StrCat(out.result.size(), " cells");
    }
  } else if (verb == "grant") {
    COOP_RETURN_IF_ERROR(need(5));
    COOP_ASSIGN_OR_RETURN(const Algo* algo, FindAlgo(args[2]));
    COOP_ASSIGN_OR_RETURN(std::string audience, PrincipalOrAny(args[4]));
    COOP_ASSIGN_OR_RETURN(Duration d, node::ParseDuration(args[5]));
    out.status = h.Grant(args[1], algo->ref, args[3], audience, d).status();
  } else if (verb == "withdraw") {
    COOP_RETURN_IF_ERROR(need(2));
    COOP_ASSIGN_OR_RETURN(const Algo* algo, FindAlgo(args[2]));
    absl::StatusOr<Json> grants = h.CallOk(args[1], "GET", "/consent/grants");
    out.status = grants.status();
    if (grants.ok()) {
      int withdrawn = 0;
      for (const Json& g : *grants) {
        if (g["state"] != "active" || g["algo"] != AlgoRefToJson(algo->ref)) continue;
        absl::StatusOr<Json> r = h.CallOk(
            args[1], "POST",
            coop::StrCat("/consent/", g["grant_id"].get<std::string>(), "/withdraw"),
            Json::object());
        if (!r.ok()) {
          out.status = r.status();
          break;
        }
        ++withdrawn;
        out.result["revoked"] =
            out.result.value("revoked", 0) + (*r)["revoked_tokens"].get<int>();
      }
      summary = coop::StrCat(withdrawn, " withdrawn");
    }
  } else if (verb == "issue" || verb == "reissue") {
    COOP_RETURN_IF_ERROR(need(verb == "issue" ? 5 : 6));
    Words w = Classify(args, 6);
    COOP_ASSIGN_OR_RETURN(const Algo* algo, FindAlgo(args[2]));
    COOP_ASSIGN_OR_RETURN(std::string audience, PrincipalOrAny(args[4]));
    COOP_ASSIGN_OR_RETURN(Duration validity, node::ParseDuration(args[5]));
    int n = 1;
    if (verb == "reissue") {
      COOP_ASSIGN_OR_RETURN(n, ParseInt(args[6]));
    }
    documents_.clear();
    out.result = Json::array();
    OracleOptions oracle;
    oracle.scope = std::set<std::string>{args[1]};
    oracle.subject_release = true;
    out.oracle = oracle;
    out.program = algo->source;
    for (int i = 0; i < n; ++i) {
      absl::StatusOr<Json> r = h.CallOk(
          args[1], "POST", "/assertions/issue",
          Json{{"algo", AlgoRefToJson(algo->ref)},
               {"purpose", args[3]},
               {"audience", audience},
               {"validity", validity},
               {"disclose_identity", w.flags.count("disclose") > 0}});
      if (!r.ok()) {
        out.status = r.status();
        break;
      }
      documents_.push_back((*r)["document"].get<std::string>());
      out.result.push_back(*std::move(r));
      if (i + 1 < n) h.clock().Advance(1);
    }
    summary = coop::StrCat(documents_.size(), " issued");
  } else if (verb == "static") {
    COOP_RETURN_IF_ERROR(need(2));
    Words w = Classify(args, 2);
    Json body{{"publish", w.flags.count("publish") > 0}};
    if (args[2] == "year-of-birth") {
      body["attribute"] = "year-of-birth";
    } else if (absl::StartsWith(AbslView(args[2]), "age-over-")) {
      body["attribute"] = "age-over";
      COOP_ASSIGN_OR_RETURN(int years, ParseInt(args[2].substr(9)));
      body["years"] = years;
    } else {
      return InvalidArgument("bad-attribute", args[2]);
    }
    absl::StatusOr<Json> r = h.CallOk(args[1], "POST", "/assertions/static", body);
    out.status = r.status();
    documents_.clear();
    if (r.ok()) {
      documents_.push_back((*r)["document"].get<std::string>());
      out.result = Json::array({*r});
    }
  } else if (verb == "verify") {
    COOP_RETURN_IF_ERROR(need(2));
    Words w = Classify(args, 3);
    if (documents_.empty()) return FailedPrecondition("no-document");
    Json body{{"document", documents_.back()}, {"purpose", args[2]}};
    if (w.options.count("at")) {
      const std::string& at = w.options["at"];
      COOP_ASSIGN_OR_RETURN(Json doc, ParseJson(documents_.back()));
      COOP_ASSIGN_OR_RETURN(
          Timestamp expires,
          ParseTimestamp(doc["payload"]["expires_at"].get<std::string>()));
      if (at == "expiry") {
        body["at"] = FormatTimestamp(expires);
      } else if (at == "before-expiry") {
        body["at"] = FormatTimestamp(expires - 1);
      } else {
        body["at"] = at;
      }
    }
    absl::StatusOr<Json> r = h.CallOk(args[1], "POST", "/assertions/verify", body);
    out.status = r.status();
    if (r.ok()) {
      out.result = *r;
      summary = r->value("valid", false)
                    ? "valid"
                    : coop::StrCat("invalid ", r->value("reason", ""));
    }
  } else if (verb == "receipt") {
    COOP_RETURN_IF_ERROR(need(1));
    if (documents_.empty()) return FailedPrecondition("no-document");
    COOP_ASSIGN_OR_RETURN(Json doc, ParseJson(documents_.back()));
    absl::StatusOr<Json> receipt = h.SignReceipt(args[1], documents_.back());
    out.status = receipt.status();
    if (receipt.ok()) {
      out.status =
          h.CallOk(args[1], "POST",
                   coop::StrCat("/assertions/",
                                doc["payload"]["assertion_id"].get<std::string>(),
                                "/receipt"),
                   *receipt)
              .status();
    }
  } else if (verb == "demonstrate") {
    COOP_RETURN_IF_ERROR(need(1));
    absl::StatusOr<Json> events = h.CallOk(args[1], "GET", "/audit/events");
    out.status = events.status();
    int total = 0, verified = 0;
    if (events.ok()) {
      for (const Json& e : *events) {
        if (e["event_type"] != "execution") continue;
        const Json& refs = e["refs"];
        if (!refs.contains("consent_seq") && !refs.contains("directive_seq")) continue;
        ++total;
        absl::StatusOr<Json> bundle =
            h.CallOk(args[1], "GET", "/audit/demonstrate", nullptr,
                     {{"execution", std::to_string(e["seq"].get<uint64_t>())}});
        if (bundle.ok() && bundle->value("verified", false)) ++verified;
      }
    }
    out.result = Json{{"demonstrated", total}, {"verified", verified}};
    summary = coop::StrCat(verified, "/", total, " bundles verify");
  } else {
    return InvalidArgument("unknown-action", verb);
  }

  ++step_;
  std::string line = coop::StrCat("[", step_, "] ", verb);
  for (size_t i = 1; i < args.size(); ++i) {
    const bool quote = args[i].find(' ') != std::string::npos;
    coop::StrAppend(&line, " ", quote ? "\"" : "", args[i], quote ? "\"" : "");
  }
  coop::StrAppend(&line, " -> ",
                  out.status.ok() ? "ok" : coop::StrCat("error ", ErrorSlug(out.status)));
  if (out.status.ok() && !summary.empty()) coop::StrAppend(&line, " (", summary, ")");
  Say(std::move(line));
  if (out.status.ok() && verb == "execute") Table(out.result);
  last_ = std::move(out);
  return absl::OkStatus();
}

absl::Status Runner::Expect(const Args& args) {
  if (!last_) return FailedPrecondition("expect-without-action");
  Outcome& o = *last_;
  const std::string slug = o.status.ok() ? "ok" : std::string(ErrorSlug(o.status));

  size_t first = 1;
  const Json* cell = nullptr;
  std::string cell_label;
  if (args.size() >= 3 && args[1] == "cell") {
    first = 3;
    cell_label = coop::StrCat("cell ", args[2], " ");
    if (o.status.ok() && o.result.is_array()) {
      for (const Json& c : o.result) {
        if (c.is_object() && c.contains("group") && GroupName(c) == args[2]) cell = &c;
      }
    }
    if (cell == nullptr) {
      Check(false, coop::StrCat("cell ", args[2], " present"), "absent");
      return absl::OkStatus();
    }
  }

  std::optional<Json> oracle_cells;
  auto oracle = [&]() -> const Json* {
    if (!oracle_cells && o.oracle && fixture_) {
      absl::StatusOr<Json> e = OracleEvaluate(*fixture_, o.program, *o.oracle);
      oracle_cells = e.ok() ? *e : Json(nullptr);
    }
    return oracle_cells && !oracle_cells->is_null() ? &*oracle_cells : nullptr;
  };
  auto count_cells = [&](int which) {
    int n = 0;
    if (!o.result.is_array()) return n;
    for (const Json& c : o.result) {
      const bool s = c.value("suppressed", false);
      n += which == 0 || (which == 1 && !s) || (which == 2 && s);
    }
    return n;
  };

  for (size_t i = first; i < args.size(); ++i) {
    const std::string& m = args[i];
    const size_t eq = m.find('=');
    const std::string key = m.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : m.substr(eq + 1);
    const std::string label = coop::StrCat(cell_label, m);

    if (m == "ok") {
      o.error_checked = true;
      Check(o.status.ok(), label, slug);
    } else if (key == "error") {
      o.error_checked = true;
      Check(!o.status.ok() && slug == value, label, slug);
    } else if (!o.status.ok()) {
      Check(false, label, slug);
    } else if (cell != nullptr && m == "suppressed") {
      Check(cell->value("suppressed", false), label, "released");
    } else if (cell != nullptr && m == "released") {
      Check(!cell->value("suppressed", false), label, "suppressed");
    } else if (cell != nullptr && key == "members") {
      const std::string actual =
          cell->contains("members") ? (*cell)["members"].dump() : "none";
      Check(actual == value, label, actual);
    } else if (cell != nullptr && eq != std::string::npos) {
      if (cell->value("suppressed", false) || !(*cell)["values"].contains(key)) {
        Check(false, label, "no value");
        continue;
      }
      const Json& actual = (*cell)["values"][key];
      if (value == "oracle") {
        const Json* expected = oracle();
        const Json* match = nullptr;
        if (expected) {
          for (const Json& c : *expected) {
            if (c["group"] == (*cell)["group"]) match = &c;
          }
        }
        if (match == nullptr || match->value("suppressed", false)) {
          Check(false, label, "oracle has no value");
        } else {
          const Json& want = (*match)["values"][key];
          const bool pass = actual.is_number() && want.is_number()
                                ? NumbersMatch(key, actual.get<double>(),
                                               want.get<double>())
                                : actual == want;
          Check(pass, coop::StrCat(label, " ", Render(want)), Render(actual));
        }
      } else {
        absl::StatusOr<double> want = ParseDouble(value);
        const bool pass = want.ok() && actual.is_number() &&
                          NumbersMatch(key, actual.get<double>(), *want);
        Check(pass, label, Render(actual));
      }
    } else if (key == "cells") {
      Check(std::to_string(count_cells(0)) == value, label,
            std::to_string(count_cells(0)));
    } else if (key == "released") {
      Check(std::to_string(count_cells(1)) == value, label,
            std::to_string(count_cells(1)));
    } else if (key == "suppressed") {
      Check(std::to_string(count_cells(2)) == value, label,
            std::to_string(count_cells(2)));
    } else if (m == "oracle") {
      const Json* expected = oracle();
      if (expected == nullptr) {
        Check(false, label, "oracle unavailable");
      } else if (!documents_.empty() && o.kind != "execute") {
        // Assertion results carry group and values only.
        Json want = Json::array();
        for (const Json& c : *expected) {
          want.push_back(Json{{"group", c["group"]}, {"values", c["values"]}});
        }
        std::string mismatch;
        for (const std::string& d : documents_) {
          absl::StatusOr<Json> doc = ParseJson(d);
          if (!doc.ok() || (*doc)["payload"]["result"] != want) {
            mismatch = doc.ok() ? (*doc)["payload"]["result"].dump() : "unparsable";
          }
        }
        Check(mismatch.empty(), label, mismatch);
      } else {
        std::optional<std::string> diff = CompareCells(o.result, *expected);
        Check(!diff, label, diff.value_or(""));
      }
    } else if (m == "valid") {
      Check(o.result.value("valid", false), label, o.result.value("reason", ""));
    } else if (key == "invalid") {
      Check(!o.result.value("valid", true) && o.result.value("reason", "") == value,
            label, o.result.value("valid", false) ? "valid" : o.result.value("reason", ""));
    } else if (key == "count") {
      Check(std::to_string(documents_.size()) == value, label,
            std::to_string(documents_.size()));
    } else if (key == "class") {
      bool pass = !o.result.empty();
      for (const Json& r : o.result) pass = pass && r.value("class", "") == value;
      Check(pass, label);
    } else if (m == "distinct-ids" || m == "same-result") {
      std::set<std::string> ids, issued;
      std::set<std::string> results;
      for (const std::string& d : documents_) {
        absl::StatusOr<Json> doc = ParseJson(d);
        if (!doc.ok()) continue;
        ids.insert((*doc)["payload"]["assertion_id"].get<std::string>());
        issued.insert((*doc)["payload"]["issued_at"].get<std::string>());
        results.insert((*doc)["payload"]["result"].dump());
      }
      if (m == "distinct-ids") {
        Check(!documents_.empty() && ids.size() == documents_.size() &&
                  issued.size() == documents_.size(),
              label);
      } else {
        Check(results.size() == 1, label,
              coop::StrCat(results.size(), " distinct results"));
      }
    } else if (m == "verified") {
      const int total = o.result.value("demonstrated", 0);
      Check(total > 0 && o.result.value("verified", 0) == total, label,
            coop::StrCat(o.result.value("verified", 0), "/", total));
    } else if (key == "demonstrated" || key == "revoked") {
      const std::string actual = std::to_string(o.result.value(key, 0));
      Check(actual == value, label, actual);
    } else {
      return InvalidArgument("unknown-matcher", m);
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string ScenarioReport::ToText() const {
  std::string out = coop::StrCat("scenario ", name, "\n");
  for (const std::string& l : lines) coop::StrAppend(&out, l, "\n");
  coop::StrAppend(&out, passed() ? "PASS " : "FAIL ", name, ": ",
                  expectations - failures, "/", expectations,
                  " expectations met\n");
  return out;
}

absl::StatusOr<std::vector<std::string>> SplitScenarioLine(std::string_view line) {
  std::vector<std::string> words;
  std::string current;
  bool in_word = false, quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      in_word = true;
    } else if (c == '#' && !in_word) {
      break;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      if (in_word) words.push_back(std::move(current));
      current.clear();
      in_word = false;
    } else {
      current.push_back(c);
      in_word = true;
    }
  }
  if (quoted) return InvalidArgument("unterminated-quote");
  if (in_word) words.push_back(std::move(current));
  return words;
}

absl::StatusOr<ScenarioReport> RunScenario(std::string_view text,
                                           std::string name) {
  Runner runner(std::move(name));
  int number = 0;
  for (absl::string_view raw : absl::StrSplit(AbslView(text), '\n')) {
    ++number;
    absl::StatusOr<std::vector<std::string>> words =
        SplitScenarioLine(std::string_view(raw.data(), raw.size()));
    if (!words.ok()) {
      return InvalidArgument("scenario-line",
                             coop::StrCat("line ", number, ": ", words.status().message()));
    }
    COOP_RETURN_IF_ERROR(runner.Line(number, *words));
  }
  return runner.Finish();
}

absl::StatusOr<ScenarioReport> RunScenarioFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return NotFound("scenario-file", path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return RunScenario(buffer.str(), path.stem().string());
}

std::vector<absl::StatusOr<ScenarioReport>> RunScenarioFiles(
    const std::vector<std::filesystem::path>& paths, bool parallel) {
  std::vector<absl::StatusOr<ScenarioReport>> out(
      paths.size(), absl::UnknownError("not run"));
  if (!parallel) {
    for (size_t i = 0; i < paths.size(); ++i) out[i] = RunScenarioFile(paths[i]);
    return out;
  }
  std::vector<std::thread> threads;
  for (size_t i = 0; i < paths.size(); ++i) {
    threads.emplace_back([&, i] { out[i] = RunScenarioFile(paths[i]); });
  }
  for (std::thread& t : threads) t.join();
  return out;
}

}  // namespace coop::sim
