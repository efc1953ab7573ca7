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

#include "coop/audit/audit_log.h"

#include <algorithm>
#include <array>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::audit {
namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 9> kTypeNames = {{
    {EventType::kEnrollment, "enrollment"},
    {EventType::kStoreOp, "store-op"},
    {EventType::kVetting, "vetting"},
    {EventType::kSessionStage, "session-stage"},
    {EventType::kToken, "token"},
    {EventType::kConsent, "consent"},
    {EventType::kExecution, "execution"},
    {EventType::kAssertion, "assertion"},
    {EventType::kReceipt, "receipt"},
}};

constexpr std::array<std::string_view, 4> kAuthorizationRefs = {
    kRefConsentSeq, kRefDirectiveSeq, kRefSessionSeq, kRefTokenSeq};

}  // namespace

std::string_view EventTypeName(EventType type) {
  for (const auto& [t, name] : kTypeNames) {
    if (t == type) return name;
  }
  return "unknown";
}

std::optional<EventType> EventTypeFromName(std::string_view name) {
  for (const auto& [t, n] : kTypeNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

Json Event::BodyJson() const {
  Json refs_json = Json::object();
  for (const auto& [k, v] : refs) refs_json[k] = v;
  return Json{{"seq", seq},
              {"event_type", EventTypeName(type)},
              {"action", action},
              {"actor", actor},
              {"refs", std::move(refs_json)},
              {"at", FormatTimestamp(at)},
              {"prev_hash", prev_hash}};
}

Json Event::ToJson() const {
  Json j = BodyJson();
  j["this_hash"] = this_hash;
  return j;
}

absl::StatusOr<Event> Event::FromJson(const Json& json) {
  static constexpr std::array<std::string_view, 8> kFields = {
      "action", "actor",     "at",   "event_type",
      "prev_hash", "refs", "seq", "this_hash"};
  if (!json.is_object() || json.size() != kFields.size()) {
    return InvalidArgument("bad-audit-event");
  }
  for (std::string_view f : kFields) {
    if (!json.contains(f)) return InvalidArgument("bad-audit-event", f);
  }
  Event ev;
  try {
    if (!json["seq"].is_number_unsigned()) {
      return InvalidArgument("bad-audit-event", "seq");
    }
    ev.seq = json["seq"].get<uint64_t>();
    auto type = EventTypeFromName(json["event_type"].get<std::string>());
    if (!type) return InvalidArgument("bad-audit-event", "event_type");
    ev.type = *type;
    ev.action = json["action"].get<std::string>();
    ev.actor = json["actor"].get<std::string>();
    if (!json["refs"].is_object()) {
      return InvalidArgument("bad-audit-event", "refs");
    }
    for (const auto& [k, v] : json["refs"].items()) {
      ev.refs[k] = v.get<std::string>();
    }
    COOP_ASSIGN_OR_RETURN(ev.at, ParseTimestamp(json["at"].get<std::string>()));
    ev.prev_hash = json["prev_hash"].get<std::string>();
    ev.this_hash = json["this_hash"].get<std::string>();
  } catch (const Json::exception& e) {
    return InvalidArgument("bad-audit-event", e.what());
  }
  return ev;
}

std::string Event::ComputeHash() const {
  absl::StatusOr<std::string> body = Canonicalize(BodyJson());
  // Bodies only hold strings and integers, so canonicalization cannot fail.
  return crypto::Sha256Hex(*body + prev_hash);
}

bool Event::References(std::string_view principal) const {
  if (actor == principal) return true;
  for (const auto& [k, v] : refs) {
    if (v == principal) return true;
  }
  return false;
}

ChainVerdict VerifyChain(std::span<const Event> events, std::string_view anchor,
                         std::optional<uint64_t> first_seq) {
  if (events.empty()) return {};
  const uint64_t base = first_seq.value_or(events.front().seq);
  std::string_view expected_prev = anchor;
  for (size_t i = 0; i < events.size(); ++i) {
    const Event& ev = events[i];
    const uint64_t want_seq = base + i;
    if (ev.seq != want_seq || ev.prev_hash != expected_prev ||
        ev.ComputeHash() != ev.this_hash) {
      return {false, want_seq};
    }
    expected_prev = ev.this_hash;
  }
  return {};
}

ChainVerdict VerifyExportedChain(std::string_view jsonl,
                                 std::string_view anchor, uint64_t first_seq) {
  std::vector<Event> events;
  uint64_t index = 0;
  for (absl::string_view line : absl::StrSplit(AbslView(jsonl), '\n', absl::SkipEmpty())) {
    absl::StatusOr<Json> parsed = ParseJson(std::string_view(line.data(), line.size()));
    if (!parsed.ok()) return {false, first_seq + index};
    absl::StatusOr<Event> ev = Event::FromJson(*parsed);
    if (!ev.ok()) return {false, first_seq + index};
    events.push_back(*std::move(ev));
    ++index;
  }
  return VerifyChain(events, anchor, first_seq);
}

bool VerifyConsentBundle(const Json& bundle) {
  try {
    std::vector<Event> segment;
    for (const Json& e : bundle.at("segment")) {
      absl::StatusOr<Event> ev = Event::FromJson(e);
      if (!ev.ok()) return false;
      segment.push_back(*std::move(ev));
    }
    if (segment.empty()) return false;
    if (!VerifyChain(segment, bundle.at("anchor").get<std::string>()).ok) {
      return false;
    }
    absl::StatusOr<Event> execution = Event::FromJson(bundle.at("execution"));
    if (!execution.ok() || execution->type != EventType::kExecution ||
        execution->ToJson() != segment.back().ToJson()) {
      return false;
    }
    const Json& auths = bundle.at("authorization");
    if (!auths.is_array() || auths.empty()) return false;
    for (const Json& a : auths) {
      absl::StatusOr<Event> auth = Event::FromJson(a);
      if (!auth.ok() || auth->seq >= execution->seq ||
          auth->seq < segment.front().seq) {
        return false;
      }
      if (segment[auth->seq - segment.front().seq].ToJson() !=
          auth->ToJson()) {
        return false;
      }
    }
    const std::string subject = bundle.value("subject", "");
    auto it = execution->refs.find(kRefSubject);
    if (it != execution->refs.end() && it->second != subject) return false;
    return true;
  } catch (const Json::exception&) {
    return false;
  }
}

absl::StatusOr<std::unique_ptr<AuditLog>> AuditLog::Open(
    const std::filesystem::path& path, const Clock* clock, bool sync_writes) {
  std::vector<Event> existing;
  std::unique_ptr<Journal> journal;
  if (!path.empty()) {
    COOP_ASSIGN_OR_RETURN(std::vector<Json> lines, Journal::ReadAll(path));
    for (const Json& line : lines) {
      COOP_ASSIGN_OR_RETURN(Event ev, Event::FromJson(line));
      existing.push_back(std::move(ev));
    }
    ChainVerdict verdict = VerifyChain(existing, kGenesisHash, 0);
    if (!verdict.ok) {
      return Internal("audit-chain-broken",
                      std::to_string(verdict.break_at));
    }
    COOP_ASSIGN_OR_RETURN(journal, Journal::Open(path, sync_writes));
  } else {
    journal = std::make_unique<Journal>();
  }
  std::unique_ptr<AuditLog> log(new AuditLog(clock, std::move(journal)));
  log->events_ = std::move(existing);
  return log;
}

absl::StatusOr<uint64_t> AuditLog::Append(Entry entry) {
  std::unique_lock<std::shared_mutex> lock(mu_);
  Event ev;
  ev.seq = events_.size();
  ev.type = entry.type;
  ev.action = std::move(entry.action);
  ev.actor = std::move(entry.actor);
  ev.refs = std::move(entry.refs);
  ev.at = clock_->Now();
  ev.prev_hash =
      events_.empty() ? std::string(kGenesisHash) : events_.back().this_hash;
  ev.this_hash = ev.ComputeHash();
  COOP_RETURN_IF_ERROR(journal_->Append(ev.ToJson()));
  events_.push_back(std::move(ev));
  return events_.back().seq;
}

size_t AuditLog::size() const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  return events_.size();
}

std::optional<Event> AuditLog::Get(uint64_t seq) const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  if (seq >= events_.size()) return std::nullopt;
  return events_[seq];
}

std::vector<Event> AuditLog::Segment(uint64_t from,
                                     uint64_t to_inclusive) const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  if (events_.empty() || from > to_inclusive) return {};
  to_inclusive = std::min<uint64_t>(to_inclusive, events_.size() - 1);
  if (from > to_inclusive) return {};
  return {events_.begin() + from, events_.begin() + to_inclusive + 1};
}

std::vector<Event> AuditLog::Snapshot() const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  return events_;
}

std::vector<Event> AuditLog::EventsReferencing(
    std::string_view principal) const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  std::vector<Event> out;
  for (const Event& ev : events_) {
    if (ev.References(principal)) out.push_back(ev);
  }
  return out;
}

std::string AuditLog::AnchorFor(uint64_t seq) const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  if (seq == 0 || events_.empty()) return std::string(kGenesisHash);
  return events_[std::min<uint64_t>(seq, events_.size()) - 1].this_hash;
}

std::string AuditLog::ExportJsonLines(uint64_t from,
                                      uint64_t to_inclusive) const {
  std::string out;
  for (const Event& ev : Segment(from, to_inclusive)) {
    out += *Canonicalize(ev.ToJson());
    out += '\n';
  }
  return out;
}

absl::StatusOr<Json> AuditLog::DemonstrateConsent(
    std::string_view subject, uint64_t execution_seq) const {
  std::optional<Event> execution = Get(execution_seq);
  if (!execution || execution->type != EventType::kExecution) {
    return NotFound("execution-not-found", std::to_string(execution_seq));
  }
  auto subject_it = execution->refs.find(kRefSubject);
  if (subject_it != execution->refs.end() && subject_it->second != subject) {
    return PermissionDenied("subject-mismatch");
  }
  Json authorization = Json::array();
  uint64_t first = execution_seq;
  for (std::string_view key : kAuthorizationRefs) {
    auto it = execution->refs.find(std::string(key));
    if (it == execution->refs.end()) continue;
    uint64_t seq = 0;
    if (!absl::SimpleAtoi(it->second, &seq) || seq >= execution_seq) {
      return Internal("bad-authorization-ref", it->second);
    }
    std::optional<Event> auth = Get(seq);
    if (!auth) return Internal("dangling-authorization-ref", it->second);
    authorization.push_back(auth->ToJson());
    first = std::min(first, seq);
  }
  if (authorization.empty()) {
    return FailedPrecondition("no-authorization-recorded");
  }
  Json segment = Json::array();
  for (const Event& ev : Segment(first, execution_seq)) {
    segment.push_back(ev.ToJson());
  }
  return Json{{"subject", std::string(subject)},
              {"execution", execution->ToJson()},
              {"authorization", std::move(authorization)},
              {"anchor", AnchorFor(first)},
              {"segment", std::move(segment)}};
}

}  // namespace coop::audit
