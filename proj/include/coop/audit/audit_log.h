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

#ifndef COOP_AUDIT_AUDIT_LOG_H_
#define COOP_AUDIT_AUDIT_LOG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/journal.h"

namespace coop::audit {

enum class EventType {
  kEnrollment,
  kStoreOp,
  kVetting,
  kSessionStage,
  kToken,
  kConsent,
  kExecution,
  kAssertion,
  kReceipt,
};

std::string_view EventTypeName(EventType type);
std::optional<EventType> EventTypeFromName(std::string_view name);

// Hash of the (non-existent) event before seq 0.
inline constexpr std::string_view kGenesisHash =
    "0000000000000000000000000000000000000000000000000000000000000000";

// Well-known ref keys linking an execution to what authorized it.
inline constexpr char kRefConsentSeq[] = "consent_seq";
inline constexpr char kRefDirectiveSeq[] = "directive_seq";
inline constexpr char kRefSessionSeq[] = "session_seq";
inline constexpr char kRefTokenSeq[] = "token_seq";
inline constexpr char kRefSubject[] = "subject";

struct Entry {
  EventType type;
  std::string action;
  std::string actor;
  std::map<std::string, std::string> refs;
};

struct Event {
  uint64_t seq = 0;
  EventType type = EventType::kEnrollment;
  std::string action;
  std::string actor;
  std::map<std::string, std::string> refs;
  Timestamp at = 0;
  std::string prev_hash;
  std::string this_hash;

  // Without this_hash; the bytes that get hashed.
  Json BodyJson() const;
  Json ToJson() const;
  static absl::StatusOr<Event> FromJson(const Json& json);

  std::string ComputeHash() const;
  bool References(std::string_view principal) const;
};

struct ChainVerdict {
  bool ok = true;
  uint64_t break_at = 0;  // meaningful when !ok
};

// Checks density, linkage to `anchor` and every event hash.
ChainVerdict VerifyChain(std::span<const Event> events, std::string_view anchor,
                         std::optional<uint64_t> first_seq = std::nullopt);
// Same, over the JSON-lines export format.
ChainVerdict VerifyExportedChain(std::string_view jsonl,
                                 std::string_view anchor, uint64_t first_seq);

// Offline check of a bundle produced by DemonstrateConsent.
bool VerifyConsentBundle(const Json& bundle);

class AuditLog {
 public:
  // An empty `path` keeps the chain in memory only.
  static absl::StatusOr<std::unique_ptr<AuditLog>> Open(
      const std::filesystem::path& path, const Clock* clock, bool sync_writes);

  // Linearizable; the event is durable before this returns.
  absl::StatusOr<uint64_t> Append(Entry entry);

  size_t size() const;
  std::optional<Event> Get(uint64_t seq) const;
  std::vector<Event> Segment(uint64_t from, uint64_t to_inclusive) const;
  std::vector<Event> Snapshot() const;
  std::vector<Event> EventsReferencing(std::string_view principal) const;
  std::string AnchorFor(uint64_t seq) const;
  std::string ExportJsonLines(uint64_t from, uint64_t to_inclusive) const;

  // Proof that execution `execution_seq` was authorized: the execution
  // event, the consent/directive/session events it cites and the chain
  // segment linking them. `subject` must match for subject executions.
  absl::StatusOr<Json> DemonstrateConsent(std::string_view subject,
                                          uint64_t execution_seq) const;

 private:
  AuditLog(const Clock* clock, std::unique_ptr<Journal> journal)
      : clock_(clock), journal_(std::move(journal)) {}

  const Clock* clock_;
  std::unique_ptr<Journal> journal_;
  mutable std::shared_mutex mu_;
  std::vector<Event> events_;
};

}  // namespace coop::audit

#endif  // COOP_AUDIT_AUDIT_LOG_H_
