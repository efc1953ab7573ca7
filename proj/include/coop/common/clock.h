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

#ifndef COOP_COMMON_CLOCK_H_
#define COOP_COMMON_CLOCK_H_

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace coop {

// Whole seconds since the Unix epoch, UTC. All protocol timestamps have
// seconds precision.
using Timestamp = int64_t;
using Duration = int64_t;  // seconds

inline constexpr Duration kMinute = 60;
inline constexpr Duration kHour = 60 * kMinute;
inline constexpr Duration kDay = 24 * kHour;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp Now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp Now() const override;
};

// Test and simulation clock; only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start) : now_(start) {}
  Timestamp Now() const override { return now_.load(); }
  void Set(Timestamp t) { now_.store(t); }
  void Advance(Duration d) { now_.fetch_add(d); }

 private:
  std::atomic<Timestamp> now_;
};

// RFC 3339 UTC with seconds precision, e.g. "2026-03-01T12:00:00Z".
std::string FormatTimestamp(Timestamp t);
absl::StatusOr<Timestamp> ParseTimestamp(std::string_view text);

}  // namespace coop

#endif  // COOP_COMMON_CLOCK_H_
