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

#include "coop/common/clock.h"

#include <string>

#include "absl/time/clock.h"
#include "absl/time/time.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop {
namespace {
constexpr char kRfc3339Seconds[] = "%Y-%m-%d%ET%H:%M:%SZ";
}  // namespace

Timestamp SystemClock::Now() const { return absl::ToUnixSeconds(absl::Now()); }

std::string FormatTimestamp(Timestamp t) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", absl::FromUnixSeconds(t),
                          absl::UTCTimeZone());
}

absl::StatusOr<Timestamp> ParseTimestamp(std::string_view text) {
  absl::Time parsed;
  std::string err;
  // Only the canonical form is accepted so timestamps stay bit-exact.
  if (text.size() != 20 ||
      !absl::ParseTime(kRfc3339Seconds, AbslView(text), absl::UTCTimeZone(), &parsed,
                       &err)) {
    return InvalidArgument("bad-timestamp", text);
  }
  return absl::ToUnixSeconds(parsed);
}

}  // namespace coop
