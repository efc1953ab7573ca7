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

#ifndef COOP_COMMON_IDS_H_
#define COOP_COMMON_IDS_H_

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

namespace coop {

// Source of entity identifiers (stores, records, sessions, grants, ...).
// Bearer secrets such as access tokens never come from here.
class IdSource {
 public:
  virtual ~IdSource() = default;
  virtual std::string Next(std::string_view prefix) = 0;
};

// 64 random bits, hex.
class RandomIdSource final : public IdSource {
 public:
  std::string Next(std::string_view prefix) override;
};

// prefix-000001, prefix-000002, ...; used by the simulator so that scenario
// reports are byte-stable.
class SequentialIdSource final : public IdSource {
 public:
  std::string Next(std::string_view prefix) override;

 private:
  std::atomic<uint64_t> counter_{0};
};

}  // namespace coop

#endif  // COOP_COMMON_IDS_H_
