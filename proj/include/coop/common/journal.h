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

#ifndef COOP_COMMON_JOURNAL_H_
#define COOP_COMMON_JOURNAL_H_

#include <cstdio>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"

namespace coop {

// Append-only JSON-lines file. A default-constructed journal is detached and
// drops writes, which is how services run without a persistence directory.
class Journal {
 public:
  Journal() = default;
  ~Journal();
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  static absl::StatusOr<std::unique_ptr<Journal>> Open(
      const std::filesystem::path& path, bool sync_writes);

  // Durable (fdatasync) before returning when sync_writes was requested.
  absl::Status Append(const Json& entry);
  absl::Status AppendLine(std::string_view line);

  bool attached() const { return file_ != nullptr; }
  const std::filesystem::path& path() const { return path_; }

  // Every line of `path`, parsed; a missing file reads as empty.
  static absl::StatusOr<std::vector<Json>> ReadAll(
      const std::filesystem::path& path);

 private:
  std::mutex mu_;
  std::FILE* file_ = nullptr;
  std::filesystem::path path_;
  bool sync_ = false;
};

// Writes `bytes` to `path` via a temp file and rename.
absl::Status WriteFileAtomically(const std::filesystem::path& path,
                                 std::string_view bytes);
absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);

}  // namespace coop

#endif  // COOP_COMMON_JOURNAL_H_
