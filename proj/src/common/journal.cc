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

#include "coop/common/journal.h"

#include <unistd.h>

#include <fstream>
#include <sstream>
#include <string>

#include "coop/common/status.h"

namespace coop {

Journal::~Journal() {
  if (file_ != nullptr) std::fclose(file_);
}

absl::StatusOr<std::unique_ptr<Journal>> Journal::Open(
    const std::filesystem::path& path, bool sync_writes) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  auto journal = std::make_unique<Journal>();
  journal->file_ = std::fopen(path.c_str(), "ab");
  if (journal->file_ == nullptr) {
    return Internal("journal-open", path.string());
  }
  journal->path_ = path;
  journal->sync_ = sync_writes;
  return journal;
}

absl::Status Journal::Append(const Json& entry) {
  COOP_ASSIGN_OR_RETURN(std::string line, Canonicalize(entry));
  return AppendLine(line);
}

absl::Status Journal::AppendLine(std::string_view line) {
  std::lock_guard<std::mutex> lock(mu_);
  if (file_ == nullptr) return absl::OkStatus();
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fputc('\n', file_) == EOF || std::fflush(file_) != 0) {
    return Internal("journal-write", path_.string());
  }
  if (sync_ && ::fdatasync(::fileno(file_)) != 0) {
    return Internal("journal-sync", path_.string());
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Json>> Journal::ReadAll(
    const std::filesystem::path& path) {
  std::vector<Json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    COOP_ASSIGN_OR_RETURN(Json entry, ParseJson(line));
    out.push_back(std::move(entry));
  }
  return out;
}

absl::Status WriteFileAtomically(const std::filesystem::path& path,
                                 std::string_view bytes) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) return Internal("file-write", tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) return Internal("file-rename", path.string());
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return NotFound("file-missing", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace coop
