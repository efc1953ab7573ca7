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

#ifndef COOP_COMMON_STATUS_H_
#define COOP_COMMON_STATUS_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace coop {

// Every error produced by this project carries a short machine-readable slug
// (e.g. "store-suspended") as a payload, next to the human message.
inline constexpr std::string_view kErrorSlugUrl = "coop/error";

absl::Status MakeError(absl::StatusCode code, std::string_view slug,
                       std::string_view detail = {});

// Returns the slug attached to `status`, or "" when there is none.
std::string ErrorSlug(const absl::Status& status);

// Attaches an extra string payload (e.g. a consent-request handle).
void SetDetail(absl::Status& status, std::string_view key,
               std::string_view value);
std::string GetDetail(const absl::Status& status, std::string_view key);

inline absl::Status InvalidArgument(std::string_view slug,
                                    std::string_view detail = {}) {
  return MakeError(absl::StatusCode::kInvalidArgument, slug, detail);
}
inline absl::Status NotFound(std::string_view slug,
                             std::string_view detail = {}) {
  return MakeError(absl::StatusCode::kNotFound, slug, detail);
}
inline absl::Status PermissionDenied(std::string_view slug,
                                     std::string_view detail = {}) {
  return MakeError(absl::StatusCode::kPermissionDenied, slug, detail);
}
inline absl::Status Unauthenticated(std::string_view slug,
                                    std::string_view detail = {}) {
  return MakeError(absl::StatusCode::kUnauthenticated, slug, detail);
}
inline absl::Status FailedPrecondition(std::string_view slug,
                                       std::string_view detail = {}) {
  return MakeError(absl::StatusCode::kFailedPrecondition, slug, detail);
}
inline absl::Status AlreadyExists(std::string_view slug,
                                  std::string_view detail = {}) {
  return MakeError(absl::StatusCode::kAlreadyExists, slug, detail);
}
inline absl::Status Internal(std::string_view slug,
                             std::string_view detail = {}) {
  return MakeError(absl::StatusCode::kInternal, slug, detail);
}

}  // namespace coop

#define COOP_STATUS_CONCAT_INNER_(a, b) a##b
#define COOP_STATUS_CONCAT_(a, b) COOP_STATUS_CONCAT_INNER_(a, b)

#define COOP_RETURN_IF_ERROR(expr)            \
  do {                                        \
    ::absl::Status _coop_status = (expr);     \
    if (!_coop_status.ok()) return _coop_status; \
  } while (0)

#define COOP_ASSIGN_OR_RETURN(lhs, rexpr) \
  COOP_ASSIGN_OR_RETURN_IMPL_(            \
      COOP_STATUS_CONCAT_(_coop_statusor_, __LINE__), lhs, rexpr)

#define COOP_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                \
  if (!statusor.ok()) return statusor.status();           \
  lhs = std::move(statusor).value()

#endif  // COOP_COMMON_STATUS_H_
