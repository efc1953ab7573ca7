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

#include "coop/common/status.h"

#include <optional>

#include "absl/strings/cord.h"
#include "coop/common/strings.h"

namespace coop {

absl::Status MakeError(absl::StatusCode code, std::string_view slug,
                       std::string_view detail) {
  absl::Status status(code, detail.empty()
                                ? std::string(slug)
                                : coop::StrCat(slug, ": ", detail));
  status.SetPayload(AbslView(kErrorSlugUrl), absl::Cord(AbslView(slug)));
  return status;
}

std::string ErrorSlug(const absl::Status& status) {
  absl::optional<absl::Cord> slug = status.GetPayload(AbslView(kErrorSlugUrl));
  return slug ? std::string(*slug) : std::string();
}

void SetDetail(absl::Status& status, std::string_view key,
               std::string_view value) {
  status.SetPayload(coop::StrCat("coop/", key), absl::Cord(AbslView(value)));
}

std::string GetDetail(const absl::Status& status, std::string_view key) {
  absl::optional<absl::Cord> value =
      status.GetPayload(coop::StrCat("coop/", key));
  return value ? std::string(*value) : std::string();
}

}  // namespace coop
