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

#include "coop/common/ids.h"

#include <string>

#include "coop/common/strings.h"
#include "absl/strings/str_format.h"
#include "coop/common/crypto.h"

namespace coop {

std::string RandomIdSource::Next(std::string_view prefix) {
  return coop::StrCat(prefix, "-", crypto::HexEncode(crypto::RandomBytes(8)));
}

std::string SequentialIdSource::Next(std::string_view prefix) {
  return absl::StrFormat("%s-%06d", AbslView(prefix), ++counter_);
}

}  // namespace coop
