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

#include "coop/pds/key_vault.h"

#include <sys/stat.h>

#include <system_error>
#include <utility>

#include "coop/common/journal.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::pds {
namespace {

std::string WrapContext(std::string_view scope, std::string_view store_id) {
  return coop::StrCat("store-key\n", scope, "\n", store_id);
}

}  // namespace

absl::StatusOr<std::unique_ptr<KeyVault>> KeyVault::Open(
    const std::filesystem::path& key_dir, std::string scope_id) {
  if (key_dir.empty()) {
    return std::unique_ptr<KeyVault>(
        new KeyVault(crypto::GenerateAeadKey(), std::move(scope_id)));
  }
  std::error_code ec;
  std::filesystem::create_directories(key_dir, ec);
  if (ec) return Internal("key-dir", ec.message());
  const std::filesystem::path file = key_dir / "master.key";
  if (std::filesystem::exists(file)) {
    COOP_ASSIGN_OR_RETURN(std::string bytes, ReadFile(file));
    if (bytes.size() != crypto::kAeadKeyBytes) {
      return Internal("master-key-corrupt", file.string());
    }
    return std::unique_ptr<KeyVault>(
        new KeyVault(crypto::SecretBytes(std::move(bytes)),
                     std::move(scope_id)));
  }
  crypto::SecretBytes master = crypto::GenerateAeadKey();
  COOP_RETURN_IF_ERROR(WriteFileAtomically(file, master.view()));
  ::chmod(file.c_str(), 0600);
  return std::unique_ptr<KeyVault>(
      new KeyVault(std::move(master), std::move(scope_id)));
}

std::string KeyVault::Wrap(const crypto::SecretBytes& data_key,
                           std::string_view store_id) const {
  return crypto::AeadSeal(master_, data_key.view(),
                          WrapContext(scope_id_, store_id));
}

absl::StatusOr<crypto::SecretBytes> KeyVault::Unwrap(
    std::string_view wrapped, std::string_view store_id) const {
  absl::StatusOr<std::string> key =
      crypto::AeadOpen(master_, wrapped, WrapContext(scope_id_, store_id));
  if (!key.ok()) return PermissionDenied("key-unavailable", store_id);
  return crypto::SecretBytes(*std::move(key));
}

}  // namespace coop::pds
