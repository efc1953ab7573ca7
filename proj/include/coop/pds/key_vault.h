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

#ifndef COOP_PDS_KEY_VAULT_H_
#define COOP_PDS_KEY_VAULT_H_

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "coop/common/crypto.h"

namespace coop::pds {

// Cooperative key scope. Holds the master key that wraps every per-store
// data key. The master key lives under its own directory so that a process
// holding only the storage directory (an outsourced operator) cannot
// decrypt anything.
class KeyVault {
 public:
  // An empty `key_dir` keeps the master key in memory only.
  static absl::StatusOr<std::unique_ptr<KeyVault>> Open(
      const std::filesystem::path& key_dir, std::string scope_id);

  const std::string& scope_id() const { return scope_id_; }

  std::string Wrap(const crypto::SecretBytes& data_key,
                   std::string_view store_id) const;
  absl::StatusOr<crypto::SecretBytes> Unwrap(std::string_view wrapped,
                                             std::string_view store_id) const;

 private:
  KeyVault(crypto::SecretBytes master, std::string scope_id)
      : master_(std::move(master)), scope_id_(std::move(scope_id)) {}

  crypto::SecretBytes master_;
  std::string scope_id_;
};

}  // namespace coop::pds

#endif  // COOP_PDS_KEY_VAULT_H_
