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

#ifndef COOP_ASSERTION_KEYS_H_
#define COOP_ASSERTION_KEYS_H_

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/crypto.h"

namespace coop::assertion {

// The cooperative's signing keys. Old verification keys stay published after
// rotation so earlier assertions keep verifying. Private material never
// leaves this object except into the key directory.
class CooperativeKeys {
 public:
  // An empty `key_dir` keeps everything in memory.
  static absl::StatusOr<std::unique_ptr<CooperativeKeys>> Open(
      const std::filesystem::path& key_dir, std::string issuer);

  const std::string& issuer() const { return issuer_; }
  std::string current_key_id() const;

  struct Signature {
    std::string key_id;
    std::string value;  // raw 64 bytes
  };
  Signature Sign(std::string_view message) const;

  // Retires the current signing key; returns the new key id.
  absl::StatusOr<std::string> Rotate();

  // {"issuer": ..., "keys": {key_id: base64 verification key}}
  Json Published() const;

  // Pairwise pseudonym of `member` towards `audience`.
  std::string Pseudonym(std::string_view member,
                        std::string_view audience) const;

 private:
  CooperativeKeys(std::filesystem::path key_dir, std::string issuer)
      : key_dir_(std::move(key_dir)), issuer_(std::move(issuer)) {}

  absl::Status Save() const;  // caller holds mu_

  std::filesystem::path key_dir_;
  std::string issuer_;
  crypto::SecretBytes pseudonym_secret_;
  mutable std::shared_mutex mu_;
  std::map<std::string, crypto::SigningKey> keys_;
  std::vector<std::string> order_;  // oldest first; last signs
};

std::string KeyIdFor(std::string_view public_key);

}  // namespace coop::assertion

#endif  // COOP_ASSERTION_KEYS_H_
