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

#include "coop/assertion/keys.h"

#include <sys/stat.h>

#include <mutex>
#include <system_error>

#include "coop/common/journal.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::assertion {

std::string KeyIdFor(std::string_view public_key) {
  return coop::StrCat("k-", crypto::Sha256Hex(public_key).substr(0, 16));
}

absl::StatusOr<std::unique_ptr<CooperativeKeys>> CooperativeKeys::Open(
    const std::filesystem::path& key_dir, std::string issuer) {
  std::unique_ptr<CooperativeKeys> keys(
      new CooperativeKeys(key_dir, std::move(issuer)));
  const std::filesystem::path file =
      key_dir.empty() ? std::filesystem::path() : key_dir / "signing.json";
  if (!file.empty() && std::filesystem::exists(file)) {
    COOP_ASSIGN_OR_RETURN(std::string bytes, ReadFile(file));
    COOP_ASSIGN_OR_RETURN(Json stored, ParseJson(bytes));
    try {
      COOP_ASSIGN_OR_RETURN(
          std::string secret,
          crypto::Base64Decode(stored.at("pseudonym_secret").get<std::string>()));
      keys->pseudonym_secret_ = crypto::SecretBytes(std::move(secret));
      for (const Json& seed_b64 : stored.at("seeds")) {
        COOP_ASSIGN_OR_RETURN(std::string seed,
                              crypto::Base64Decode(seed_b64.get<std::string>()));
        COOP_ASSIGN_OR_RETURN(crypto::SigningKey key,
                              crypto::SigningKey::FromSeed(seed));
        const std::string id = KeyIdFor(key.public_key());
        keys->order_.push_back(id);
        keys->keys_.emplace(id, std::move(key));
      }
    } catch (const Json::exception&) {
      return Internal("signing-keys-corrupt");
    }
    if (keys->order_.empty()) return Internal("signing-keys-corrupt");
    return keys;
  }
  if (!key_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(key_dir, ec);
    if (ec) return Internal("key-dir", ec.message());
  }
  keys->pseudonym_secret_ = crypto::SecretBytes(crypto::RandomBytes(32));
  crypto::SigningKey first = crypto::SigningKey::Generate();
  const std::string id = KeyIdFor(first.public_key());
  keys->order_.push_back(id);
  keys->keys_.emplace(id, std::move(first));
  COOP_RETURN_IF_ERROR(keys->Save());
  return keys;
}

absl::Status CooperativeKeys::Save() const {
  if (key_dir_.empty()) return absl::OkStatus();
  Json seeds = Json::array();
  for (const std::string& id : order_) {
    seeds.push_back(crypto::Base64Encode(keys_.at(id).seed()));
  }
  const std::filesystem::path file = key_dir_ / "signing.json";
  COOP_RETURN_IF_ERROR(WriteFileAtomically(
      file, Json{{"pseudonym_secret",
                  crypto::Base64Encode(pseudonym_secret_.view())},
                 {"seeds", std::move(seeds)}}
                .dump()));
  ::chmod(file.c_str(), 0600);
  return absl::OkStatus();
}

std::string CooperativeKeys::current_key_id() const {
  std::shared_lock lock(mu_);
  return order_.back();
}

CooperativeKeys::Signature CooperativeKeys::Sign(
    std::string_view message) const {
  std::shared_lock lock(mu_);
  const std::string& id = order_.back();
  return Signature{id, keys_.at(id).Sign(message)};
}

absl::StatusOr<std::string> CooperativeKeys::Rotate() {
  std::unique_lock lock(mu_);
  crypto::SigningKey next = crypto::SigningKey::Generate();
  const std::string id = KeyIdFor(next.public_key());
  order_.push_back(id);
  keys_.emplace(id, std::move(next));
  COOP_RETURN_IF_ERROR(Save());
  return id;
}

Json CooperativeKeys::Published() const {
  std::shared_lock lock(mu_);
  Json keys = Json::object();
  for (const std::string& id : order_) {
    keys[id] = crypto::Base64Encode(keys_.at(id).public_key());
  }
  return Json{{"issuer", issuer_}, {"keys", std::move(keys)}};
}

std::string CooperativeKeys::Pseudonym(std::string_view member,
                                       std::string_view audience) const {
  const std::string mac = crypto::HmacSha256(
      pseudonym_secret_.view(), coop::StrCat(member, "\n", audience));
  return coop::StrCat("pw-", crypto::HexEncode(mac).substr(0, 32));
}

}  // namespace coop::assertion
