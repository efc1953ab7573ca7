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

#ifndef COOP_COMMON_CRYPTO_H_
#define COOP_COMMON_CRYPTO_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace coop::crypto {

// Initializes libsodium once; safe to call from any thread.
void EnsureInitialized();

std::string Sha256(std::string_view data);  // raw 32 bytes
std::string Sha256Hex(std::string_view data);
std::string HmacSha256(std::string_view key, std::string_view data);

std::string RandomBytes(size_t n);
// URL-safe unpadded base64 of `n` random bytes.
std::string RandomToken(size_t n = 32);

std::string Base64Encode(std::string_view data);
absl::StatusOr<std::string> Base64Decode(std::string_view text);
std::string Base64UrlEncode(std::string_view data);
std::string HexEncode(std::string_view data);

// Compares in time independent of where the inputs differ.
bool ConstantTimeEquals(std::string_view a, std::string_view b);

// Key material that zeroes itself on destruction.
class SecretBytes {
 public:
  SecretBytes() = default;
  explicit SecretBytes(std::string bytes) : bytes_(std::move(bytes)) {}
  SecretBytes(const SecretBytes&) = default;
  SecretBytes& operator=(const SecretBytes&) = default;
  SecretBytes(SecretBytes&&) = default;
  SecretBytes& operator=(SecretBytes&&) = default;
  ~SecretBytes();

  std::string_view view() const { return bytes_; }
  size_t size() const { return bytes_.size(); }
  bool empty() const { return bytes_.empty(); }

 private:
  std::string bytes_;
};

// Symmetric authenticated encryption (XChaCha20-Poly1305). Output layout is
// nonce || ciphertext+tag.
inline constexpr size_t kAeadKeyBytes = 32;
SecretBytes GenerateAeadKey();
std::string AeadSeal(const SecretBytes& key, std::string_view plaintext,
                     std::string_view associated_data);
absl::StatusOr<std::string> AeadOpen(const SecretBytes& key,
                                     std::string_view sealed,
                                     std::string_view associated_data);

// Ed25519. Signatures are deterministic for a given key and message.
class SigningKey {
 public:
  static SigningKey Generate();
  static absl::StatusOr<SigningKey> FromSeed(std::string_view seed32);

  std::string Sign(std::string_view message) const;
  const std::string& public_key() const { return public_key_; }
  std::string_view seed() const { return seed_.view(); }

 private:
  SigningKey() = default;
  SecretBytes seed_;
  SecretBytes secret_key_;
  std::string public_key_;
};

bool VerifySignature(std::string_view public_key, std::string_view message,
                     std::string_view signature);

}  // namespace coop::crypto

#endif  // COOP_COMMON_CRYPTO_H_
