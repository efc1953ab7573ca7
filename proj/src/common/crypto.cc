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

#include "coop/common/crypto.h"

#include <sodium.h>

#include <cstdlib>
#include <mutex>
#include <string>

#include "coop/common/status.h"

namespace coop::crypto {

void EnsureInitialized() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) std::abort();
  });
}

std::string Sha256(std::string_view data) {
  std::string out(crypto_hash_sha256_BYTES, '\0');
  crypto_hash_sha256(reinterpret_cast<unsigned char*>(out.data()),
                     reinterpret_cast<const unsigned char*>(data.data()),
                     data.size());
  return out;
}

std::string Sha256Hex(std::string_view data) { return HexEncode(Sha256(data)); }

std::string HmacSha256(std::string_view key, std::string_view data) {
  crypto_auth_hmacsha256_state state;
  crypto_auth_hmacsha256_init(
      &state, reinterpret_cast<const unsigned char*>(key.data()), key.size());
  crypto_auth_hmacsha256_update(
      &state, reinterpret_cast<const unsigned char*>(data.data()),
      data.size());
  std::string out(crypto_auth_hmacsha256_BYTES, '\0');
  crypto_auth_hmacsha256_final(&state,
                               reinterpret_cast<unsigned char*>(out.data()));
  sodium_memzero(&state, sizeof(state));
  return out;
}

std::string RandomBytes(size_t n) {
  EnsureInitialized();
  std::string out(n, '\0');
  randombytes_buf(out.data(), n);
  return out;
}

std::string RandomToken(size_t n) { return Base64UrlEncode(RandomBytes(n)); }

namespace {

std::string EncodeWithVariant(std::string_view data, int variant) {
  std::string out(sodium_base64_encoded_len(data.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(),
                    reinterpret_cast<const unsigned char*>(data.data()),
                    data.size(), variant);
  out.resize(out.size() - 1);  // trailing NUL
  return out;
}

}  // namespace

std::string Base64Encode(std::string_view data) {
  return EncodeWithVariant(data, sodium_base64_VARIANT_ORIGINAL);
}

std::string Base64UrlEncode(std::string_view data) {
  return EncodeWithVariant(data, sodium_base64_VARIANT_URLSAFE_NO_PADDING);
}

absl::StatusOr<std::string> Base64Decode(std::string_view text) {
  std::string out(text.size(), '\0');
  size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(reinterpret_cast<unsigned char*>(out.data()),
                        out.size(), text.data(), text.size(), nullptr, &len,
                        &end, sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != text.data() + text.size()) {
    return InvalidArgument("bad-base64");
  }
  out.resize(len);
  return out;
}

std::string HexEncode(std::string_view data) {
  std::string out(data.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(),
                 reinterpret_cast<const unsigned char*>(data.data()),
                 data.size());
  out.pop_back();
  return out;
}

bool ConstantTimeEquals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

SecretBytes::~SecretBytes() {
  if (!bytes_.empty()) sodium_memzero(bytes_.data(), bytes_.size());
}

SecretBytes GenerateAeadKey() {
  EnsureInitialized();
  std::string key(crypto_aead_xchacha20poly1305_ietf_KEYBYTES, '\0');
  crypto_aead_xchacha20poly1305_ietf_keygen(
      reinterpret_cast<unsigned char*>(key.data()));
  return SecretBytes(std::move(key));
}

std::string AeadSeal(const SecretBytes& key, std::string_view plaintext,
                     std::string_view associated_data) {
  EnsureInitialized();
  constexpr size_t kNonce = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
  std::string out(kNonce + plaintext.size() +
                      crypto_aead_xchacha20poly1305_ietf_ABYTES,
                  '\0');
  auto* buf = reinterpret_cast<unsigned char*>(out.data());
  randombytes_buf(buf, kNonce);
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(
      buf + kNonce, &written,
      reinterpret_cast<const unsigned char*>(plaintext.data()),
      plaintext.size(),
      reinterpret_cast<const unsigned char*>(associated_data.data()),
      associated_data.size(), nullptr, buf,
      reinterpret_cast<const unsigned char*>(key.view().data()));
  out.resize(kNonce + written);
  return out;
}

absl::StatusOr<std::string> AeadOpen(const SecretBytes& key,
                                     std::string_view sealed,
                                     std::string_view associated_data) {
  constexpr size_t kNonce = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
  if (sealed.size() < kNonce + crypto_aead_xchacha20poly1305_ietf_ABYTES) {
    return Internal("ciphertext-truncated");
  }
  std::string out(sealed.size() - kNonce, '\0');
  unsigned long long written = 0;
  const auto* buf = reinterpret_cast<const unsigned char*>(sealed.data());
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(
          reinterpret_cast<unsigned char*>(out.data()), &written, nullptr,
          buf + kNonce, sealed.size() - kNonce,
          reinterpret_cast<const unsigned char*>(associated_data.data()),
          associated_data.size(), buf,
          reinterpret_cast<const unsigned char*>(key.view().data())) != 0) {
    return Internal("ciphertext-forged");
  }
  out.resize(written);
  return out;
}

SigningKey SigningKey::Generate() {
  return *FromSeed(RandomBytes(crypto_sign_SEEDBYTES));
}

absl::StatusOr<SigningKey> SigningKey::FromSeed(std::string_view seed32) {
  EnsureInitialized();
  if (seed32.size() != crypto_sign_SEEDBYTES) {
    return InvalidArgument("bad-seed-length");
  }
  SigningKey key;
  std::string pk(crypto_sign_PUBLICKEYBYTES, '\0');
  std::string sk(crypto_sign_SECRETKEYBYTES, '\0');
  crypto_sign_seed_keypair(reinterpret_cast<unsigned char*>(pk.data()),
                           reinterpret_cast<unsigned char*>(sk.data()),
                           reinterpret_cast<const unsigned char*>(seed32.data()));
  key.seed_ = SecretBytes(std::string(seed32));
  key.secret_key_ = SecretBytes(std::move(sk));
  key.public_key_ = std::move(pk);
  return key;
}

std::string SigningKey::Sign(std::string_view message) const {
  std::string sig(crypto_sign_BYTES, '\0');
  crypto_sign_detached(
      reinterpret_cast<unsigned char*>(sig.data()), nullptr,
      reinterpret_cast<const unsigned char*>(message.data()), message.size(),
      reinterpret_cast<const unsigned char*>(secret_key_.view().data()));
  return sig;
}

bool VerifySignature(std::string_view public_key, std::string_view message,
                     std::string_view signature) {
  EnsureInitialized();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES ||
      signature.size() != crypto_sign_BYTES) {
    return false;
  }
  return crypto_sign_verify_detached(
             reinterpret_cast<const unsigned char*>(signature.data()),
             reinterpret_cast<const unsigned char*>(message.data()),
             message.size(),
             reinterpret_cast<const unsigned char*>(public_key.data())) == 0;
}

}  // namespace coop::crypto
