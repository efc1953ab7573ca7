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

#include "coop/assertion/document.h"

#include "coop/common/crypto.h"

namespace coop::assertion {
namespace {

std::string StringField(const Json& object, const char* key) {
  auto it = object.find(key);
  return it != object.end() && it->is_string() ? it->get<std::string>() : "";
}

}  // namespace

std::string AssembleDocument(const Json& payload, std::string_view key_id,
                             std::string_view signature) {
  const Json doc{{"payload", payload},
                 {"signature",
                  {{"key_id", std::string(key_id)},
                   {"value", crypto::Base64Encode(signature)}}}};
  return *Canonicalize(doc);
}

Verdict VerifyDocument(std::string_view document,
                       std::string_view expected_purpose, Timestamp at,
                       const Json& published_keys) {
  Verdict v;
  absl::StatusOr<Json> doc = ParseCanonical(document);
  if (!doc.ok() || !doc->is_object() || doc->size() != 2 ||
      !doc->contains("payload") || !(*doc)["payload"].is_object() ||
      !doc->contains("signature") || !(*doc)["signature"].is_object()) {
    v.reason = "canonical-form";
    return v;
  }
  const Json& sig = (*doc)["signature"];
  if (sig.size() != 2 || !sig.contains("key_id") || !sig["key_id"].is_string() ||
      !sig.contains("value") || !sig["value"].is_string()) {
    v.reason = "canonical-form";
    return v;
  }
  v.payload = (*doc)["payload"];

  const std::string key_id = sig["key_id"].get<std::string>();
  const Json* keys = published_keys.is_object() && published_keys.contains("keys")
                         ? &published_keys["keys"]
                         : nullptr;
  if (keys == nullptr || !keys->is_object() || !keys->contains(key_id) ||
      !(*keys)[key_id].is_string()) {
    v.reason = "unknown-key";
    return v;
  }
  absl::StatusOr<std::string> public_key =
      crypto::Base64Decode((*keys)[key_id].get<std::string>());
  absl::StatusOr<std::string> signature =
      crypto::Base64Decode(sig["value"].get<std::string>());
  absl::StatusOr<std::string> signed_bytes = Canonicalize(v.payload);
  if (!public_key.ok() || !signature.ok() || !signed_bytes.ok() ||
      !crypto::VerifySignature(*public_key, *signed_bytes, *signature)) {
    v.reason = "signature";
    return v;
  }
  // Issuer must match the key document it was checked against.
  if (published_keys.contains("issuer") &&
      StringField(v.payload, "issuer") != StringField(published_keys, "issuer")) {
    v.reason = "unknown-key";
    return v;
  }

  const Json& expires = v.payload.contains("expires_at")
                            ? v.payload["expires_at"]
                            : Json();
  absl::StatusOr<Timestamp> expires_at =
      expires.is_string() ? ParseTimestamp(expires.get<std::string>())
                          : absl::StatusOr<Timestamp>(0);
  if (!expires_at.ok() || at >= *expires_at) {
    v.reason = "expired";
    return v;
  }
  if (expected_purpose.empty() ||
      StringField(v.payload, "purpose") != expected_purpose) {
    v.reason = "purpose-mismatch";
    return v;
  }
  v.valid = true;
  return v;
}

Json ReceiptPayload(std::string_view assertion_id,
                    std::string_view service_provider,
                    const Json& accepted_terms, Timestamp signed_at) {
  return Json{{"assertion_id", std::string(assertion_id)},
              {"service_provider", std::string(service_provider)},
              {"accepted_terms", accepted_terms},
              {"signed_at", FormatTimestamp(signed_at)}};
}

}  // namespace coop::assertion
