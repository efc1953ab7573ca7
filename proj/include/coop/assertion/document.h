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

#ifndef COOP_ASSERTION_DOCUMENT_H_
#define COOP_ASSERTION_DOCUMENT_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"

namespace coop::assertion {

// Portable assertion document, always in canonical JSON:
//
//   {"payload": {...}, "signature": {"key_id": "...", "value": "<base64>"}}
//
// The signature covers the canonical bytes of "payload" alone.
std::string AssembleDocument(const Json& payload, std::string_view key_id,
                             std::string_view signature);

struct Verdict {
  bool valid = false;
  // One of: canonical-form, unknown-key, signature, expired,
  // purpose-mismatch. Empty when valid.
  std::string reason;
  Json payload;  // set once the document parsed
};

// Checks, in order: canonical form, signature under the named key from
// `published_keys` (the well-known key document), at < expires_at, and
// purpose equality. Needs nothing beyond its arguments.
Verdict VerifyDocument(std::string_view document,
                       std::string_view expected_purpose, Timestamp at,
                       const Json& published_keys);

// Payload of a digital receipt and its document, same container shape.
// The service provider signs with its own enrolled key.
Json ReceiptPayload(std::string_view assertion_id,
                    std::string_view service_provider,
                    const Json& accepted_terms, Timestamp signed_at);

}  // namespace coop::assertion

#endif  // COOP_ASSERTION_DOCUMENT_H_
