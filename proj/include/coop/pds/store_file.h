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

#ifndef COOP_PDS_STORE_FILE_H_
#define COOP_PDS_STORE_FILE_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/schema.h"
#include "coop/common/value.h"

namespace coop::pds {

enum class HostingKind { kCooperative, kMember };
enum class StoreStatus { kActive, kSuspended };

std::string_view HostingKindName(HostingKind kind);
std::string_view StoreStatusName(StoreStatus status);

struct Hosting {
  HostingKind kind = HostingKind::kCooperative;
  std::string endpoint;  // member-hosted only
};

// Plaintext header of a store file. Holds no record content; the data key is
// present only wrapped under the cooperative key scope.
struct StoreHeader {
  std::string store_id;
  MemberId owner;
  Hosting hosting;
  StoreStatus status = StoreStatus::kActive;
  std::vector<FieldSpec> schema;
  Timestamp created_at = 0;
  std::string key_scope;
  std::string wrapped_key;

  Json ToJson() const;
  static absl::StatusOr<StoreHeader> FromJson(const Json& json);
};

struct SealedRecord {
  std::string record_id;
  Timestamp ingested_at = 0;
  std::string ciphertext;
};

// Values in schema order. number: f64, text: u32 length + bytes,
// timestamp: i64, geo: f64 lat + f64 lon. Little endian.
std::string EncodeValues(const std::vector<FieldSpec>& schema,
                         const std::vector<FieldValue>& values);
absl::StatusOr<std::vector<FieldValue>> DecodeValues(
    const std::vector<FieldSpec>& schema, std::string_view bytes);

// Store file and backup archive layout:
//   "COOPPDS1" | u32 header length | header JSON | frame*
//   frame := u32 length | u16 id length | id | i64 ingested_at | ciphertext
std::string SerializeStoreFile(const StoreHeader& header,
                               const std::vector<SealedRecord>& records);
std::string SerializeFrame(const SealedRecord& record);

struct StoreFile {
  StoreHeader header;
  std::vector<SealedRecord> records;
};
absl::StatusOr<StoreFile> ParseStoreFile(std::string_view bytes);

// Associated data binding a ciphertext to its store and record.
std::string RecordAad(std::string_view store_id, std::string_view record_id);

}  // namespace coop::pds

#endif  // COOP_PDS_STORE_FILE_H_
