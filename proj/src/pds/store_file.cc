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

#include "coop/pds/store_file.h"

#include <bit>
#include <cstring>
#include <utility>

#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::pds {
namespace {

constexpr std::string_view kMagic = "COOPPDS1";

template <typename T>
void Put(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  bool Get(T& value) {
    if (data_.size() < sizeof(T)) return false;
    std::memcpy(&value, data_.data(), sizeof(T));
    data_.remove_prefix(sizeof(T));
    return true;
  }

  bool Take(size_t n, std::string_view& out) {
    if (data_.size() < n) return false;
    out = data_.substr(0, n);
    data_.remove_prefix(n);
    return true;
  }

  bool done() const { return data_.empty(); }
  std::string_view rest() const { return data_; }

 private:
  std::string_view data_;
};

absl::Status Corrupt(std::string_view what) {
  return InvalidArgument("corrupt-store-file", what);
}

}  // namespace

std::string_view HostingKindName(HostingKind kind) {
  return kind == HostingKind::kCooperative ? "cooperative-hosted"
                                           : "member-hosted";
}

std::string_view StoreStatusName(StoreStatus status) {
  return status == StoreStatus::kActive ? "active" : "suspended";
}

Json StoreHeader::ToJson() const {
  Json hosting_json{{"kind", HostingKindName(hosting.kind)}};
  if (hosting.kind == HostingKind::kMember) {
    hosting_json["endpoint"] = hosting.endpoint;
  }
  return Json{{"store_id", store_id},
              {"owner", owner},
              {"hosting", std::move(hosting_json)},
              {"status", StoreStatusName(status)},
              {"schema", SchemaToJson(schema)},
              {"created_at", FormatTimestamp(created_at)},
              {"key_scope", key_scope},
              {"wrapped_key", crypto::Base64Encode(wrapped_key)}};
}

absl::StatusOr<StoreHeader> StoreHeader::FromJson(const Json& json) {
  StoreHeader h;
  try {
    h.store_id = json.at("store_id").get<std::string>();
    h.owner = json.at("owner").get<std::string>();
    const Json& hosting = json.at("hosting");
    const std::string kind = hosting.at("kind").get<std::string>();
    if (kind == "member-hosted") {
      h.hosting.kind = HostingKind::kMember;
      h.hosting.endpoint = hosting.at("endpoint").get<std::string>();
    } else if (kind != "cooperative-hosted") {
      return Corrupt("hosting");
    }
    const std::string status = json.at("status").get<std::string>();
    if (status == "suspended") {
      h.status = StoreStatus::kSuspended;
    } else if (status != "active") {
      return Corrupt("status");
    }
    COOP_ASSIGN_OR_RETURN(h.schema, SchemaFromJson(json.at("schema")));
    COOP_ASSIGN_OR_RETURN(
        h.created_at, ParseTimestamp(json.at("created_at").get<std::string>()));
    h.key_scope = json.at("key_scope").get<std::string>();
    COOP_ASSIGN_OR_RETURN(
        h.wrapped_key,
        crypto::Base64Decode(json.at("wrapped_key").get<std::string>()));
  } catch (const Json::exception&) {
    return Corrupt("header");
  }
  return h;
}

std::string EncodeValues(const std::vector<FieldSpec>& schema,
                         const std::vector<FieldValue>& values) {
  std::string out;
  for (size_t i = 0; i < schema.size(); ++i) {
    const FieldValue& v = values[i];
    switch (schema[i].kind) {
      case FieldKind::kNumber:
        Put(out, std::get<double>(v));
        break;
      case FieldKind::kText: {
        const std::string& s = std::get<std::string>(v);
        Put(out, static_cast<uint32_t>(s.size()));
        out += s;
        break;
      }
      case FieldKind::kTimestamp:
        Put(out, static_cast<int64_t>(std::get<TimestampValue>(v).seconds));
        break;
      case FieldKind::kGeo:
        Put(out, std::get<GeoPoint>(v).lat);
        Put(out, std::get<GeoPoint>(v).lon);
        break;
    }
  }
  return out;
}

absl::StatusOr<std::vector<FieldValue>> DecodeValues(
    const std::vector<FieldSpec>& schema, std::string_view bytes) {
  Reader r(bytes);
  std::vector<FieldValue> values;
  values.reserve(schema.size());
  for (const FieldSpec& f : schema) {
    switch (f.kind) {
      case FieldKind::kNumber: {
        double d;
        if (!r.Get(d)) return Corrupt("record");
        values.emplace_back(d);
        break;
      }
      case FieldKind::kText: {
        uint32_t n;
        std::string_view s;
        if (!r.Get(n) || !r.Take(n, s)) return Corrupt("record");
        values.emplace_back(std::string(s));
        break;
      }
      case FieldKind::kTimestamp: {
        int64_t t;
        if (!r.Get(t)) return Corrupt("record");
        values.emplace_back(TimestampValue{t});
        break;
      }
      case FieldKind::kGeo: {
        GeoPoint g;
        if (!r.Get(g.lat) || !r.Get(g.lon)) return Corrupt("record");
        values.emplace_back(g);
        break;
      }
    }
  }
  if (!r.done()) return Corrupt("record");
  return values;
}

std::string SerializeFrame(const SealedRecord& record) {
  std::string body;
  Put(body, static_cast<uint16_t>(record.record_id.size()));
  body += record.record_id;
  Put(body, static_cast<int64_t>(record.ingested_at));
  body += record.ciphertext;
  std::string out;
  Put(out, static_cast<uint32_t>(body.size()));
  out += body;
  return out;
}

std::string SerializeStoreFile(const StoreHeader& header,
                               const std::vector<SealedRecord>& records) {
  const std::string header_bytes = header.ToJson().dump();
  std::string out(kMagic);
  Put(out, static_cast<uint32_t>(header_bytes.size()));
  out += header_bytes;
  for (const SealedRecord& r : records) out += SerializeFrame(r);
  return out;
}

absl::StatusOr<StoreFile> ParseStoreFile(std::string_view bytes) {
  Reader r(bytes);
  std::string_view magic;
  if (!r.Take(kMagic.size(), magic) || magic != kMagic) {
    return Corrupt("magic");
  }
  uint32_t header_len;
  std::string_view header_bytes;
  if (!r.Get(header_len) || !r.Take(header_len, header_bytes)) {
    return Corrupt("header");
  }
  COOP_ASSIGN_OR_RETURN(Json header_json, ParseJson(header_bytes));
  StoreFile file;
  COOP_ASSIGN_OR_RETURN(file.header, StoreHeader::FromJson(header_json));
  while (!r.done()) {
    uint32_t len;
    std::string_view frame;
    if (!r.Get(len) || !r.Take(len, frame)) return Corrupt("frame");
    Reader f(frame);
    uint16_t id_len;
    std::string_view id;
    int64_t at;
    if (!f.Get(id_len) || !f.Take(id_len, id) || !f.Get(at)) {
      return Corrupt("frame");
    }
    file.records.push_back(
        SealedRecord{std::string(id), at, std::string(f.rest())});
  }
  return file;
}

std::string RecordAad(std::string_view store_id, std::string_view record_id) {
  return coop::StrCat(store_id, "/", record_id);
}

}  // namespace coop::pds
