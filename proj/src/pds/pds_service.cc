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

#include "coop/pds/pds_service.h"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <set>
#include <span>
#include <system_error>
#include <utility>

#include "absl/strings/ascii.h"
#include "coop/common/crypto.h"
#include "coop/common/journal.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::pds {

class StoreSlot {
 public:
  StoreHeader header;
  crypto::SecretBytes key;
  std::filesystem::path path;
  bool sync = false;

  // Parallel arrays in ingestion order.
  std::vector<std::string> ids;
  std::vector<std::vector<FieldValue>> values;
  std::vector<SealedRecord> sealed;

  mutable std::shared_mutex mu;

  StoreInfo Info() const {
    return StoreInfo{header.store_id, header.owner,    header.hosting,
                     header.status,   header.schema,   header.created_at,
                     ids.size()};
  }

  absl::Status Rewrite() const {
    if (path.empty()) return absl::OkStatus();
    return WriteFileAtomically(path, SerializeStoreFile(header, sealed));
  }

  absl::Status AppendFrames(std::span<const SealedRecord> records) const {
    if (path.empty()) return absl::OkStatus();
    std::string bytes;
    for (const SealedRecord& r : records) bytes += SerializeFrame(r);
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (f == nullptr) return Internal("store-write", path.string());
    const bool wrote = std::fwrite(bytes.data(), 1, bytes.size(), f) ==
                           bytes.size() &&
                       std::fflush(f) == 0 &&
                       (!sync || ::fdatasync(::fileno(f)) == 0);
    std::fclose(f);
    if (!wrote) return Internal("store-write", path.string());
    return absl::OkStatus();
  }

  absl::StatusOr<dsl::LocalResult> Evaluate(
      const dsl::CompiledAlgorithm& algorithm) const {
    std::shared_lock lock(mu);
    if (header.status != StoreStatus::kActive) {
      return FailedPrecondition("store-suspended", header.store_id);
    }
    COOP_ASSIGN_OR_RETURN(dsl::LocalResult result,
                          dsl::Evaluate(algorithm, header.schema, values));
    result.store_id = header.store_id;
    result.owner = header.owner;
    return result;
  }
};

// Stand-in for a store hosted outside the cooperative. It speaks only the
// serialized evaluation contract and checks the credential itself rather
// than trusting the caller.
class MemberHostedEndpoint {
 public:
  MemberHostedEndpoint(std::string url, const ExecutionValidator* validator)
      : url_(std::move(url)), validator_(validator) {}

  void Attach(std::shared_ptr<StoreSlot> slot) {
    std::lock_guard lock(mu_);
    slots_[slot->header.store_id] = std::move(slot);
  }

  // Request: {"store_id", "algorithm", "credential"}.
  // Response: {"result"} or {"error", "code", "message"}.
  std::string Handle(std::string_view request_bytes) const {
    absl::StatusOr<dsl::LocalResult> result = Serve(request_bytes);
    if (!result.ok()) {
      return Json{{"error", ErrorSlug(result.status())},
                  {"code", static_cast<int>(result.status().code())},
                  {"message", std::string(result.status().message())}}
          .dump();
    }
    return Json{{"result", dsl::LocalResultToJson(*result)}}.dump();
  }

 private:
  absl::StatusOr<dsl::LocalResult> Serve(std::string_view request_bytes) const {
    COOP_ASSIGN_OR_RETURN(Json request, ParseJson(request_bytes));
    if (!request.is_object() || !request.contains("store_id") ||
        !request["store_id"].is_string() || !request.contains("credential") ||
        !request["credential"].is_string() || !request.contains("algorithm")) {
      return InvalidArgument("bad-request");
    }
    COOP_ASSIGN_OR_RETURN(dsl::CompiledAlgorithm algorithm,
                          dsl::CompiledAlgorithmFromJson(request["algorithm"]));
    std::shared_ptr<StoreSlot> slot;
    {
      std::lock_guard lock(mu_);
      auto it = slots_.find(request["store_id"].get<std::string>());
      if (it == slots_.end()) return NotFound("unknown-store");
      slot = it->second;
    }
    COOP_RETURN_IF_ERROR(validator_->ValidateExecution(
        request["credential"].get<std::string>(), algorithm.algo,
        slot->header.owner));
    return slot->Evaluate(algorithm);
  }

  std::string url_;
  const ExecutionValidator* validator_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<StoreSlot>> slots_;
};

namespace {

bool SafeId(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return absl::ascii_isalnum(static_cast<unsigned char>(c)) || c == '-' ||
           c == '_';
  });
}

absl::StatusOr<dsl::LocalResult> DecodeEndpointResponse(
    std::string_view bytes) {
  COOP_ASSIGN_OR_RETURN(Json response, ParseJson(bytes));
  if (response.contains("result")) {
    return dsl::LocalResultFromJson(response["result"]);
  }
  if (!response.contains("error") || !response.contains("code")) {
    return Internal("bad-endpoint-response");
  }
  return MakeError(static_cast<absl::StatusCode>(response["code"].get<int>()),
                   response["error"].get<std::string>(),
                   response.value("message", ""));
}

absl::Status OpenSlotRecords(StoreSlot& slot) {
  for (const SealedRecord& r : slot.sealed) {
    absl::StatusOr<std::string> plain = crypto::AeadOpen(
        slot.key, r.ciphertext, RecordAad(slot.header.store_id, r.record_id));
    if (!plain.ok()) {
      return Internal("corrupt-store-file", slot.header.store_id);
    }
    COOP_ASSIGN_OR_RETURN(std::vector<FieldValue> values,
                          DecodeValues(slot.header.schema, *plain));
    slot.ids.push_back(r.record_id);
    slot.values.push_back(std::move(values));
  }
  return absl::OkStatus();
}

}  // namespace

Json StoreInfo::ToJson() const {
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
              {"record_count", record_count}};
}

PdsService::PdsService(Options options) : options_(std::move(options)) {}
PdsService::~PdsService() = default;

absl::StatusOr<std::unique_ptr<PdsService>> PdsService::Open(Options options) {
  std::unique_ptr<PdsService> service(new PdsService(std::move(options)));
  COOP_RETURN_IF_ERROR(service->LoadAll());
  return service;
}

std::filesystem::path PdsService::PathFor(const StoreHeader& header) const {
  if (options_.dir.empty()) return {};
  const std::string file = header.store_id + ".pds";
  if (header.hosting.kind == HostingKind::kCooperative) {
    return options_.dir / "stores" / file;
  }
  return options_.dir / "member-hosted" /
         crypto::Sha256Hex(header.hosting.endpoint).substr(0, 16) / file;
}

MemberHostedEndpoint& PdsService::EndpointFor(const std::string& url) {
  std::unique_ptr<MemberHostedEndpoint>& endpoint = endpoints_[url];
  if (!endpoint) {
    endpoint =
        std::make_unique<MemberHostedEndpoint>(url, options_.validator);
  }
  return *endpoint;
}

absl::Status PdsService::LoadAll() {
  if (options_.dir.empty()) return absl::OkStatus();
  std::error_code ec;
  std::filesystem::create_directories(options_.dir / "stores", ec);
  if (ec) return Internal("persistence-dir", ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(options_.dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pds") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const std::filesystem::path& file : files) {
    COOP_ASSIGN_OR_RETURN(std::string bytes, ReadFile(file));
    COOP_ASSIGN_OR_RETURN(StoreFile parsed, ParseStoreFile(bytes));
    auto slot = std::make_shared<StoreSlot>();
    COOP_ASSIGN_OR_RETURN(slot->key,
                          options_.vault->Unwrap(parsed.header.wrapped_key,
                                                 parsed.header.store_id));
    slot->header = std::move(parsed.header);
    slot->sealed = std::move(parsed.records);
    slot->path = file;
    slot->sync = options_.sync_writes;
    COOP_RETURN_IF_ERROR(OpenSlotRecords(*slot));
    if (slot->header.hosting.kind == HostingKind::kMember) {
      EndpointFor(slot->header.hosting.endpoint).Attach(slot);
    }
    stores_[slot->header.store_id] = std::move(slot);
  }
  return absl::OkStatus();
}

absl::Status PdsService::Audit(const PrincipalId& actor,
                               std::string_view action,
                               std::string_view store_id,
                               std::map<std::string, std::string> extra) const {
  if (options_.audit == nullptr) return absl::OkStatus();
  extra["store"] = std::string(store_id);
  return options_.audit
      ->Append({audit::EventType::kStoreOp, std::string(action), actor,
                std::move(extra)})
      .status();
}

absl::StatusOr<std::shared_ptr<StoreSlot>> PdsService::Find(
    std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = stores_.find(id);
  if (it == stores_.end()) return NotFound("unknown-store", id);
  return it->second;
}

absl::StatusOr<std::shared_ptr<StoreSlot>> PdsService::FindOwned(
    const PrincipalId& actor, std::string_view id) const {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot, Find(id));
  // The owner never changes, so no store lock is needed to read it.
  if (slot->header.owner != actor) return PermissionDenied("not-owner", id);
  return slot;
}

absl::StatusOr<StoreInfo> PdsService::CreateStore(
    const MemberId& owner, std::vector<FieldSpec> schema, Hosting hosting) {
  if (options_.members == nullptr || !options_.members->IsMember(owner)) {
    return NotFound("unknown-member", owner);
  }
  if (schema.empty()) return InvalidArgument("empty-schema");
  std::set<std::string> names;
  for (const FieldSpec& f : schema) {
    if (!names.insert(f.name).second) {
      return InvalidArgument("duplicate-field", f.name);
    }
  }
  if (hosting.kind == HostingKind::kMember && hosting.endpoint.empty()) {
    return InvalidArgument("bad-endpoint");
  }
  if (hosting.kind == HostingKind::kCooperative) hosting.endpoint.clear();

  auto slot = std::make_shared<StoreSlot>();
  slot->key = crypto::GenerateAeadKey();
  slot->header.store_id = options_.ids->Next("store");
  slot->header.owner = owner;
  slot->header.hosting = std::move(hosting);
  slot->header.schema = std::move(schema);
  slot->header.created_at = options_.clock->Now();
  slot->header.key_scope = options_.vault->scope_id();
  slot->header.wrapped_key =
      options_.vault->Wrap(slot->key, slot->header.store_id);
  slot->path = PathFor(slot->header);
  slot->sync = options_.sync_writes;
  if (!slot->path.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(slot->path.parent_path(), ec);
    if (ec) return Internal("persistence-dir", ec.message());
  }
  COOP_RETURN_IF_ERROR(slot->Rewrite());
  COOP_RETURN_IF_ERROR(Audit(owner, "create", slot->header.store_id));
  StoreInfo info = slot->Info();
  std::unique_lock lock(mu_);
  if (slot->header.hosting.kind == HostingKind::kMember) {
    EndpointFor(slot->header.hosting.endpoint).Attach(slot);
  }
  stores_[slot->header.store_id] = std::move(slot);
  return info;
}

absl::StatusOr<std::vector<std::string>> PdsService::Ingest(
    const PrincipalId& actor, std::string_view store_id,
    const std::vector<Json>& records) {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot,
                        FindOwned(actor, store_id));
  std::unique_lock lock(slot->mu);
  if (slot->header.status != StoreStatus::kActive) {
    return FailedPrecondition("store-suspended", store_id);
  }
  const std::vector<FieldSpec>& schema = slot->header.schema;
  std::vector<std::vector<FieldValue>> parsed;
  parsed.reserve(records.size());
  for (const Json& record : records) {
    if (!record.is_object()) return InvalidArgument("schema-violation");
    std::vector<FieldValue> values;
    values.reserve(schema.size());
    for (const FieldSpec& f : schema) {
      auto it = record.find(f.name);
      if (it == record.end()) return InvalidArgument("schema-violation", f.name);
      absl::StatusOr<FieldValue> v = ValueFromJson(f.kind, *it);
      if (!v.ok()) return InvalidArgument("schema-violation", f.name);
      values.push_back(*std::move(v));
    }
    for (const auto& [key, unused] : record.items()) {
      if (FindField(schema, key) == nullptr) {
        return InvalidArgument("schema-violation", key);
      }
    }
    parsed.push_back(std::move(values));
  }

  const Timestamp now = options_.clock->Now();
  std::vector<SealedRecord> sealed;
  std::vector<std::string> ids;
  for (const std::vector<FieldValue>& values : parsed) {
    std::string id = options_.ids->Next("rec");
    sealed.push_back(SealedRecord{
        id, now,
        crypto::AeadSeal(slot->key, EncodeValues(schema, values),
                         RecordAad(store_id, id))});
    ids.push_back(std::move(id));
  }
  COOP_RETURN_IF_ERROR(slot->AppendFrames(sealed));
  COOP_RETURN_IF_ERROR(
      Audit(actor, "ingest", store_id,
            {{"count", std::to_string(ids.size())}}));
  for (size_t i = 0; i < ids.size(); ++i) {
    slot->ids.push_back(ids[i]);
    slot->values.push_back(std::move(parsed[i]));
    slot->sealed.push_back(std::move(sealed[i]));
  }
  return ids;
}

absl::StatusOr<size_t> PdsService::Remove(const PrincipalId& actor,
                                          std::string_view store_id,
                                          const RecordSelector& selector) {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot,
                        FindOwned(actor, store_id));
  std::unique_lock lock(slot->mu);
  const std::set<std::string> wanted(selector.record_ids.begin(),
                                     selector.record_ids.end());
  StoreSlot kept;
  size_t removed = 0;
  for (size_t i = 0; i < slot->ids.size(); ++i) {
    if (selector.all || wanted.contains(slot->ids[i])) {
      ++removed;
      continue;
    }
    kept.ids.push_back(std::move(slot->ids[i]));
    kept.values.push_back(std::move(slot->values[i]));
    kept.sealed.push_back(std::move(slot->sealed[i]));
  }
  slot->ids = std::move(kept.ids);
  slot->values = std::move(kept.values);
  slot->sealed = std::move(kept.sealed);
  COOP_RETURN_IF_ERROR(slot->Rewrite());
  COOP_RETURN_IF_ERROR(Audit(actor, "remove", store_id,
                             {{"count", std::to_string(removed)}}));
  return removed;
}

absl::StatusOr<StoreInfo> PdsService::SetStatus(const PrincipalId& actor,
                                                std::string_view store_id,
                                                StoreStatus status) {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot,
                        FindOwned(actor, store_id));
  std::unique_lock lock(slot->mu);
  if (slot->header.status != status) {
    slot->header.status = status;
    COOP_RETURN_IF_ERROR(slot->Rewrite());
  }
  COOP_RETURN_IF_ERROR(Audit(
      actor, status == StoreStatus::kActive ? "activate" : "suspend",
      store_id));
  return slot->Info();
}

absl::StatusOr<dsl::LocalResult> PdsService::LocalEvaluate(
    std::string_view store_id, const dsl::CompiledAlgorithm& algorithm,
    std::string_view credential) const {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot, Find(store_id));
  if (slot->header.hosting.kind == HostingKind::kMember) {
    const MemberHostedEndpoint* endpoint;
    {
      std::shared_lock lock(mu_);
      endpoint = endpoints_.at(slot->header.hosting.endpoint).get();
    }
    const std::string request =
        Json{{"store_id", std::string(store_id)},
             {"algorithm", dsl::CompiledAlgorithmToJson(algorithm)},
             {"credential", std::string(credential)}}
            .dump();
    COOP_ASSIGN_OR_RETURN(dsl::LocalResult result,
                          DecodeEndpointResponse(endpoint->Handle(request)));
    if (result.program_digest != algorithm.digest ||
        result.store_id != store_id) {
      return Internal("endpoint-result-mismatch", store_id);
    }
    return result;
  }
  COOP_RETURN_IF_ERROR(options_.validator->ValidateExecution(
      credential, algorithm.algo, slot->header.owner));
  return slot->Evaluate(algorithm);
}

absl::StatusOr<StoreInfo> PdsService::Info(std::string_view store_id) const {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot, Find(store_id));
  std::shared_lock lock(slot->mu);
  return slot->Info();
}

std::vector<StoreInfo> PdsService::StoresOf(const MemberId& owner) const {
  std::vector<StoreInfo> out;
  for (StoreInfo& info : AllStores()) {
    if (info.owner == owner) out.push_back(std::move(info));
  }
  return out;
}

std::vector<StoreInfo> PdsService::AllStores() const {
  std::vector<std::shared_ptr<StoreSlot>> slots;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, slot] : stores_) slots.push_back(slot);
  }
  std::vector<StoreInfo> out;
  for (const auto& slot : slots) {
    std::shared_lock lock(slot->mu);
    out.push_back(slot->Info());
  }
  return out;
}

absl::StatusOr<Json> PdsService::ReadRecords(const PrincipalId& actor,
                                             std::string_view store_id) const {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot,
                        FindOwned(actor, store_id));
  std::shared_lock lock(slot->mu);
  if (slot->header.status != StoreStatus::kActive) {
    return FailedPrecondition("store-suspended", store_id);
  }
  Json out = Json::array();
  for (size_t i = 0; i < slot->ids.size(); ++i) {
    Json values = Json::object();
    for (size_t f = 0; f < slot->header.schema.size(); ++f) {
      values[slot->header.schema[f].name] = ValueToJson(slot->values[i][f]);
    }
    out.push_back(Json{{"record_id", slot->ids[i]},
                       {"ingested_at",
                        FormatTimestamp(slot->sealed[i].ingested_at)},
                       {"values", std::move(values)}});
  }
  return out;
}

absl::StatusOr<std::string> PdsService::ExportArchive(
    const PrincipalId& actor, std::string_view store_id) const {
  COOP_ASSIGN_OR_RETURN(std::shared_ptr<StoreSlot> slot,
                        FindOwned(actor, store_id));
  std::shared_lock lock(slot->mu);
  if (slot->header.status != StoreStatus::kActive) {
    return FailedPrecondition("store-suspended", store_id);
  }
  COOP_RETURN_IF_ERROR(Audit(actor, "export", store_id));
  return SerializeStoreFile(slot->header, slot->sealed);
}

absl::StatusOr<StoreInfo> PdsService::ImportArchive(const PrincipalId& actor,
                                                    std::string_view archive) {
  COOP_ASSIGN_OR_RETURN(StoreFile parsed, ParseStoreFile(archive));
  if (parsed.header.owner != actor) return PermissionDenied("not-owner");
  if (!SafeId(parsed.header.store_id)) {
    return InvalidArgument("corrupt-store-file", "store_id");
  }
  auto slot = std::make_shared<StoreSlot>();
  COOP_ASSIGN_OR_RETURN(slot->key,
                        options_.vault->Unwrap(parsed.header.wrapped_key,
                                               parsed.header.store_id));
  slot->header = std::move(parsed.header);
  slot->sealed = std::move(parsed.records);
  COOP_RETURN_IF_ERROR(OpenSlotRecords(*slot));
  slot->path = PathFor(slot->header);
  slot->sync = options_.sync_writes;

  std::unique_lock lock(mu_);
  if (stores_.contains(slot->header.store_id)) {
    return AlreadyExists("duplicate-store", slot->header.store_id);
  }
  if (!slot->path.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(slot->path.parent_path(), ec);
    if (ec) return Internal("persistence-dir", ec.message());
  }
  COOP_RETURN_IF_ERROR(slot->Rewrite());
  COOP_RETURN_IF_ERROR(Audit(actor, "import", slot->header.store_id));
  if (slot->header.hosting.kind == HostingKind::kMember) {
    EndpointFor(slot->header.hosting.endpoint).Attach(slot);
  }
  StoreInfo info = slot->Info();
  stores_[slot->header.store_id] = std::move(slot);
  return info;
}

}  // namespace coop::pds
