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

#include "coop/registry/manifest.h"

#include <set>
#include <string>
#include <utility>

#include "coop/common/crypto.h"
#include "coop/common/status.h"

namespace coop::registry {
namespace {

const std::set<std::string>& ManifestFields() {
  static const auto* fields = new std::set<std::string>{
      "algo_id",     "version",      "title",  "lay_description",
      "output_mode", "requires",     "purpose_tags", "source",
      "visibility",  "vetting",      "manual_review_passed"};
  return *fields;
}

absl::StatusOr<VettingStatus> VettingFromJson(const Json& json) {
  if (!json.is_object()) return InvalidArgument("bad-manifest", "vetting");
  for (const auto& [k, v] : json.items()) {
    if (k != "state" && k != "checked_at" && k != "findings") {
      return InvalidArgument("unknown-field", "vetting." + k);
    }
  }
  VettingStatus status;
  std::string state = json.value("state", "draft");
  if (state == "draft") {
    status.state = VettingState::kDraft;
  } else if (state == "vetted") {
    status.state = VettingState::kVetted;
  } else if (state == "rejected") {
    status.state = VettingState::kRejected;
  } else {
    return InvalidArgument("bad-manifest", "vetting.state");
  }
  if (json.contains("checked_at")) {
    COOP_ASSIGN_OR_RETURN(
        status.checked_at,
        ParseTimestamp(json["checked_at"].get<std::string>()));
  }
  if (json.contains("findings")) {
    for (const Json& f : json["findings"]) {
      Finding finding;
      finding.rule_id = f.value("rule_id", "");
      finding.location = f.value("location", "");
      finding.message = f.value("message", "");
      finding.severity = f.value("severity", "error") == "warning"
                             ? Severity::kWarning
                             : Severity::kError;
      status.findings.push_back(std::move(finding));
    }
  }
  return status;
}

}  // namespace

bool VettingStatus::HasErrors() const {
  for (const Finding& f : findings) {
    if (f.severity == Severity::kError) return true;
  }
  return false;
}

std::string_view OutputModeName(OutputMode mode) {
  return mode == OutputMode::kAggregate ? "aggregate" : "subject";
}

std::string_view VisibilityName(Visibility v) {
  return v == Visibility::kPublic ? "public" : "cooperative-private";
}

std::string_view VettingStateName(VettingState s) {
  switch (s) {
    case VettingState::kDraft: return "draft";
    case VettingState::kVetted: return "vetted";
    case VettingState::kRejected: return "rejected";
  }
  return "draft";
}

Json VettingStatusToJson(const VettingStatus& status) {
  Json findings = Json::array();
  for (const Finding& f : status.findings) {
    findings.push_back(
        {{"rule_id", f.rule_id},
         {"location", f.location},
         {"message", f.message},
         {"severity", f.severity == Severity::kError ? "error" : "warning"}});
  }
  return Json{{"state", VettingStateName(status.state)},
              {"checked_at", FormatTimestamp(status.checked_at)},
              {"findings", std::move(findings)}};
}

std::string AlgorithmManifest::DescriptionDigest() const {
  return crypto::Sha256Hex(lay_description);
}

Json AlgorithmManifest::ToJson() const {
  Json j = MetadataJson();
  j["source"] = source;
  return j;
}

Json AlgorithmManifest::MetadataJson() const {
  return Json{{"algo_id", algo_id},
              {"version", version},
              {"title", title},
              {"lay_description", lay_description},
              {"output_mode", OutputModeName(output_mode)},
              {"requires", SchemaToJson(required_fields)},
              {"purpose_tags", purpose_tags},
              {"visibility", VisibilityName(visibility)},
              {"vetting", VettingStatusToJson(vetting)},
              {"manual_review_passed", manual_review_passed}};
}

absl::StatusOr<AlgorithmManifest> AlgorithmManifest::FromJson(
    const Json& json) {
  if (!json.is_object()) return InvalidArgument("bad-manifest");
  for (const auto& [k, v] : json.items()) {
    if (!ManifestFields().contains(k)) {
      return InvalidArgument("unknown-field", k);
    }
  }
  AlgorithmManifest m;
  try {
    m.algo_id = json.at("algo_id").get<std::string>();
    if (!json.at("version").is_number_integer()) {
      return InvalidArgument("bad-manifest", "version");
    }
    m.version = json.at("version").get<int>();
    m.title = json.at("title").get<std::string>();
    m.lay_description = json.value("lay_description", "");
    std::string mode = json.at("output_mode").get<std::string>();
    if (mode == "aggregate") {
      m.output_mode = OutputMode::kAggregate;
    } else if (mode == "subject") {
      m.output_mode = OutputMode::kSubject;
    } else {
      return InvalidArgument("bad-manifest", "output_mode");
    }
    COOP_ASSIGN_OR_RETURN(m.required_fields,
                          SchemaFromJson(json.value("requires", Json::array())));
    m.purpose_tags = json.value("purpose_tags", std::vector<std::string>{});
    m.source = json.at("source").get<std::string>();
    std::string vis = json.value("visibility", "public");
    if (vis == "public") {
      m.visibility = Visibility::kPublic;
    } else if (vis == "cooperative-private") {
      m.visibility = Visibility::kCooperativePrivate;
    } else {
      return InvalidArgument("bad-manifest", "visibility");
    }
    if (json.contains("vetting")) {
      COOP_ASSIGN_OR_RETURN(m.vetting, VettingFromJson(json["vetting"]));
    }
    m.manual_review_passed = json.value("manual_review_passed", false);
  } catch (const Json::exception& e) {
    return InvalidArgument("bad-manifest", e.what());
  }
  if (m.algo_id.empty()) return InvalidArgument("bad-manifest", "algo_id");
  if (m.version < 1) return InvalidArgument("bad-manifest", "version");
  return m;
}

}  // namespace coop::registry
