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

#include "coop/assertion/assertion_service.h"

#include <algorithm>
#include <mutex>
#include <utility>

#include "absl/time/civil_time.h"
#include "absl/time/time.h"
#include "coop/assertion/document.h"
#include "coop/common/crypto.h"
#include "coop/common/status.h"
#include "coop/common/strings.h"

namespace coop::assertion {
namespace {

absl::Status Bad(std::string_view what) {
  return InvalidArgument("bad-assertion-record", what);
}

absl::CivilDay DayOf(Timestamp t) {
  return absl::ToCivilDay(absl::FromUnixSeconds(t), absl::UTCTimeZone());
}

int AgeOn(const absl::CivilDay& born, const absl::CivilDay& today) {
  int age = static_cast<int>(today.year() - born.year());
  if (today.month() < born.month() ||
      (today.month() == born.month() && today.day() < born.day())) {
    --age;
  }
  return age;
}

}  // namespace

std::string_view ValidityClassName(ValidityClass c) {
  return c == ValidityClass::kTransactional ? "transactional"
                                            : "static-attribute";
}

std::string StaticAttribute::Slug() const {
  if (kind == Kind::kYearOfBirth) return "year-of-birth";
  return coop::StrCat("age-over-", years);
}

Json StoredAssertion::ToJson() const {
  return Json{{"assertion_id", assertion_id},
              {"member", member},
              {"audience", audience},
              {"class", ValidityClassName(validity_class)},
              {"slug", slug},
              {"published", published},
              {"document", document},
              {"audit_seq", audit_seq}};
}

absl::StatusOr<StoredAssertion> StoredAssertion::FromJson(const Json& json) {
  StoredAssertion a;
  try {
    a.assertion_id = json.at("assertion_id").get<std::string>();
    a.member = json.at("member").get<std::string>();
    a.audience = json.at("audience").get<std::string>();
    a.validity_class = json.at("class") == "transactional"
                           ? ValidityClass::kTransactional
                           : ValidityClass::kStaticAttribute;
    a.slug = json.at("slug").get<std::string>();
    a.published = json.at("published").get<bool>();
    a.document = json.at("document").get<std::string>();
    a.audit_seq = json.at("audit_seq").get<uint64_t>();
  } catch (const Json::exception&) {
    return Bad("assertion");
  }
  COOP_ASSIGN_OR_RETURN(Json doc, ParseCanonical(a.document));
  a.payload = doc["payload"];
  return a;
}

Json DigitalReceipt::ToJson() const {
  return Json{{"receipt_id", receipt_id},
              {"assertion_id", assertion_id},
              {"service_provider", service_provider},
              {"accepted_terms", accepted_terms},
              {"signed_at", FormatTimestamp(signed_at)},
              {"signature", crypto::Base64Encode(signature)},
              {"audit_seq", audit_seq}};
}

absl::StatusOr<std::unique_ptr<AssertionService>> AssertionService::Open(
    Options o) {
  if (o.config.transactional_max <= 0 || o.config.static_max <= 0) {
    return InvalidArgument("bad-config", "validity");
  }
  std::unique_ptr<Journal> journal = std::make_unique<Journal>();
  std::vector<Json> lines;
  if (!o.path.empty()) {
    COOP_ASSIGN_OR_RETURN(lines, Journal::ReadAll(o.path));
    COOP_ASSIGN_OR_RETURN(journal, Journal::Open(o.path, o.sync_writes));
  }
  std::unique_ptr<AssertionService> svc(
      new AssertionService(std::move(o), std::move(journal)));
  for (const Json& line : lines) {
    const std::string kind = line.value("kind", "");
    const Json& body = line["body"];
    if (kind == "assertion") {
      COOP_ASSIGN_OR_RETURN(StoredAssertion a, StoredAssertion::FromJson(body));
      if (a.published) {
        svc->published_[{a.member, a.slug}] = a.assertion_id;
      }
      COOP_ASSIGN_OR_RETURN(
          Timestamp issued,
          ParseTimestamp(a.payload.value("issued_at", std::string())));
      Timestamp& last = svc->last_issued_[a.member];
      last = std::max(last, issued);
      svc->assertions_[a.assertion_id] = std::move(a);
    } else if (kind == "receipt") {
      DigitalReceipt r;
      try {
        r.receipt_id = body.at("receipt_id").get<std::string>();
        r.assertion_id = body.at("assertion_id").get<std::string>();
        r.service_provider = body.at("service_provider").get<std::string>();
        r.accepted_terms = body.at("accepted_terms");
        COOP_ASSIGN_OR_RETURN(
            r.signed_at, ParseTimestamp(body.at("signed_at").get<std::string>()));
        COOP_ASSIGN_OR_RETURN(
            r.signature,
            crypto::Base64Decode(body.at("signature").get<std::string>()));
        r.audit_seq = body.at("audit_seq").get<uint64_t>();
      } catch (const Json::exception&) {
        return Bad("receipt");
      }
      svc->receipts_.emplace(r.assertion_id, std::move(r));
    } else {
      return Bad("kind");
    }
  }
  return svc;
}

std::vector<std::string> AssertionService::TermsOfUse(
    std::string_view purpose, std::string_view audience) const {
  return {
      crypto::Sha256Hex(coop::StrCat(
          "assertion-terms/1\nissuer=", options_.keys->issuer(),
          "\npurpose=", purpose, "\naudience=", audience,
          "\nThe recipient uses this assertion for the stated purpose only "
          "and keeps it no longer than required by law.")),
      crypto::Sha256Hex(coop::StrCat("copyright-notice/1\n",
                                     options_.config.copyright_notice)),
  };
}

Timestamp AssertionService::NextIssueTime(const MemberId& member) {
  // Successive issuances to one member get strictly increasing issue times.
  std::unique_lock lock(mu_);
  Timestamp& last = last_issued_[member];
  last = std::max(options_.clock->Now(), last + 1);
  return last;
}

absl::StatusOr<StoredAssertion> AssertionService::SignAndStore(
    const MemberId& member, Json payload, ValidityClass validity_class,
    std::string slug, bool publish, uint64_t directive_seq,
    std::map<std::string, std::string> refs) {
  COOP_ASSIGN_OR_RETURN(std::string signed_bytes, Canonicalize(payload));
  const CooperativeKeys::Signature sig = options_.keys->Sign(signed_bytes);

  StoredAssertion a;
  a.assertion_id = payload["assertion_id"].get<std::string>();
  a.member = member;
  a.audience = payload["audience"].get<std::string>();
  a.validity_class = validity_class;
  a.slug = std::move(slug);
  a.published = publish;
  a.document = AssembleDocument(payload, sig.key_id, sig.value);
  a.payload = std::move(payload);

  refs["assertion"] = a.assertion_id;
  refs[audit::kRefSubject] = member;
  refs[audit::kRefDirectiveSeq] = std::to_string(directive_seq);
  refs["key_id"] = sig.key_id;
  COOP_ASSIGN_OR_RETURN(
      a.audit_seq, options_.audit->Append({audit::EventType::kAssertion,
                                           "issue", member, std::move(refs)}));
  COOP_RETURN_IF_ERROR(
      journal_->Append(Json{{"kind", "assertion"}, {"body", a.ToJson()}}));
  std::unique_lock lock(mu_);
  if (publish) published_[{a.member, a.slug}] = a.assertion_id;
  assertions_[a.assertion_id] = a;
  return a;
}

absl::StatusOr<StoredAssertion> AssertionService::Issue(
    const authz::Principal& caller, const IssueRequest& request) {
  if (caller.role != Role::kMember || caller.id != request.subject) {
    return PermissionDenied("member-directive-required");
  }
  if (request.validity <= 0) return InvalidArgument("bad-validity");
  if (request.validity > options_.config.transactional_max) {
    return InvalidArgument("validity-exceeded");
  }
  if (request.audience.empty()) return InvalidArgument("bad-audience");
  COOP_ASSIGN_OR_RETURN(registry::AlgorithmManifest manifest,
                        options_.algorithms->Get(request.algo));
  if (manifest.vetting.state != registry::VettingState::kVetted) {
    return FailedPrecondition("not-vetted", request.algo.ToString());
  }
  if (manifest.output_mode != registry::OutputMode::kSubject) {
    return InvalidArgument("not-subject-mode", request.algo.ToString());
  }
  if (std::find(manifest.purpose_tags.begin(), manifest.purpose_tags.end(),
                request.purpose) == manifest.purpose_tags.end()) {
    return InvalidArgument("purpose-not-allowed", request.purpose);
  }

  COOP_ASSIGN_OR_RETURN(
      authz::DirectiveTicket ticket,
      options_.consent->RecordDirective(request.subject, request.algo,
                                        request.purpose, request.audience));
  COOP_ASSIGN_OR_RETURN(engine::QueryResult result,
                        options_.engine->ExecuteForDirective(ticket));

  Json cells = Json::array();
  for (const engine::ResultCell& c : result.cells) {
    cells.push_back(Json{{"group", c.group ? Json(*c.group) : Json(nullptr)},
                         {"values", c.values}});
  }
  const Timestamp issued_at = NextIssueTime(request.subject);
  const bool disclose = request.disclose_identity;
  Json payload{
      {"assertion_id", options_.ids->Next("asrt")},
      {"issuer", options_.keys->issuer()},
      {"subject", disclose ? request.subject
                           : options_.keys->Pseudonym(request.subject,
                                                      request.audience)},
      {"subject_kind", disclose ? "member" : "pairwise-pseudonym"},
      {"algo", AlgoRefToJson(request.algo)},
      {"result", std::move(cells)},
      {"issued_at", FormatTimestamp(issued_at)},
      {"expires_at", FormatTimestamp(issued_at + request.validity)},
      {"purpose", request.purpose},
      {"audience", request.audience},
      {"terms_of_use", TermsOfUse(request.purpose, request.audience)},
      {"copyright_notice", options_.config.copyright_notice},
      {"class", ValidityClassName(ValidityClass::kTransactional)}};
  return SignAndStore(request.subject, std::move(payload),
                      ValidityClass::kTransactional, "", false,
                      ticket.directive.audit_seq,
                      {{"execution_seq", std::to_string(result.audit_ref)},
                       {"audience", request.audience}});
}

absl::StatusOr<StoredAssertion> AssertionService::IssueStatic(
    const authz::Principal& caller, const StaticAttribute& attribute,
    bool publish, Duration validity) {
  if (caller.role != Role::kMember) {
    return PermissionDenied("member-directive-required");
  }
  if (validity <= 0) validity = options_.config.static_max;
  if (validity > options_.config.static_max) {
    return InvalidArgument("validity-exceeded");
  }
  if (attribute.kind == StaticAttribute::Kind::kAgeOver &&
      (attribute.years <= 0 || attribute.years > 150)) {
    return InvalidArgument("bad-attribute");
  }
  absl::CivilDay born;
  if (caller.birth_date.empty() ||
      !absl::ParseCivilTime(AbslView(caller.birth_date), &born)) {
    return FailedPrecondition("attribute-unavailable");
  }
  const std::string slug = attribute.Slug();
  COOP_ASSIGN_OR_RETURN(
      authz::DirectiveTicket ticket,
      options_.consent->RecordDirective(caller.id, AlgoRef{slug, 0}, slug,
                                        authz::kAnyAudience));
  const Timestamp issued_at = NextIssueTime(caller.id);
  Json value = attribute.kind == StaticAttribute::Kind::kAgeOver
                   ? Json(AgeOn(born, DayOf(issued_at)) >= attribute.years)
                   : Json(static_cast<int64_t>(born.year()));
  Json payload{
      {"assertion_id", options_.ids->Next("asrt")},
      {"issuer", options_.keys->issuer()},
      {"subject", caller.id},
      {"subject_kind", "member"},
      {"algo", nullptr},
      {"result", {{"attribute", slug}, {"value", std::move(value)}}},
      {"issued_at", FormatTimestamp(issued_at)},
      {"expires_at", FormatTimestamp(issued_at + validity)},
      {"purpose", slug},
      {"audience", authz::kAnyAudience},
      {"terms_of_use", TermsOfUse(slug, authz::kAnyAudience)},
      {"copyright_notice", options_.config.copyright_notice},
      {"class", ValidityClassName(ValidityClass::kStaticAttribute)}};
  return SignAndStore(caller.id, std::move(payload),
                      ValidityClass::kStaticAttribute, slug, publish,
                      ticket.directive.audit_seq,
                      {{"published", publish ? "true" : "false"}});
}

absl::StatusOr<std::vector<StoredAssertion>> AssertionService::ReissueCycle(
    const authz::Principal& caller, const IssueRequest& request, int n) {
  if (n < 0) return InvalidArgument("bad-count");
  std::vector<StoredAssertion> out;
  for (int i = 0; i < n; ++i) {
    COOP_ASSIGN_OR_RETURN(StoredAssertion a, Issue(caller, request));
    out.push_back(std::move(a));
  }
  return out;
}

absl::StatusOr<StoredAssertion> AssertionService::Get(
    const PrincipalId& viewer, std::string_view assertion_id) const {
  std::shared_lock lock(mu_);
  auto it = assertions_.find(assertion_id);
  if (it == assertions_.end() ||
      (it->second.member != viewer && it->second.audience != viewer)) {
    return NotFound("unknown-assertion", assertion_id);
  }
  return it->second;
}

absl::StatusOr<StoredAssertion> AssertionService::GetPublished(
    std::string_view member, std::string_view slug) const {
  std::shared_lock lock(mu_);
  auto it = published_.find({std::string(member), std::string(slug)});
  if (it == published_.end()) return NotFound("not-published");
  return assertions_.find(it->second)->second;
}

absl::StatusOr<DigitalReceipt> AssertionService::RecordReceipt(
    const authz::Principal& caller, std::string_view assertion_id,
    const Json& receipt_document) {
  StoredAssertion assertion;
  {
    std::shared_lock lock(mu_);
    auto it = assertions_.find(assertion_id);
    if (it == assertions_.end()) {
      return NotFound("unknown-assertion", assertion_id);
    }
    assertion = it->second;
  }
  if (!receipt_document.is_object() || !receipt_document.contains("payload") ||
      !receipt_document.contains("signature") ||
      !receipt_document["signature"].is_object() ||
      !receipt_document["signature"].contains("value") ||
      !receipt_document["signature"]["value"].is_string()) {
    return InvalidArgument("bad-receipt");
  }
  const Json& payload = receipt_document["payload"];
  if (!payload.is_object() || payload.size() != 4 ||
      payload.value("service_provider", Json()) != caller.id ||
      payload.value("assertion_id", Json()) != assertion_id ||
      !payload.contains("accepted_terms") || !payload.contains("signed_at") ||
      !payload["signed_at"].is_string()) {
    return PermissionDenied("not-service-provider");
  }
  if (assertion.audience != authz::kAnyAudience &&
      assertion.audience != caller.id) {
    return PermissionDenied("audience-mismatch");
  }
  absl::StatusOr<std::string> signature =
      crypto::Base64Decode(receipt_document["signature"]["value"].get<std::string>());
  absl::StatusOr<std::string> signed_bytes = Canonicalize(payload);
  if (caller.public_key.empty() || !signature.ok() || !signed_bytes.ok() ||
      !crypto::VerifySignature(caller.public_key, *signed_bytes, *signature)) {
    return PermissionDenied("bad-signature");
  }
  if (payload["accepted_terms"] != assertion.payload["terms_of_use"]) {
    return InvalidArgument("terms-mismatch");
  }
  DigitalReceipt r;
  r.assertion_id = std::string(assertion_id);
  r.service_provider = caller.id;
  r.accepted_terms = payload["accepted_terms"];
  COOP_ASSIGN_OR_RETURN(r.signed_at,
                        ParseTimestamp(payload["signed_at"].get<std::string>()));
  r.signature = *std::move(signature);

  std::unique_lock lock(mu_);
  r.receipt_id = options_.ids->Next("rcpt");
  COOP_ASSIGN_OR_RETURN(
      r.audit_seq,
      options_.audit->Append({audit::EventType::kReceipt,
                              "record",
                              caller.id,
                              {{"receipt", r.receipt_id},
                               {"assertion", r.assertion_id},
                               {audit::kRefSubject, assertion.member}}}));
  COOP_RETURN_IF_ERROR(
      journal_->Append(Json{{"kind", "receipt"}, {"body", r.ToJson()}}));
  receipts_.emplace(r.assertion_id, r);
  return r;
}

std::vector<DigitalReceipt> AssertionService::ReceiptsFor(
    std::string_view assertion_id) const {
  std::shared_lock lock(mu_);
  std::vector<DigitalReceipt> out;
  auto [lo, hi] = receipts_.equal_range(assertion_id);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

std::vector<StoredAssertion> AssertionService::All() const {
  std::shared_lock lock(mu_);
  std::vector<StoredAssertion> out;
  for (const auto& [id, a] : assertions_) out.push_back(a);
  return out;
}

}  // namespace coop::assertion
