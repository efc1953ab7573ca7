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

#include <filesystem>
#include <string>

#include "coop/audit/audit_log.h"
#include "coop/common/status.h"
#include "coop/registry/manifest.h"
#include "coop/registry/registry.h"
#include "coop/registry/vetting.h"
#include "gtest/gtest.h"

namespace coop::registry {
namespace {

namespace fs = std::filesystem;

AlgorithmManifest Manifest(std::string id, std::string source,
                           std::vector<FieldSpec> fields = {
                               {"amount", FieldKind::kNumber, "EUR"},
                               {"region", FieldKind::kText, ""}}) {
  AlgorithmManifest m;
  m.algo_id = std::move(id);
  m.title = "Test algorithm";
  m.lay_description = "Adds up amounts per region.";
  m.required_fields = std::move(fields);
  m.purpose_tags = {"research"};
  m.source = std::move(source);
  m.manual_review_passed = true;
  return m;
}

std::set<std::string> ErrorRules(const VettingStatus& s) {
  std::set<std::string> out;
  for (const Finding& f : s.findings) {
    if (f.severity == Severity::kError) out.insert(f.rule_id);
  }
  return out;
}

TEST(Vet, AcceptsGuardedGroupedAggregate) {
  VettingStatus s = Vet(Manifest("a", "groupby(region, mean(amount / amount)) where amount > 0"), 7);
  EXPECT_EQ(s.state, VettingState::kVetted);
  EXPECT_TRUE(s.findings.empty());
  EXPECT_EQ(s.checked_at, 7);
}

TEST(Vet, FindingsCarrySourceLocations) {
  VettingStatus s = Vet(Manifest("a", "sum(amount / amount)"), 0);
  EXPECT_EQ(s.state, VettingState::kRejected);
  ASSERT_EQ(s.findings.size(), 1u);
  EXPECT_EQ(s.findings[0].rule_id, "R3");
  EXPECT_EQ(s.findings[0].location, "1:14");
}

TEST(Vet, ReportsEveryViolatedRule) {
  VettingStatus s = Vet(Manifest("a", "groupby(amount, salary / amount)"), 0);
  EXPECT_EQ(ErrorRules(s), (std::set<std::string>{"R1", "R2", "R3", "R4"}));
}

TEST(Vet, ParseErrorsAreFindings) {
  VettingStatus s = Vet(Manifest("a", "sum(amount"), 0);
  EXPECT_EQ(s.state, VettingState::kRejected);
  ASSERT_EQ(s.findings.size(), 1u);
  EXPECT_EQ(s.findings[0].rule_id, "PARSE");
  EXPECT_EQ(s.findings[0].location, "1:11");
}

TEST(Vet, ModeKeywordMustMatchManifest) {
  AlgorithmManifest m = Manifest("a", "subject sum(amount)");
  EXPECT_EQ(ErrorRules(Vet(m, 0)), std::set<std::string>{"MODE"});
  m.output_mode = OutputMode::kSubject;
  EXPECT_TRUE(ErrorRules(Vet(m, 0)).empty());
}

TEST(Vet, TextFieldsCannotBeArithmetic) {
  EXPECT_EQ(ErrorRules(Vet(Manifest("a", "sum(region)"), 0)), std::set<std::string>{"TYPE"});
}

TEST(Vet, HistogramShapeChecked) {
  EXPECT_EQ(ErrorRules(Vet(Manifest("a", "histogram(amount, 10, 0, 1)"), 0)),
            std::set<std::string>{"HIST"});
  EXPECT_EQ(ErrorRules(Vet(Manifest("a", "histogram(amount, 0, 1000000, 1)"), 0)),
            std::set<std::string>{"HIST"});
}

TEST(Vet, MissingReviewIsOnlyAWarning) {
  AlgorithmManifest m = Manifest("a", "sum(amount)");
  m.manual_review_passed = false;
  VettingStatus s = Vet(m, 0);
  EXPECT_EQ(s.state, VettingState::kVetted);
  ASSERT_EQ(s.findings.size(), 1u);
  EXPECT_EQ(s.findings[0].severity, Severity::kWarning);
}

TEST(Vet, DuplicateRequiresEntries) {
  AlgorithmManifest m = Manifest("a", "sum(amount)", {{"amount", FieldKind::kNumber, ""},
                                                      {"amount", FieldKind::kNumber, ""}});
  EXPECT_EQ(ErrorRules(Vet(m, 0)), std::set<std::string>{"META"});
}

TEST(Manifest, JsonRoundTripAndStrictness) {
  AlgorithmManifest m = Manifest("totals", "groupby(region, sum(amount))");
  m.visibility = Visibility::kCooperativePrivate;
  m.output_mode = OutputMode::kSubject;
  absl::StatusOr<AlgorithmManifest> back = AlgorithmManifest::FromJson(m.ToJson());
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->ToJson(), m.ToJson());
  EXPECT_EQ(back->DescriptionDigest(), m.DescriptionDigest());

  Json extra = m.ToJson();
  extra["surprise"] = 1;
  EXPECT_EQ(ErrorSlug(AlgorithmManifest::FromJson(extra).status()), "unknown-field");
  Json bad_mode = m.ToJson();
  bad_mode["output_mode"] = "row";
  EXPECT_FALSE(AlgorithmManifest::FromJson(bad_mode).ok());
  EXPECT_FALSE(m.MetadataJson().contains("source"));
}

class RegistryTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("coop-registry-" + std::string(::testing::UnitTest::GetInstance()
                                                ->current_test_info()
                                                ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    audit_ = *audit::AuditLog::Open("", &clock_, false);
    registry_ = *AlgorithmRegistry::Open(dir_ / "registry.jsonl", &clock_, audit_.get(), false);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  ManualClock clock_{1767225600};
  std::unique_ptr<audit::AuditLog> audit_;
  std::unique_ptr<AlgorithmRegistry> registry_;
};

TEST_F(RegistryTest, RegistersVettedEntriesOnce) {
  absl::StatusOr<AlgoRef> ref = registry_->Register("s", Manifest("a", "sum(amount)"));
  ASSERT_TRUE(ref.ok()) << ref.status();
  EXPECT_EQ(registry_->Get(*ref)->vetting.state, VettingState::kVetted);
  EXPECT_EQ(ErrorSlug(registry_->Register("s", Manifest("a", "count()")).status()), "duplicate");
  AlgorithmManifest v2 = Manifest("a", "count()");
  v2.version = 2;
  EXPECT_TRUE(registry_->Register("s", v2).ok());
  const std::vector<audit::Event> events = audit_->Snapshot();
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back().type, audit::EventType::kVetting);
}

TEST_F(RegistryTest, RejectsUnvettedAndUndescribed) {
  absl::Status s = registry_->Register("s", Manifest("a", "amount")).status();
  EXPECT_EQ(ErrorSlug(s), "not-vetted");
  AlgorithmManifest quiet = Manifest("b", "sum(amount)");
  quiet.lay_description.clear();
  EXPECT_EQ(ErrorSlug(registry_->Register("s", quiet).status()), "lay-description-required");
  EXPECT_FALSE(registry_->Get({"a", 1}).ok());
}

TEST_F(RegistryTest, DraftsCanBeVettedLater) {
  ASSERT_TRUE(registry_->Submit("s", Manifest("d", "sum(amount)")).ok());
  EXPECT_EQ(registry_->Get({"d", 1})->vetting.state, VettingState::kDraft);
  EXPECT_TRUE(registry_->List(Role::kSteward).empty());
  absl::StatusOr<VettingStatus> v = registry_->VetEntry("s", {"d", 1});
  ASSERT_TRUE(v.ok());
  EXPECT_EQ(v->state, VettingState::kVetted);
  EXPECT_EQ(registry_->List(Role::kSteward).size(), 1u);
}

TEST_F(RegistryTest, ListingDependsOnViewer) {
  AlgorithmManifest open = Manifest("open", "sum(amount)");
  AlgorithmManifest internal = Manifest("internal", "count()");
  internal.visibility = Visibility::kCooperativePrivate;
  ASSERT_TRUE(registry_->Register("s", open).ok());
  ASSERT_TRUE(registry_->Register("s", internal).ok());
  EXPECT_EQ(registry_->List(Role::kQuerier).size(), 1u);
  EXPECT_EQ(registry_->List(Role::kMember).size(), 2u);
  EXPECT_EQ(registry_->List(Role::kSteward).size(), 2u);
  EXPECT_TRUE(registry_->List(Role::kOperator).empty());
}

TEST_F(RegistryTest, SurvivesReopen) {
  ASSERT_TRUE(registry_->Register("s", Manifest("a", "sum(amount)")).ok());
  registry_.reset();
  registry_ = *AlgorithmRegistry::Open(dir_ / "registry.jsonl", &clock_, audit_.get(), false);
  absl::StatusOr<AlgorithmManifest> m = registry_->Get({"a", 1});
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->source, "sum(amount)");
  EXPECT_EQ(m->vetting.state, VettingState::kVetted);
}

}  // namespace
}  // namespace coop::registry
