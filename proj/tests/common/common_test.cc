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
#include <random>
#include <string>

#include "absl/strings/escaping.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/crypto.h"
#include "coop/common/ids.h"
#include "coop/common/journal.h"
#include "coop/common/schema.h"
#include "coop/common/status.h"
#include "coop/common/value.h"
#include "gtest/gtest.h"

namespace coop {
namespace {

std::string Unhex(std::string_view hex) { return absl::HexStringToBytes(std::string(hex)); }

TEST(CanonicalJson, SortsKeysAndDropsWhitespace) {
  Json v = ParseJson(R"({ "b": 1, "a": {"d": [1, 2], "c": "x"} })").value();
  EXPECT_EQ(*Canonicalize(v), R"({"a":{"c":"x","d":[1,2]},"b":1})");
}

TEST(CanonicalJson, RejectsNonCanonicalBytes) {
  EXPECT_TRUE(ParseCanonical(R"({"a":1,"b":2})").ok());
  EXPECT_EQ(ErrorSlug(ParseCanonical(R"({"b":2,"a":1})").status()), "non-canonical");
  EXPECT_EQ(ErrorSlug(ParseCanonical(R"({"a": 1})").status()), "non-canonical");
  EXPECT_EQ(ErrorSlug(ParseCanonical("{").status()), "malformed-json");
}

TEST(CanonicalJson, RejectsNonFiniteNumbers) {
  Json v = {{"x", std::numeric_limits<double>::infinity()}};
  EXPECT_EQ(ErrorSlug(Canonicalize(v).status()), "non-finite-number");
}

Json RandomJson(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> kind(0, depth > 2 ? 3 : 5);
  switch (kind(rng)) {
    case 0: return static_cast<int64_t>(rng() % 100000) - 50000;
    case 1: return std::string(1 + rng() % 6, static_cast<char>('a' + rng() % 26));
    case 2: return rng() % 2 == 0;
    case 3: return nullptr;
    case 4: {
      Json a = Json::array();
      for (int i = rng() % 4; i > 0; --i) a.push_back(RandomJson(rng, depth + 1));
      return a;
    }
    default: {
      Json o = Json::object();
      for (int i = rng() % 5; i > 0; --i) {
        o[std::string(1, static_cast<char>('a' + rng() % 26)) + std::to_string(i)] =
            RandomJson(rng, depth + 1);
      }
      return o;
    }
  }
}

TEST(CanonicalJson, CanonicalBytesAreAFixedPoint) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const Json v = RandomJson(rng, 0);
    const std::string bytes = *Canonicalize(v);
    auto back = ParseCanonical(bytes);
    ASSERT_TRUE(back.ok()) << bytes;
    EXPECT_EQ(*back, v);
    EXPECT_EQ(*Canonicalize(*back), bytes);
  }
}

TEST(Crypto, Sha256KnownVector) {
  EXPECT_EQ(crypto::Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Crypto, Base64RoundTrip) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 64; ++n) {
    std::string bytes(n, '\0');
    for (char& c : bytes) c = static_cast<char>(rng());
    EXPECT_EQ(*crypto::Base64Decode(crypto::Base64Encode(bytes)), bytes);
  }
  EXPECT_FALSE(crypto::Base64Decode("not base64!").ok());
}

// Ed25519 test vector 1 (empty message).
TEST(Crypto, SignatureMatchesPublishedVector) {
  auto key = crypto::SigningKey::FromSeed(
      Unhex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60"));
  ASSERT_TRUE(key.ok());
  EXPECT_EQ(crypto::HexEncode(key->public_key()),
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  EXPECT_EQ(crypto::HexEncode(key->Sign("")),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb882"
            "1590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
}

TEST(Crypto, SignaturesVerifyOnlyForTheSignedMessage) {
  crypto::SigningKey key = crypto::SigningKey::Generate();
  const std::string sig = key.Sign("payload");
  EXPECT_EQ(sig, key.Sign("payload"));
  EXPECT_TRUE(crypto::VerifySignature(key.public_key(), "payload", sig));
  EXPECT_FALSE(crypto::VerifySignature(key.public_key(), "payloaD", sig));
  EXPECT_FALSE(crypto::VerifySignature(crypto::SigningKey::Generate().public_key(),
                                       "payload", sig));
}

TEST(Crypto, AeadRejectsTamperingAndWrongContext) {
  crypto::SecretBytes key = crypto::GenerateAeadKey();
  const std::string sealed = crypto::AeadSeal(key, "secret record", "store-1");
  EXPECT_EQ(sealed.find("secret record"), std::string::npos);
  EXPECT_EQ(*crypto::AeadOpen(key, sealed, "store-1"), "secret record");
  EXPECT_FALSE(crypto::AeadOpen(key, sealed, "store-2").ok());
  EXPECT_FALSE(crypto::AeadOpen(crypto::GenerateAeadKey(), sealed, "store-1").ok());
  for (size_t i = 0; i < sealed.size(); ++i) {
    std::string bad = sealed;
    bad[i] ^= 0x01;
    EXPECT_FALSE(crypto::AeadOpen(key, bad, "store-1").ok()) << i;
  }
}

TEST(Crypto, ConstantTimeEquals) {
  EXPECT_TRUE(crypto::ConstantTimeEquals("abc", "abc"));
  EXPECT_FALSE(crypto::ConstantTimeEquals("abc", "abd"));
  EXPECT_FALSE(crypto::ConstantTimeEquals("abc", "abcd"));
}

TEST(Clock, TimestampsUseSecondPrecisionUtc) {
  EXPECT_EQ(FormatTimestamp(1772323200), "2026-03-01T00:00:00Z");
  EXPECT_EQ(*ParseTimestamp("2026-03-01T00:00:00Z"), 1772323200);
  EXPECT_FALSE(ParseTimestamp("2026-03-01 00:00:00").ok());
  EXPECT_FALSE(ParseTimestamp("2026-03-01T00:00:00.5Z").ok());
  for (Timestamp t : {Timestamp{0}, Timestamp{951782400}, Timestamp{4102444799}}) {
    EXPECT_EQ(*ParseTimestamp(FormatTimestamp(t)), t);
  }
}

TEST(Clock, ManualClockAdvances) {
  ManualClock clock(100);
  clock.Advance(kHour);
  EXPECT_EQ(clock.Now(), 100 + 3600);
}

TEST(Ids, SequentialIdsAreDistinctAndPrefixed) {
  SequentialIdSource ids;
  const std::string a = ids.Next("st");
  const std::string b = ids.Next("st");
  EXPECT_NE(a, b);
  EXPECT_EQ(a.rfind("st", 0), 0u);
  RandomIdSource random;
  EXPECT_NE(random.Next("x"), random.Next("x"));
}

TEST(Status, SlugsAndDetailsSurvive) {
  absl::Status s = NotFound("unknown-store", "st-1");
  SetDetail(s, "field", "amount");
  EXPECT_EQ(s.code(), absl::StatusCode::kNotFound);
  EXPECT_EQ(ErrorSlug(s), "unknown-store");
  EXPECT_EQ(GetDetail(s, "field"), "amount");
  EXPECT_EQ(ErrorSlug(absl::OkStatus()), "");
}

TEST(Journal, AppendsAndReadsBack) {
  const auto dir = std::filesystem::temp_directory_path() / "coop-journal-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    auto j = Journal::Open(dir / "log.jsonl", true);
    ASSERT_TRUE(j.ok());
    ASSERT_TRUE((*j)->Append(Json{{"n", 1}}).ok());
    ASSERT_TRUE((*j)->Append(Json{{"n", 2}}).ok());
  }
  auto entries = Journal::ReadAll(dir / "log.jsonl");
  ASSERT_TRUE(entries.ok());
  ASSERT_EQ(entries->size(), 2u);
  EXPECT_EQ((*entries)[1]["n"], 2);
  EXPECT_TRUE(Journal::ReadAll(dir / "missing.jsonl")->empty());

  ASSERT_TRUE(WriteFileAtomically(dir / "f", "one").ok());
  ASSERT_TRUE(WriteFileAtomically(dir / "f", "two").ok());
  EXPECT_EQ(*ReadFile(dir / "f"), "two");
  std::filesystem::remove_all(dir);
}

TEST(Schema, NamesRoundTrip) {
  for (Role r : {Role::kMember, Role::kQuerier, Role::kOperator, Role::kSteward,
                 Role::kCooperativeSelf}) {
    EXPECT_EQ(RoleFromName(RoleName(r)), r);
  }
  for (FieldKind k : {FieldKind::kNumber, FieldKind::kText, FieldKind::kTimestamp,
                      FieldKind::kGeo}) {
    EXPECT_EQ(FieldKindFromName(FieldKindName(k)), k);
  }
  EXPECT_FALSE(RoleFromName("admin").has_value());
  AlgoRef ref{"fare", 3};
  EXPECT_EQ(ref.ToString(), "fare@3");
  EXPECT_EQ(*AlgoRefFromJson(AlgoRefToJson(ref)), ref);
  std::vector<FieldSpec> schema = {{"fare", FieldKind::kNumber, "EUR"},
                                   {"pickup", FieldKind::kGeo, ""}};
  EXPECT_EQ(*SchemaFromJson(SchemaToJson(schema)), schema);
  EXPECT_EQ(FindField(schema, "pickup"), &schema[1]);
  EXPECT_EQ(FindField(schema, "nope"), nullptr);
}

TEST(Value, ParsesEachKind) {
  EXPECT_EQ(std::get<double>(*ValueFromJson(FieldKind::kNumber, 2.5)), 2.5);
  EXPECT_EQ(std::get<std::string>(*ValueFromJson(FieldKind::kText, "x")), "x");
  EXPECT_FALSE(ValueFromJson(FieldKind::kNumber, "2.5").ok());
  EXPECT_FALSE(ValueFromJson(FieldKind::kText, 3).ok());
  auto ts = ValueFromJson(FieldKind::kTimestamp, "2026-03-01T00:00:00Z");
  ASSERT_TRUE(ts.ok());
  EXPECT_EQ(NumericValue(*ts), 1772323200.0);
  EXPECT_EQ(ValueToJson(*ts), "2026-03-01T00:00:00Z");
  const Json geo = {{"lat", 42.3}, {"lon", -71.1}};
  EXPECT_EQ(ValueToJson(*ValueFromJson(FieldKind::kGeo, geo)), geo);
  EXPECT_FALSE(ValueFromJson(FieldKind::kGeo, Json{{"lat", 91}, {"lon", 0}}).ok());
}

}  // namespace
}  // namespace coop
