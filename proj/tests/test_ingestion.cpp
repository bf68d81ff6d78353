// Copyright 2026 The Estate Events Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

#include "estate/error.hpp"
#include "estate/ingestion.hpp"
#include "estate/json_codec.hpp"
#include "support.hpp"

namespace estate {
namespace {

using nlohmann::json;

std::string record(const std::string& id, const std::string& user, const std::string& text,
                   const std::string& created_at) {
  return json{{"id", id}, {"user", user}, {"text", text}, {"created_at", created_at}}.dump();
}

// HMAC-SHA256 truncated to 16 bytes under key bytes 0..31, from an
// independent implementation.
TEST(Pseudonymize, GoldenValues) {
  const auto key = testing::test_key(0);
  EXPECT_EQ(pseudonymize("alice", key), "6eefad2bed97b6d93ee663d67a44b460");
  EXPECT_EQ(pseudonymize("bob", key), "928931744d17c7eea7df47260a5a0fc7");
  EXPECT_EQ(pseudonymize("@carol_1", key), "f983e92c7c04cae07ce05bb5c783e659");
  EXPECT_EQ(pseudonymize("Zoë", key), "895eaa5b6ad2cd8a4aadf561368adafa");
  EXPECT_EQ(pseudonymize("x", key), "b3fb46c7f2e3cc97b59aa0d9eeb0fbc8");
}

TEST(Pseudonymize, DeterministicProperty) {
  const auto key = testing::test_key(3);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto h = testing::random_word(rng, 1, 20);
    const auto first = pseudonymize(h, key);
    ASSERT_EQ(pseudonymize(h, key), first);
    ASSERT_TRUE(looks_like_pseudonym(first));
  }
}

TEST(Pseudonymize, KeySensitive) {
  EXPECT_NE(pseudonymize("alice", testing::test_key(0)), pseudonymize("alice", testing::test_key(1)));
}

TEST(Pseudonymize, RejectsEmptyHandleAndShortKey) {
  EXPECT_THROW(pseudonymize("", testing::test_key()), ValidationError);
  EXPECT_THROW(PseudonymKey(std::vector<std::uint8_t>(15)), ValidationError);
  EXPECT_THROW(PseudonymKey::from_hex("zz"), ValidationError);
  EXPECT_NO_THROW(PseudonymKey::from_hex(" 000102030405060708090a0b0c0d0e0f \n"));
}

TEST(Normalize, TrimsTokenizesConvertsTime) {
  RawPost raw{"  p1 ", "alice", "  Lift BROKEN at #Blk123! ", "2024-03-04T08:00:00+08:00", 1.35, 103.8};
  const auto p = normalize(raw, testing::test_key());
  EXPECT_EQ(p.post_id, "p1");
  EXPECT_EQ(p.text, "Lift BROKEN at #Blk123!");
  EXPECT_EQ(p.tokens, (std::vector<std::string>{"lift", "broken", "at", "blk123"}));
  EXPECT_EQ(format_rfc3339(p.created_at), "2024-03-04T00:00:00Z");
  EXPECT_EQ(p.author_pseudonym, pseudonymize("alice", testing::test_key()));
  ASSERT_TRUE(p.geotag);
}

TEST(Normalize, RejectsBadInput) {
  const auto key = testing::test_key();
  EXPECT_THROW(normalize({"", "a", "t", "2024-01-01T00:00:00Z", {}, {}}, key), ValidationError);
  EXPECT_THROW(normalize({"i", "a", "   ", "2024-01-01T00:00:00Z", {}, {}}, key), ValidationError);
  EXPECT_THROW(normalize({"i", "a", "t", "yesterday", {}, {}}, key), ValidationError);
  EXPECT_THROW(normalize({"i", "a", "t", "2024-01-01T00:00:00Z", 91.0, 0.0}, key), ValidationError);
  EXPECT_THROW(normalize({"i", "a", "t", "2024-01-01T00:00:00Z", 1.0, {}}, key), ValidationError);
}

TEST(IngestLines, ThreeValid) {
  std::stringstream in;
  for (int i = 0; i < 3; ++i) {
    in << record("p" + std::to_string(i), "u", "text", "2024-01-01T00:00:0" + std::to_string(i) + "Z") << "\n";
  }
  EXPECT_EQ(ingest_lines(in, testing::test_key()).corpus.size(), 3u);
}

TEST(IngestLines, SkipsMalformed) {
  std::stringstream in;
  in << record("a", "u", "one", "2024-01-01T00:00:00Z") << "\n"
     << "{broken json\n"
     << record("b", "u", "two", "2024-01-01T00:00:01Z") << "\n";
  const auto r = ingest_lines(in, testing::test_key());
  EXPECT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.skipped, 1u);
}

TEST(IngestLines, SortsByTime) {
  std::stringstream in;
  in << record("late", "u", "x", "2024-01-02T00:00:00Z") << "\n"
     << record("early", "u", "x", "2024-01-01T00:00:00Z") << "\n";
  const auto r = ingest_lines(in, testing::test_key());
  EXPECT_EQ(r.corpus.posts[0].post_id, "early");
  EXPECT_TRUE(validate_corpus(r.corpus).empty());
}

TEST(IngestLines, DuplicateIdSkipped) {
  std::stringstream in;
  in << record("a", "u", "one", "2024-01-01T00:00:00Z") << "\n"
     << record("a", "u", "two", "2024-01-01T00:00:01Z") << "\n";
  const auto r = ingest_lines(in, testing::test_key());
  EXPECT_EQ(r.corpus.size(), 1u);
  EXPECT_EQ(r.skipped, 1u);
}

TEST(IngestLines, NothingParsesIsEmptyCorpus) {
  std::stringstream in("garbage\n\n");
  EXPECT_THROW(ingest_lines(in, testing::test_key()), EmptyCorpusError);
}

TEST(IngestBatch, MissingFileIsIoError) {
  EXPECT_THROW(ingest_batch("/nonexistent/file.jsonl", testing::test_key()), IoError);
}

TEST(IngestLines, GoldFields) {
  std::stringstream in;
  in << R"({"id":"a","user":"u","text":"lift","created_at":"2024-01-01T00:00:00Z","estate":1,"topic":"Infrastructure","gold_lat":1.3,"gold_lon":103.8,"gold_place":"P1"})"
     << "\n";
  const auto c = ingest_lines(in, testing::test_key()).corpus;
  EXPECT_EQ(c.gold_estate.at("a"), EstateLabel(1));
  EXPECT_EQ(c.gold_topic.at("a"), Topic::kInfrastructure);
  EXPECT_EQ(c.gold_location.at("a"), (GeoPoint{1.3, 103.8}));
  EXPECT_EQ(c.gold_place.at("a"), "P1");
}

std::string random_corpus_file(std::mt19937_64& rng, int n, std::vector<std::string>* handles) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    // Handles use uppercase letters and digits; texts are lowercase words,
    // so a handle can never occur inside a text by accident.
    std::string handle = "U" + std::to_string(rng() % 1000000) + "X";
    handles->push_back(handle);
    std::string text = testing::random_word(rng) + " " + testing::random_word(rng);
    json j{{"id", "id" + std::to_string(i)}, {"user", handle}, {"text", text},
           {"created_at", "2024-01-01T00:00:00Z"}};
    if (i % 3 == 0) {
      j["lat"] = testing::uniform(rng, -90, 90);
      j["lon"] = testing::uniform(rng, -180, 180);
    }
    if (i % 2 == 0) j["estate"] = static_cast<int>(rng() % 2);
    out += j.dump() + "\n";
  }
  return out;
}

TEST(IngestLines, ReingestIsIdentity) {
  std::mt19937_64 rng(21);
  std::vector<std::string> handles;
  std::stringstream in(random_corpus_file(rng, 300, &handles));
  const auto first = ingest_lines(in, testing::test_key()).corpus;
  std::stringstream written;
  write_corpus(first, written);
  std::stringstream again(written.str());
  // A different key must not matter: records already carry pseudonyms.
  EXPECT_EQ(ingest_lines(again, testing::test_key(9)).corpus, first);
}

TEST(IngestLines, NoRawHandleInOutput) {
  std::mt19937_64 rng(22);
  std::vector<std::string> handles;
  std::stringstream in(random_corpus_file(rng, 500, &handles));
  const auto c = ingest_lines(in, testing::test_key()).corpus;
  std::stringstream written;
  write_corpus(c, written);
  std::string events;
  for (const auto& p : c.posts) events += post_to_json(p).dump();
  for (const auto& h : handles) {
    ASSERT_EQ(written.str().find(h), std::string::npos) << h;
    ASSERT_EQ(events.find(h), std::string::npos) << h;
  }
}

TEST(IngestStream, EmptySource) {
  int calls = 0;
  const auto s = ingest_stream([] { return std::optional<std::string>(); }, testing::test_key(),
                               [&](IngestedRecord&&) { ++calls; });
  EXPECT_EQ(s, (StreamSummary{0, 0}));
  EXPECT_EQ(calls, 0);
}

TEST(IngestStream, InOrderExactlyOnce) {
  std::vector<std::string> lines;
  for (int i = 0; i < 10; ++i) lines.push_back(record("p" + std::to_string(i), "u", "t", "2024-01-01T00:00:00Z"));
  std::size_t next = 0;
  std::vector<std::string> seen;
  const auto s = ingest_stream(
      [&]() -> std::optional<std::string> {
        if (next == lines.size()) return std::nullopt;
        return lines[next++];
      },
      testing::test_key(), [&](IngestedRecord&& r) { seen.push_back(r.post.post_id); });
  EXPECT_EQ(s, (StreamSummary{10, 0}));
  ASSERT_EQ(seen.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(seen[static_cast<std::size_t>(i)], "p" + std::to_string(i));
}

TEST(IngestStream, CountsRejections) {
  std::vector<std::string> lines;
  for (int i = 0; i < 7; ++i) {
    lines.push_back(i == 2 || i == 5 ? std::string("{\"id\":1}") : record("p" + std::to_string(i), "u", "t", "2024-01-01T00:00:00Z"));
  }
  std::size_t next = 0;
  const auto s = ingest_stream(
      [&]() -> std::optional<std::string> {
        if (next == lines.size()) return std::nullopt;
        return lines[next++];
      },
      testing::test_key(), [](IngestedRecord&&) {});
  EXPECT_EQ(s, (StreamSummary{5, 2}));
}

TEST(PseudonymKey, FromFileAndEnv) {
  testing::TempDir dir;
  {
    std::ofstream(dir / "key") << "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f\n";
  }
  EXPECT_EQ(pseudonymize("alice", PseudonymKey::from_file(dir / "key")), "6eefad2bed97b6d93ee663d67a44b460");
  EXPECT_THROW(PseudonymKey::from_file(dir / "nope"), IoError);
  ::setenv("ESTATE_TEST_KEY", "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f", 1);
  EXPECT_EQ(pseudonymize("bob", PseudonymKey::from_env("ESTATE_TEST_KEY")), "928931744d17c7eea7df47260a5a0fc7");
  ::unsetenv("ESTATE_TEST_KEY");
  EXPECT_THROW(PseudonymKey::from_env("ESTATE_TEST_KEY"), ValidationError);
}

}  // namespace
}  // namespace estate
