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

#include <random>

#include <gtest/gtest.h>

#include "estate/core_types.hpp"
#include "estate/error.hpp"
#include "estate/json_codec.hpp"
#include "estate/time.hpp"
#include "support.hpp"

namespace estate {
namespace {

using testing::make_post;

TEST(Topic, IndexToName) {
  EXPECT_EQ(topic_name(topic_from_index(0)), "Infrastructure");
  EXPECT_EQ(topic_name(topic_from_index(1)), "Parking");
  EXPECT_EQ(topic_name(topic_from_index(2)), "Noise");
  EXPECT_EQ(topic_name(topic_from_index(3)), "Others");
  EXPECT_THROW(topic_from_index(4), ValidationError);
  EXPECT_THROW(topic_from_index(-1), ValidationError);
}

TEST(Topic, NameRoundTrip) {
  for (Topic t : kAllTopics) EXPECT_EQ(topic_from_name(topic_name(t)), t);
  EXPECT_FALSE(topic_from_name("Pest Control"));
}

TEST(EstateLabel, RejectsOutOfRange) {
  EXPECT_TRUE(EstateLabel(1).related());
  EXPECT_FALSE(EstateLabel(0).related());
  EXPECT_THROW(EstateLabel(2), ValidationError);
}

TEST(ValidateCorpus, EmptyIsValid) { EXPECT_TRUE(validate_corpus(Corpus{}).empty()); }

TEST(ValidateCorpus, DuplicateId) {
  Corpus c;
  c.posts = {make_post("a", "one", 10), make_post("a", "two", 20)};
  const auto v = validate_corpus(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].what, "duplicate id");
}

TEST(ValidateCorpus, DanglingGoldKey) {
  Corpus c;
  c.posts = {make_post("a", "one")};
  c.gold_topic.emplace("zzz", Topic::kNoise);
  const auto v = validate_corpus(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].what, "dangling gold key");
}

TEST(ValidateCorpus, OrderingAndTokens) {
  Corpus c;
  c.posts = {make_post("b", "one", 20), make_post("a", "two", 10)};
  EXPECT_FALSE(validate_corpus(c).empty());
  sort_posts(c.posts);
  EXPECT_TRUE(validate_corpus(c).empty());
  c.posts[0].tokens.push_back("extra");
  EXPECT_FALSE(validate_corpus(c).empty());
}

TEST(SortPosts, TiesByPostId) {
  std::vector<Post> posts = {make_post("c", "x", 5), make_post("a", "x", 5), make_post("b", "x", 1)};
  sort_posts(posts);
  EXPECT_EQ(posts[0].post_id, "b");
  EXPECT_EQ(posts[1].post_id, "a");
  EXPECT_EQ(posts[2].post_id, "c");
}

TEST(Argmax, FirstIndexTieBreakProperty) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> small(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(4);
    for (auto& x : v) x = small(rng) / 4.0;
    std::size_t expect = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > v[expect]) expect = i;
    }
    ASSERT_EQ(argmax(v), expect);
    for (std::size_t i = 0; i < expect; ++i) ASSERT_LT(v[i], v[expect]);
  }
  EXPECT_EQ(argmax(std::vector<double>{}), 0u);
}

TEST(CheckEvent, RoutingContract) {
  ClassifiedEvent e;
  e.post = make_post("a", "x");
  e.estate_label = EstateLabel(0);
  EXPECT_TRUE(check_event(e).empty());
  e.topic_label = Topic::kNoise;
  e.topic_scores = TopicScores{0.1, 0.1, 0.7, 0.1};
  EXPECT_FALSE(check_event(e).empty());
  e.estate_label = EstateLabel(1);
  EXPECT_TRUE(check_event(e).empty());
  e.topic_label = Topic::kParking;
  EXPECT_FALSE(check_event(e).empty());
}

TEST(CheckEvent, PoiLocationForbiddenWithGeotag) {
  ClassifiedEvent e;
  e.post = make_post("a", "x", 0, GeoPoint{1.3, 103.8});
  e.location = ResolvedLocation{Granularity::kPoi, "P1", "N1", {1.3, 103.8}, 1.0};
  EXPECT_FALSE(check_event(e).empty());
  e.post.geotag.reset();
  EXPECT_TRUE(check_event(e).empty());
}

TEST(Time, ParsesOffsetsToUtc) {
  EXPECT_EQ(parse_rfc3339("2024-03-04T08:00:00+08:00"), parse_rfc3339("2024-03-04T00:00:00Z"));
  EXPECT_EQ(parse_rfc3339("2024-03-04t00:00:00.999z"), parse_rfc3339("2024-03-04 00:00:00Z"));
  EXPECT_EQ(format_rfc3339(parse_rfc3339("2024-03-03T23:30:00-01:00")), "2024-03-04T00:30:00Z");
}

TEST(Time, RejectsMalformed) {
  for (const char* bad : {"", "2024-03-04", "2024-03-04T00:00:00", "2024-02-30T00:00:00Z",
                          "2024-03-04T24:00:00Z", "2024-03-04T00:00:00Zjunk", "2024-03-04T00:00:00+0800"}) {
    EXPECT_THROW(parse_rfc3339(bad), ValidationError) << bad;
  }
}

TEST(Time, DayOfWeekMondayFirst) {
  const auto monday = parse_rfc3339("2024-03-04T13:00:00Z");
  EXPECT_EQ(day_of_week(monday), 0);
  EXPECT_EQ(hour_of_day(monday), 13);
  EXPECT_EQ(day_of_week(parse_rfc3339("2024-03-10T23:59:59Z")), 6);
}

TEST(JsonCodec, EventRoundTripProperty) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    auto e = testing::random_event(rng, "id" + std::to_string(i), 1'700'000'000 + i);
    e.pipeline_seq = i;
    const auto line = serialize_event(e);
    EXPECT_EQ(parse_event(line), e);
    EXPECT_EQ(serialize_event(parse_event(line)), line);
  }
}

TEST(JsonCodec, TopicWrittenByName) {
  ClassifiedEvent e;
  e.post = make_post("a", "x");
  e.estate_label = EstateLabel(1);
  e.estate_score = 0.9;
  e.topic_label = Topic::kParking;
  e.topic_scores = TopicScores{0.1, 0.6, 0.2, 0.1};
  EXPECT_NE(serialize_event(e).find("\"topic_label\":\"Parking\""), std::string::npos);
}

TEST(JsonCodec, RejectsMalformed) {
  EXPECT_THROW(parse_event("not json"), SchemaError);
  EXPECT_THROW(parse_event("{\"post\":{}}"), SchemaError);
}

}  // namespace
}  // namespace estate
