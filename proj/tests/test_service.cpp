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

#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"

#include "estate/backend.hpp"
#include "estate/json_codec.hpp"
#include "estate/service.hpp"
#include "support.hpp"

namespace estate {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

json record(const std::string& id, const std::string& text, const std::string& user = "@resident_42",
            const std::string& at = "2026-03-01T09:30:00+08:00") {
  return {{"id", id}, {"user", user}, {"text", text}, {"created_at", at}};
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    remote_ = std::make_unique<InferenceServer>(testing::keyword_estate_model(), testing::keyword_topic_model());
    remote_port_ = remote_->start();
  }

  void start(PipelineConfig config, std::optional<GoldLabels> gold = std::nullopt, std::size_t body_limit = 1 << 20) {
    auto pipeline = std::make_unique<Pipeline>(std::move(config), nullptr,
                                               EventStore::open(dir_.path(), {.sync = false, .read_only = false}));
    Service::Options options;
    options.request_body_limit = body_limit;
    options.retry_interval = 50ms;
    service_ = std::make_unique<Service>(std::move(pipeline), testing::test_key(), std::move(gold), options);
    port_ = service_->start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void start_native(std::optional<GoldLabels> gold = std::nullopt, std::size_t body_limit = 1 << 20) {
    start(testing::native_config(testing::keyword_estate_model(), testing::keyword_topic_model()), std::move(gold),
          body_limit);
  }

  void start_remote() {
    auto c = testing::native_config(testing::keyword_estate_model(), testing::keyword_topic_model());
    const std::string url = "http://127.0.0.1:" + std::to_string(remote_port_);
    c.estate_backend = ClassifierBackend::remote(url, 2000ms, LabelSpace::kEstate);
    c.topic_backend = ClassifierBackend::remote(url, 2000ms, LabelSpace::kTopic);
    start(std::move(c));
  }

  std::pair<int, json> post(const json& body) { return post_raw(body.dump()); }

  std::pair<int, json> post_raw(const std::string& body) {
    auto res = client_->Post("/v1/posts", body, "application/json");
    EXPECT_TRUE(res);
    if (!res) return {0, nullptr};
    return {res->status, json::parse(res->body, nullptr, false)};
  }

  std::pair<int, json> get(const std::string& path) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {0, nullptr};
    return {res->status, json::parse(res->body, nullptr, false)};
  }

  void TearDown() override {
    if (service_) service_->stop();
    service_.reset();
    remote_->stop();
  }

  testing::TempDir dir_;
  std::unique_ptr<InferenceServer> remote_;
  int remote_port_ = 0;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(ServiceTest, PostsTwoRecords) {
  start_native();
  const auto [status, body] = post(json::array({record("a", "lift broken again"), record("b", "nice lunch")}));
  EXPECT_EQ(status, 200);
  const auto& out = body.at("outcomes");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0]["status"], "processed");
  EXPECT_EQ(out[0]["estate_label"], 1);
  EXPECT_EQ(out[0]["topic"], "Infrastructure");
  EXPECT_EQ(out[1]["estate_label"], 0);
  EXPECT_TRUE(out[1]["topic"].is_null());
  EXPECT_NE(out[0]["pipeline_seq"], out[1]["pipeline_seq"]);
}

TEST_F(ServiceTest, SingleObjectAndDuplicate) {
  start_native();
  EXPECT_EQ(post(record("a", "noise")).second["outcomes"][0]["status"], "processed");
  EXPECT_EQ(post(record("a", "noise")).second["outcomes"][0]["status"], "duplicate");
}

TEST_F(ServiceTest, RejectsBadRecordsIndividually) {
  start_native();
  const auto [status, body] = post(json::array({record("a", "noise"), record("b", "x", "@u", "yesterday"), 7}));
  EXPECT_EQ(status, 200);
  EXPECT_EQ(body["outcomes"][0]["status"], "processed");
  EXPECT_EQ(body["outcomes"][1]["status"], "rejected");
  EXPECT_EQ(body["outcomes"][1]["post_id"], "b");
  EXPECT_EQ(body["outcomes"][2]["status"], "rejected");
}

TEST_F(ServiceTest, NonJsonIs400) {
  start_native();
  EXPECT_EQ(post_raw("not json").first, 400);
  EXPECT_EQ(post_raw("42").first, 400);
}

TEST_F(ServiceTest, OversizeIs413) {
  start_native(std::nullopt, 1024);
  const auto res = client_->Post("/v1/posts", std::string(4096, ' ') + "{}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 413);
}

TEST_F(ServiceTest, ParksWhenRemoteDownAndRecovers) {
  start_remote();
  remote_->set_available(false);
  const auto [status, body] = post(record("a", "parking lot full"));
  EXPECT_EQ(status, 200);
  EXPECT_EQ(body["outcomes"][0]["status"], "parked");
  EXPECT_FALSE(get("/v1/health").second["backends"]["estate"].get<bool>());
  EXPECT_EQ(get("/v1/health").second["parked"], 1);

  remote_->set_available(true);
  const auto deadline = std::chrono::steady_clock::now() + 10s;
  while (service_->pipeline().parked() > 0 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(20ms);
  }
  const auto events = get("/v1/events").second["events"];
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0]["topic_label"], "Parking");
}

TEST_F(ServiceTest, EventsQueries) {
  start_native();
  EXPECT_EQ(get("/v1/events").second, (json{{"events", json::array()}, {"next_cursor", nullptr}}));
  post(json::array({record("a", "parking", "@u", "2026-03-01T00:00:00Z"),
                    record("b", "noise", "@u", "2026-03-02T00:00:00Z"),
                    record("c", "parking", "@u", "2026-03-03T00:00:00Z"),
                    record("d", "sunny", "@u", "2026-03-04T00:00:00Z")}));
  auto parking = get("/v1/events?topic=Parking").second["events"];
  ASSERT_EQ(parking.size(), 2u);
  EXPECT_EQ(parking[0]["post"]["post_id"], "a");
  EXPECT_EQ(parking[1]["post"]["post_id"], "c");

  EXPECT_EQ(get("/v1/events?estate_only=true").second["events"].size(), 3u);
  EXPECT_EQ(get("/v1/events?from=2026-03-02T00:00:00Z&to=2026-03-03T00:00:00Z").second["events"].size(), 2u);

  const auto page = get("/v1/events?limit=3").second;
  ASSERT_EQ(page["events"].size(), 3u);
  ASSERT_EQ(page["next_cursor"], 2);
  const auto rest = get("/v1/events?limit=3&cursor=2").second;
  ASSERT_EQ(rest["events"].size(), 1u);
  EXPECT_EQ(rest["events"][0]["post"]["post_id"], "d");
  EXPECT_TRUE(rest["next_cursor"].is_null());
}

TEST_F(ServiceTest, EventsRejectsBadParameters) {
  start_native();
  EXPECT_EQ(get("/v1/events?from=2026-03-02T00:00:00Z&to=2026-03-01T00:00:00Z").first, 400);
  const auto [status, body] = get("/v1/events?topic=Plumbing");
  EXPECT_EQ(status, 400);
  EXPECT_EQ(body["valid_topics"], (json{"Infrastructure", "Parking", "Noise", "Others"}));
  EXPECT_EQ(get("/v1/events?from=yesterday").first, 400);
  EXPECT_EQ(get("/v1/events?limit=0").first, 400);
  EXPECT_EQ(get("/v1/events?limit=100000").first, 400);
  EXPECT_EQ(get("/v1/events?estate_only=maybe").first, 400);
  EXPECT_EQ(get("/v1/events?cursor=abc").first, 400);
}

TEST_F(ServiceTest, MetricsWithoutGoldIs404) {
  start_native();
  EXPECT_EQ(get("/v1/metrics?task=estate").first, 404);
  EXPECT_EQ(get("/v1/metrics?task=sentiment").first, 400);
  EXPECT_EQ(get("/v1/metrics").first, 400);
}

TEST_F(ServiceTest, MetricsReportsAgainstGold) {
  GoldLabels gold;
  gold.estate = {{"a", 1}, {"b", 1}, {"c", 0}};
  gold.topic = {{"a", 1}, {"b", 1}};
  start_native(gold);
  post(json::array({record("a", "parking"), record("b", "noise"), record("c", "sunny")}));
  const auto [status, topic] = get("/v1/metrics?task=topic");
  ASSERT_EQ(status, 200);
  EXPECT_EQ(topic["total"], 2);
  EXPECT_DOUBLE_EQ(topic["overall_accuracy"].get<double>(), 0.5);
  ASSERT_TRUE(topic.contains("weighted_avg"));
  EXPECT_EQ(topic["weighted_avg"]["class"], "Weighted Avg");
  const auto estate = get("/v1/metrics?task=estate").second;
  EXPECT_DOUBLE_EQ(estate["overall_accuracy"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(estate["positive_f1"].get<double>(), 1.0);
}

TEST_F(ServiceTest, Health) {
  start_native();
  auto h = get("/v1/health").second;
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["high_water"], -1);
  EXPECT_EQ(h["parked"], 0);
  json batch = json::array();
  for (int i = 0; i < 5; ++i) batch.push_back(record("p" + std::to_string(i), "noise"));
  post(batch);
  h = get("/v1/health").second;
  EXPECT_EQ(h["high_water"], 4);
  EXPECT_TRUE(h["backends"]["estate"].get<bool>());
}

TEST_F(ServiceTest, MatchesInProcessPipeline) {
  start_native();
  const json batch = json::array({record("a", "lift leak"), record("b", "others"), record("c", "cat video")});
  const auto out = post(batch).second["outcomes"];

  testing::TempDir other;
  Pipeline reference(testing::native_config(testing::keyword_estate_model(), testing::keyword_topic_model()),
                     nullptr, EventStore::open(other.path(), {.sync = false, .read_only = false}));
  const auto stored = get("/v1/events").second["events"];
  ASSERT_EQ(stored.size(), 3u);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto expected = reference.process_post(normalize(raw_post_from_json(batch[i]), testing::test_key()));
    EXPECT_EQ(out[i]["estate_score"].get<double>(), expected.event->estate_score);
    EXPECT_EQ(event_from_json(stored[i]), *expected.event);
  }
}

TEST_F(ServiceTest, ConcurrentPostsGetDistinctSequence) {
  start_native();
  constexpr int kThreads = 8;
  constexpr int kPerThread = 10;
  std::vector<std::thread> threads;
  std::mutex mu;
  std::set<std::int64_t> seqs;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", port_);
      for (int i = 0; i < kPerThread; ++i) {
        const auto id = "t" + std::to_string(t) + "_" + std::to_string(i);
        auto res = c.Post("/v1/posts", record(id, "noise").dump(), "application/json");
        ASSERT_TRUE(res);
        const auto seq = json::parse(res->body)["outcomes"][0]["pipeline_seq"].get<std::int64_t>();
        std::lock_guard lock(mu);
        seqs.insert(seq);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(seqs.size(), static_cast<std::size_t>(kThreads * kPerThread));
  EXPECT_EQ(*seqs.rbegin(), kThreads * kPerThread - 1);
}

TEST_F(ServiceTest, RawHandlesNeverLeave) {
  start_native();
  const std::string handle = "@very_identifiable_person";
  const auto posted = client_->Post("/v1/posts", json::array({record("a", "noise", handle)}).dump(),
                                    "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->body.find("identifiable"), std::string::npos);
  const auto events = client_->Get("/v1/events");
  ASSERT_TRUE(events);
  EXPECT_EQ(events->body.find("identifiable"), std::string::npos);
  const auto stored = json::parse(events->body)["events"][0]["post"]["author_pseudonym"].get<std::string>();
  EXPECT_EQ(stored, pseudonymize(handle, testing::test_key()));
}

}  // namespace
}  // namespace estate
