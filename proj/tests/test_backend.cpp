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

#include <future>
#include <random>

#include <gtest/gtest.h>

#include "estate/backend.hpp"
#include "estate/error.hpp"
#include "estate/text.hpp"
#include "support.hpp"

namespace estate {
namespace {

using namespace std::chrono_literals;

std::shared_ptr<const LinearModel> random_model(int classes, std::uint64_t seed) {
  auto m = std::make_shared<LinearModel>(classes);
  std::mt19937_64 rng(seed);
  for (auto& w : m->weights()) w = testing::uniform(rng, -3, 3);
  for (auto& b : m->bias()) b = testing::uniform(rng, -1, 1);
  return m;
}

TEST(NativeBackend, ZeroModelUniformLabelZero) {
  const auto b = ClassifierBackend::native(std::make_shared<LinearModel>(4), LabelSpace::kTopic);
  const auto p = b.classify(testing::make_post("a", "lift broken again"));
  EXPECT_EQ(p.label, 0);
  for (double s : p.scores) EXPECT_DOUBLE_EQ(s, 0.25);
}

TEST(NativeBackend, ClassCountMustFitSpace) {
  EXPECT_THROW(ClassifierBackend::native(std::make_shared<LinearModel>(4), LabelSpace::kEstate), ValidationError);
}

TEST(RemoteBackend, RejectsBadConfiguration) {
  EXPECT_THROW(ClassifierBackend::remote("ftp://x", 100ms, LabelSpace::kEstate), ValidationError);
  EXPECT_THROW(ClassifierBackend::remote("http://127.0.0.1:1", 0ms, LabelSpace::kEstate), ValidationError);
  EXPECT_THROW(ClassifierBackend::remote("http://127.0.0.1:1", 10ms, LabelSpace::kEstate, 0), ValidationError);
}

TEST(InferenceResponse, ArgmaxOfScores) {
  const auto p = parse_inference_response(R"({"label":1,"scores":[0.2,0.8]})", LabelSpace::kEstate, "e");
  EXPECT_EQ(p.label, 1);
  EXPECT_EQ(p.scores, (std::vector<double>{0.2, 0.8}));
}

TEST(InferenceResponse, RejectsProtocolViolations) {
  for (const char* body : {
           "nope",
           R"({"scores":[0.2,0.8]})",
           R"({"label":1})",
           R"({"label":0,"scores":[0.2,0.8]})",
           R"({"label":1,"scores":[0.2,0.7]})",
           R"({"label":1,"scores":[0.1,0.2,0.7]})",
           R"({"label":1,"scores":[-0.2,1.2]})",
           R"({"label":1,"scores":["a","b"]})",
       }) {
    try {
      parse_inference_response(body, LabelSpace::kEstate, "http://x:1");
      ADD_FAILURE() << body;
    } catch (const BackendUnavailable& e) {
      EXPECT_EQ(e.endpoint(), "http://x:1");
    }
  }
}

class Loopback : public ::testing::Test {
 protected:
  void SetUp() override {
    estate_ = random_model(2, 1);
    topic_ = random_model(4, 2);
    server_ = std::make_unique<InferenceServer>(estate_, topic_);
    port_ = server_->start();
    url_ = "http://127.0.0.1:" + std::to_string(port_);
  }

  std::shared_ptr<const LinearModel> estate_, topic_;
  std::unique_ptr<InferenceServer> server_;
  int port_ = 0;
  std::string url_;
};

TEST_F(Loopback, NativeAndRemoteAgree) {
  std::mt19937_64 rng(4);
  for (auto space : {LabelSpace::kEstate, LabelSpace::kTopic}) {
    const auto native = ClassifierBackend::native(space == LabelSpace::kEstate ? estate_ : topic_, space);
    const auto remote = ClassifierBackend::remote(url_, 2000ms, space);
    for (int i = 0; i < 50; ++i) {
      std::string text;
      for (int k = 0; k < 6; ++k) text += testing::random_word(rng) + " ";
      const auto post = testing::make_post("p" + std::to_string(i), text);
      const auto a = native.classify(post);
      const auto b = remote.classify(post);
      ASSERT_EQ(a.label, b.label);
      ASSERT_EQ(a.scores.size(), b.scores.size());
      for (std::size_t c = 0; c < a.scores.size(); ++c) ASSERT_NEAR(a.scores[c], b.scores[c], 1e-6);
    }
  }
}

TEST_F(Loopback, UnavailableServerRaisesWithEndpoint) {
  const auto remote = ClassifierBackend::remote(url_, 2000ms, LabelSpace::kEstate);
  EXPECT_TRUE(remote.reachable());
  server_->set_available(false);
  EXPECT_FALSE(remote.reachable());
  try {
    remote.classify_text("anything");
    FAIL();
  } catch (const BackendUnavailable& e) {
    EXPECT_EQ(e.endpoint(), url_);
  }
  server_->set_available(true);
  EXPECT_NO_THROW(remote.classify_text("anything"));
}

TEST_F(Loopback, MissingModelIsConflict) {
  InferenceServer only_estate(estate_, nullptr);
  const int port = only_estate.start();
  const auto remote = ClassifierBackend::remote("http://127.0.0.1:" + std::to_string(port), 2000ms,
                                                LabelSpace::kTopic);
  try {
    remote.classify_text("x");
    FAIL();
  } catch (const BackendUnavailable& e) {
    EXPECT_NE(std::string(e.what()).find("409"), std::string::npos);
  }
}

TEST_F(Loopback, ConcurrentRequestsUpToInflightCap) {
  const auto remote = ClassifierBackend::remote(url_, 5000ms, LabelSpace::kTopic, 4);
  std::vector<std::future<Prediction>> futures;
  for (int i = 0; i < 32; ++i) {
    futures.push_back(std::async(std::launch::async, [&remote, i] {
      return remote.classify_text("post number " + std::to_string(i));
    }));
  }
  for (auto& f : futures) EXPECT_EQ(f.get().scores.size(), 4u);
  EXPECT_GE(server_->requests_served(), 32u);
}

TEST(RemoteBackend, ConnectionRefused) {
  // Port 9 (discard) is not served in the sandbox.
  const auto remote = ClassifierBackend::remote("http://127.0.0.1:9", 200ms, LabelSpace::kEstate);
  EXPECT_FALSE(remote.reachable());
  EXPECT_THROW(remote.classify_text("x"), BackendUnavailable);
}

}  // namespace
}  // namespace estate
