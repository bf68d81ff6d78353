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

#include "estate/backend.hpp"

#include <cmath>
#include <regex>
#include <semaphore>

#include "httplib.h"

#include "estate/error.hpp"
#include "estate/text.hpp"

namespace estate {

using nlohmann::json;

struct ClassifierBackend::Remote {
  Remote(std::string u, std::chrono::milliseconds t, std::size_t cap)
      : url(std::move(u)), timeout(t), inflight(static_cast<std::ptrdiff_t>(cap)) {}

  std::string url;
  std::chrono::milliseconds timeout;
  std::counting_semaphore<4096> inflight;
};

ClassifierBackend ClassifierBackend::native(std::shared_ptr<const LinearModel> model,
                                            LabelSpace space) {
  if (!model) throw ValidationError("native backend needs a model");
  if (model->num_classes() != num_classes(space)) {
    throw ValidationError("model has " + std::to_string(model->num_classes()) +
                          " classes but the " + std::string(label_space_name(space)) +
                          " stage needs " + std::to_string(num_classes(space)));
  }
  ClassifierBackend b;
  b.kind_ = Kind::kNative;
  b.space_ = space;
  b.model_ = std::move(model);
  return b;
}

ClassifierBackend ClassifierBackend::remote(std::string url, std::chrono::milliseconds timeout,
                                            LabelSpace space, std::size_t max_inflight) {
  static const std::regex kUrl(R"(^http://[A-Za-z0-9.\-]+(:[0-9]{1,5})?/?$)");
  if (!std::regex_match(url, kUrl)) {
    throw ValidationError("invalid remote endpoint URL (expected http://host[:port]): " + url);
  }
  if (timeout.count() <= 0) throw ValidationError("remote timeout must be positive");
  if (max_inflight == 0 || max_inflight > 4096) {
    throw ValidationError("max in-flight remote requests must be in [1, 4096]");
  }
  if (url.back() == '/') url.pop_back();
  ClassifierBackend b;
  b.kind_ = Kind::kRemote;
  b.space_ = space;
  b.remote_ = std::make_shared<Remote>(std::move(url), timeout, max_inflight);
  return b;
}

const std::string& ClassifierBackend::endpoint() const {
  static const std::string kNative = "native";
  return remote_ ? remote_->url : kNative;
}

std::chrono::milliseconds ClassifierBackend::timeout() const {
  return remote_ ? remote_->timeout : std::chrono::milliseconds{0};
}

Prediction ClassifierBackend::classify(const Post& post) const {
  if (kind_ == Kind::kNative) return classify_features(featurize(post.tokens));
  return remote_classify(post.text);
}

Prediction ClassifierBackend::classify_text(std::string_view text) const {
  if (kind_ == Kind::kNative) return classify_features(featurize(tokenize(text)));
  return remote_classify(text);
}

Prediction ClassifierBackend::classify_features(const FeatureVector& features) const {
  if (!model_) throw ValidationError("classify_features needs a native backend");
  Prediction p;
  p.scores = model_->predict_proba(features);
  p.label = static_cast<int>(argmax(p.scores));
  return p;
}

namespace {

void configure(httplib::Client& cli, std::chrono::milliseconds timeout) {
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
}

}  // namespace

Prediction parse_inference_response(const std::string& body, LabelSpace space,
                                    const std::string& endpoint) {
  auto fail = [&](const std::string& why) -> BackendUnavailable {
    return BackendUnavailable(endpoint, "malformed inference response from " + endpoint + ": " + why);
  };
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw fail("not a JSON object");
  const auto label = j.find("label");
  const auto scores = j.find("scores");
  if (label == j.end() || !label->is_number_integer()) throw fail("missing integer 'label'");
  if (scores == j.end() || !scores->is_array()) throw fail("missing array 'scores'");
  const auto n = static_cast<std::size_t>(num_classes(space));
  if (scores->size() != n) {
    throw fail("expected " + std::to_string(n) + " scores, got " + std::to_string(scores->size()));
  }
  Prediction p;
  double sum = 0.0;
  for (const auto& s : *scores) {
    if (!s.is_number()) throw fail("non-numeric score");
    const double v = s.get<double>();
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw fail("score outside [0,1]");
    p.scores.push_back(v);
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw fail("scores do not sum to 1");
  p.label = static_cast<int>(argmax(p.scores));
  if (label->get<long long>() != p.label) throw fail("label is not the argmax of scores");
  return p;
}

Prediction ClassifierBackend::remote_classify(std::string_view text) const {
  Remote& r = *remote_;
  r.inflight.acquire();
  struct Release {
    Remote& r;
    ~Release() { r.inflight.release(); }
  } release{r};

  httplib::Client cli(r.url);
  configure(cli, r.timeout);
  const json req{{"text", text}, {"label_space", label_space_name(space_)}};
  const auto res = cli.Post("/v1/classify", req.dump(), "application/json");
  if (!res) {
    throw BackendUnavailable(r.url, "inference request to " + r.url + " failed: " +
                                        httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendUnavailable(r.url, "inference request to " + r.url + " returned HTTP " +
                                        std::to_string(res->status));
  }
  return parse_inference_response(res->body, space_, r.url);
}

bool ClassifierBackend::reachable() const {
  if (kind_ == Kind::kNative) return true;
  httplib::Client cli(remote_->url);
  configure(cli, remote_->timeout);
  const auto res = cli.Get("/v1/health");
  return res && res->status == 200;
}

InferenceServer::InferenceServer(std::shared_ptr<const LinearModel> estate,
                                 std::shared_ptr<const LinearModel> topic)
    : estate_(std::move(estate)), topic_(std::move(topic)),
      server_(std::make_unique<httplib::Server>()) {
  if (estate_ && estate_->num_classes() != num_classes(LabelSpace::kEstate)) {
    throw ValidationError("estate model must have 2 classes");
  }
  if (topic_ && topic_->num_classes() != num_classes(LabelSpace::kTopic)) {
    throw ValidationError("topic model must have 4 classes");
  }
  install_routes();
}

InferenceServer::~InferenceServer() { stop(); }

void InferenceServer::install_routes() {
  server_->Post("/v1/classify", [this](const httplib::Request& req, httplib::Response& res) {
    auto error = [&](int status, const std::string& msg) {
      res.status = status;
      res.set_content(json{{"error", msg}}.dump(), "application/json");
    };
    if (!available_) return error(503, "unavailable");
    const json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return error(400, "body is not a JSON object");
    const auto text = j.find("text");
    const auto space_it = j.find("label_space");
    if (text == j.end() || !text->is_string()) return error(400, "missing string 'text'");
    if (space_it == j.end() || !space_it->is_string()) return error(400, "missing 'label_space'");
    const auto space = label_space_from_name(space_it->get<std::string>());
    if (!space) return error(400, "label_space must be \"estate\" or \"topic\"");
    const auto& model = *space == LabelSpace::kEstate ? estate_ : topic_;
    if (!model) return error(409, "no model loaded for this label space");
    const auto probs = model->predict_proba(featurize(tokenize(text->get<std::string>())));
    const json out{{"label", static_cast<int>(argmax(probs))}, {"scores", probs}};
    ++served_;
    res.set_content(out.dump(), "application/json");
  });
  server_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    json spaces = json::array();
    if (estate_) spaces.push_back("estate");
    if (topic_) spaces.push_back("topic");
    res.status = available_ ? 200 : 503;
    res.set_content(json{{"status", available_ ? "ok" : "unavailable"}, {"label_spaces", spaces}}.dump(),
                    "application/json");
  });
}

int InferenceServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind inference server to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void InferenceServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw IoError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void InferenceServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace estate
