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

#ifndef ESTATE_BACKEND_HPP
#define ESTATE_BACKEND_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "estate/core_types.hpp"
#include "estate/linear_model.hpp"

namespace httplib {
class Server;
}

namespace estate {

struct Prediction {
  int label = 0;
  std::vector<double> scores;  // length num_classes(label_space), sums to 1
};

// Either a native LinearModel or a remote service speaking the inference
// protocol:
//   POST /v1/classify  {"text": str, "label_space": "estate"|"topic"}
//   200                {"label": int, "scores": [real, ...]}
// Copies share the model and the remote in-flight limiter.
class ClassifierBackend {
 public:
  enum class Kind { kNative, kRemote };

  // Throws ValidationError if the class count does not fit the label space.
  static ClassifierBackend native(std::shared_ptr<const LinearModel> model, LabelSpace space);
  // Throws ValidationError for a malformed URL, a non-positive timeout or a
  // zero in-flight cap. Only plain http endpoints are supported.
  static ClassifierBackend remote(std::string url, std::chrono::milliseconds timeout,
                                  LabelSpace space, std::size_t max_inflight = 8);

  Kind kind() const { return kind_; }
  LabelSpace label_space() const { return space_; }
  const std::string& endpoint() const;
  std::chrono::milliseconds timeout() const;
  // Null for remote backends.
  const LinearModel* model() const { return model_.get(); }

  // Label is the argmax of the scores, smallest index on ties. Remote errors
  // surface as BackendUnavailable carrying the endpoint.
  Prediction classify(const Post& post) const;
  Prediction classify_text(std::string_view text) const;
  // Native: classify already-featurized input.
  Prediction classify_features(const FeatureVector& features) const;

  // Native backends are always reachable; remote ones answer GET /v1/health.
  bool reachable() const;

 private:
  struct Remote;

  ClassifierBackend() = default;
  Prediction remote_classify(std::string_view text) const;

  Kind kind_ = Kind::kNative;
  LabelSpace space_ = LabelSpace::kEstate;
  std::shared_ptr<const LinearModel> model_;
  std::shared_ptr<Remote> remote_;
};

// Checks a remote response body against the protocol. Throws
// BackendUnavailable naming the endpoint.
Prediction parse_inference_response(const std::string& body, LabelSpace space,
                                    const std::string& endpoint);

// Serves the inference protocol from native LinearModels. Used as a
// loopback peer for protocol tests and as a drop-in stand-in for the
// transformer sidecar.
class InferenceServer {
 public:
  InferenceServer(std::shared_ptr<const LinearModel> estate,
                  std::shared_ptr<const LinearModel> topic);
  ~InferenceServer();
  InferenceServer(const InferenceServer&) = delete;
  InferenceServer& operator=(const InferenceServer&) = delete;

  // Binds (port 0 picks a free port), starts serving on a background thread
  // and returns the bound port. Throws IoError if binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

  // While false every classify request answers 503.
  void set_available(bool available) { available_ = available; }
  std::size_t requests_served() const { return served_; }

 private:
  void install_routes();

  std::shared_ptr<const LinearModel> estate_;
  std::shared_ptr<const LinearModel> topic_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<bool> available_{true};
  std::atomic<std::size_t> served_{0};
};

}  // namespace estate

#endif  // ESTATE_BACKEND_HPP
