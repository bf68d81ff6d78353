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

#ifndef ESTATE_SERVICE_HPP
#define ESTATE_SERVICE_HPP

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "json.hpp"

#include "estate/config.hpp"
#include "estate/evaluation.hpp"
#include "estate/ingestion.hpp"
#include "estate/pipeline.hpp"

namespace httplib {
class Server;
}

namespace estate {

// HTTP front door:
//   POST /v1/posts      one input record or an array of them
//   GET  /v1/events     topic, from, to, neighbourhood, estate_only, cursor, limit
//   GET  /v1/metrics    task = estate | topic | geo
//   GET  /v1/health
class Service {
 public:
  struct Options {
    std::size_t request_body_limit = 1 << 20;
    std::size_t default_page_size = 100;
    std::size_t max_page_size = 1000;
    std::chrono::milliseconds retry_interval{500};
  };

  Service(std::unique_ptr<Pipeline> pipeline, PseudonymKey key, std::optional<GoldLabels> gold,
          Options options);
  Service(std::unique_ptr<Pipeline> pipeline, PseudonymKey key, std::optional<GoldLabels> gold = std::nullopt)
      : Service(std::move(pipeline), std::move(key), std::move(gold), Options{}) {}
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port; throws IoError on bind failure.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  Pipeline& pipeline() { return *pipeline_; }

  // Handlers, exposed for in-process use. Each returns (status, body).
  std::pair<int, nlohmann::json> handle_posts(const std::string& body);
  std::pair<int, nlohmann::json> handle_events(const std::multimap<std::string, std::string>& params);
  std::pair<int, nlohmann::json> handle_metrics(const std::multimap<std::string, std::string>& params);
  std::pair<int, nlohmann::json> handle_health();

 private:
  void install_routes();
  void retry_loop();
  nlohmann::json outcome_json(const PostOutcome& outcome) const;

  std::unique_ptr<Pipeline> pipeline_;
  PseudonymKey key_;
  std::optional<GoldLabels> gold_;
  Options options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  std::thread retry_thread_;
  std::mutex retry_mu_;
  std::condition_variable retry_cv_;
  bool stopping_ = false;
};

// Builds a Service from a config file's settings.
std::unique_ptr<Service> make_service(const ServiceConfig& config);

}  // namespace estate

#endif  // ESTATE_SERVICE_HPP
