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

#include "estate/service.hpp"

#include <charconv>

#include "httplib.h"

#include "estate/error.hpp"
#include "estate/json_codec.hpp"

namespace estate {

using nlohmann::json;

namespace {

json error_body(const std::string& message) { return json{{"error", message}}; }

std::optional<std::string> param(const std::multimap<std::string, std::string>& params,
                                 const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Service::Service(std::unique_ptr<Pipeline> pipeline, PseudonymKey key, std::optional<GoldLabels> gold,
                 Options options)
    : pipeline_(std::move(pipeline)),
      key_(std::move(key)),
      gold_(std::move(gold)),
      options_(options),
      server_(std::make_unique<httplib::Server>()) {
  server_->set_payload_max_length(options_.request_body_limit);
  install_routes();
  retry_thread_ = std::thread([this] { retry_loop(); });
}

Service::~Service() {
  stop();
  {
    std::lock_guard lock(retry_mu_);
    stopping_ = true;
  }
  retry_cv_.notify_all();
  if (retry_thread_.joinable()) retry_thread_.join();
}

void Service::retry_loop() {
  std::unique_lock lock(retry_mu_);
  while (!stopping_) {
    retry_cv_.wait_for(lock, options_.retry_interval, [this] { return stopping_; });
    if (stopping_) break;
    lock.unlock();
    try {
      pipeline_->retry_parked();
    } catch (const std::exception&) {
      // Re-parking failed (queue full); the next tick tries again.
    }
    lock.lock();
  }
}

int Service::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind to " + host + ":" + std::to_string(port));
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void Service::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

json Service::outcome_json(const PostOutcome& outcome) const {
  json j;
  j["status"] = std::string(post_status_name(outcome.status));
  if (outcome.event) {
    const auto& e = *outcome.event;
    j["post_id"] = e.post.post_id;
    j["estate_label"] = e.estate_label.value();
    j["estate_score"] = e.estate_score;
    j["topic"] = e.topic_label ? json(std::string(topic_name(*e.topic_label))) : json(nullptr);
    j["location"] = e.location ? location_to_json(*e.location) : json(nullptr);
    j["pipeline_seq"] = e.pipeline_seq;
    j["fallback"] = e.fallback;
  }
  if (!outcome.detail.empty()) j["detail"] = outcome.detail;
  return j;
}

std::pair<int, json> Service::handle_posts(const std::string& body) {
  const json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) return {400, error_body("request body is not valid JSON")};
  if (!parsed.is_object() && !parsed.is_array()) {
    return {400, error_body("request body must be a record or an array of records")};
  }
  const json records = parsed.is_array() ? parsed : json::array({parsed});
  json outcomes = json::array();
  for (const auto& record : records) {
    std::string id;
    if (record.is_object()) {
      if (auto it = record.find("id"); it != record.end() && it->is_string()) id = it->get<std::string>();
    }
    try {
      const Post post = normalize(raw_post_from_json(record), key_);
      json o = outcome_json(pipeline_->process_post(post));
      o["post_id"] = post.post_id;
      outcomes.push_back(std::move(o));
    } catch (const ValidationError& e) {
      outcomes.push_back({{"post_id", id}, {"status", "rejected"}, {"detail", e.what()}});
    } catch (const SystemError& e) {
      outcomes.push_back({{"post_id", id}, {"status", "failed"}, {"detail", e.what()}});
    }
  }
  return {200, json{{"outcomes", outcomes}}};
}

std::pair<int, json> Service::handle_events(const std::multimap<std::string, std::string>& params) {
  EventFilter filter;
  if (const auto t = param(params, "topic")) {
    const auto topic = topic_from_name(*t);
    if (!topic) {
      json valid = json::array();
      for (auto v : kAllTopics) valid.push_back(std::string(topic_name(v)));
      return {400, json{{"error", "unknown topic '" + *t + "'"}, {"valid_topics", valid}}};
    }
    filter.topic = *topic;
  }
  try {
    if (const auto v = param(params, "from")) filter.from = parse_rfc3339(*v);
    if (const auto v = param(params, "to")) filter.to = parse_rfc3339(*v);
  } catch (const ValidationError& e) {
    return {400, error_body(std::string("bad time bound: ") + e.what())};
  }
  if (filter.from && filter.to && *filter.from > *filter.to) {
    return {400, error_body("time range inverted: from > to")};
  }
  if (const auto v = param(params, "neighbourhood")) filter.neighbourhood = *v;
  if (const auto v = param(params, "estate_only")) {
    if (*v == "true" || *v == "1") {
      filter.estate_only = true;
    } else if (*v != "false" && *v != "0") {
      return {400, error_body("estate_only must be true or false")};
    }
  }
  if (const auto v = param(params, "cursor")) {
    const auto c = parse_int(*v);
    if (!c) return {400, error_body("cursor must be an integer sequence number")};
    filter.after_seq = *c;
  }
  filter.limit = options_.default_page_size;
  if (const auto v = param(params, "limit")) {
    const auto l = parse_int(*v);
    if (!l || *l < 1 || static_cast<std::size_t>(*l) > options_.max_page_size) {
      return {400, error_body("limit must be in [1, " + std::to_string(options_.max_page_size) + "]")};
    }
    filter.limit = static_cast<std::size_t>(*l);
  }
  const auto events = pipeline_->store().query(filter);
  json items = json::array();
  for (const auto& e : events) items.push_back(event_to_json(e));
  json next = events.size() == filter.limit ? json(events.back().pipeline_seq) : json(nullptr);
  return {200, json{{"events", items}, {"next_cursor", next}}};
}

std::pair<int, json> Service::handle_metrics(const std::multimap<std::string, std::string>& params) {
  const auto name = param(params, "task");
  const auto task = name ? task_from_name(*name) : std::nullopt;
  if (!task) return {400, error_body("task must be estate, topic or geo")};
  if (!gold_) return {404, error_body("no gold labels loaded; start the service with gold_path set")};
  const auto events = pipeline_->store().query({});
  const auto report = evaluate(*task, *gold_, predictions_from_events(events));
  return {200, report_to_json(report)};
}

std::pair<int, json> Service::handle_health() {
  const auto& cfg = pipeline_->config();
  json j;
  j["status"] = "ok";
  j["high_water"] = pipeline_->store().high_water();
  j["parked"] = pipeline_->parked();
  j["backends"] = {{"estate", cfg.estate_backend.reachable()}, {"topic", cfg.topic_backend.reachable()}};
  return {200, j};
}

void Service::install_routes() {
  auto reply = [](httplib::Response& res, const std::pair<int, json>& r) {
    res.status = r.first;
    res.set_content(r.second.dump(), "application/json");
  };
  server_->Post("/v1/posts", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_posts(req.body));
  });
  server_->Get("/v1/events", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_events(req.params));
  });
  server_->Get("/v1/metrics", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_metrics(req.params));
  });
  server_->Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_health());
  });
  server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", what}}.dump(), "application/json");
  });
}

std::unique_ptr<Service> make_service(const ServiceConfig& config) {
  if (config.gazetteer_dir && !std::filesystem::is_directory(*config.gazetteer_dir)) {
    throw IoError("gazetteer directory not found: " + config.gazetteer_dir->string());
  }
  auto key = load_key(config);
  std::optional<GoldLabels> gold;
  if (config.gold_path) gold = load_gold(*config.gold_path);
  auto pipeline = build_pipeline(config);
  Service::Options options;
  options.request_body_limit = config.request_body_limit;
  return std::make_unique<Service>(std::move(pipeline), std::move(key), std::move(gold), options);
}

}  // namespace estate
