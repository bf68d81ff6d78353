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

#ifndef ESTATE_CONFIG_HPP
#define ESTATE_CONFIG_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "estate/ingestion.hpp"
#include "estate/pipeline.hpp"

namespace estate {

// Plain `key = value` lines; `#` starts a comment; blank lines ignored.
// Duplicate or malformed lines throw ValidationError.
std::map<std::string, std::string> parse_key_values(std::istream& in);

// Everything the CLI and the HTTP service need. Keys (defaults in brackets):
//   estate_backend        native:<model file> | remote:http://host:port
//   topic_backend         same forms
//   remote_timeout_ms     [2000]
//   max_inflight_remote   [8]
//   remote_fallback       queue | native                       [queue]
//   estate_fallback_model, topic_fallback_model   model files for `native`
//   geolocation_mode      off | poi | neighbourhood            [off]
//   gazetteer_dir         directory with pois.csv, neighbourhoods.csv
//   store_path            event store directory                [events]
//   store_sync            true | false                         [true]
//   retry_capacity        [1024]
//   listen                host:port                            [127.0.0.1:8080]
//   pseudonym_key_env     [PSEUDONYM_KEY]
//   pseudonym_key_file    hex key file, used instead of the environment
//   request_body_limit    bytes                                [1048576]
//   gold_path             gold labels for /v1/metrics (optional)
// Relative paths resolve against the config file's directory.
struct ServiceConfig {
  std::string estate_backend;
  std::string topic_backend;
  std::chrono::milliseconds remote_timeout{2000};
  std::size_t max_inflight_remote = 8;
  FallbackPolicy remote_fallback = FallbackPolicy::kQueue;
  std::optional<std::filesystem::path> estate_fallback_model;
  std::optional<std::filesystem::path> topic_fallback_model;
  GeolocationMode geolocation_mode = GeolocationMode::kOff;
  std::optional<std::filesystem::path> gazetteer_dir;
  std::filesystem::path store_path = "events";
  bool store_sync = true;
  std::size_t retry_capacity = 1024;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string pseudonym_key_env = "PSEUDONYM_KEY";
  std::optional<std::filesystem::path> pseudonym_key_file;
  std::size_t request_body_limit = 1 << 20;
  std::optional<std::filesystem::path> gold_path;
};

// Throws IoError if unreadable, ValidationError for bad values.
ServiceConfig load_config(const std::filesystem::path& path);
ServiceConfig config_from_key_values(const std::map<std::string, std::string>& kv,
                                     const std::filesystem::path& base_dir);

// "native:<path>" or "remote:<url>".
ClassifierBackend make_backend(const std::string& spec, LabelSpace space,
                               std::chrono::milliseconds timeout, std::size_t max_inflight);

PseudonymKey load_key(const ServiceConfig& config);

// Loads models and gazetteer and opens the store. Missing files raise
// IoError.
std::unique_ptr<Pipeline> build_pipeline(const ServiceConfig& config);

}  // namespace estate

#endif  // ESTATE_CONFIG_HPP
