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

#include "estate/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "estate/error.hpp"

namespace estate {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("config key '" + key + "' must be a non-negative integer");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key '" + key + "' must be true or false");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  const std::filesystem::path p(v);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

ServiceConfig config_from_key_values(const std::map<std::string, std::string>& kv,
                                     const std::filesystem::path& base_dir) {
  ServiceConfig c;
  for (const auto& [key, v] : kv) {
    if (key == "estate_backend") {
      c.estate_backend = v;
    } else if (key == "topic_backend") {
      c.topic_backend = v;
    } else if (key == "remote_timeout_ms") {
      c.remote_timeout = std::chrono::milliseconds(parse_unsigned(key, v));
    } else if (key == "max_inflight_remote") {
      c.max_inflight_remote = parse_unsigned(key, v);
    } else if (key == "remote_fallback") {
      if (v == "queue") {
        c.remote_fallback = FallbackPolicy::kQueue;
      } else if (v == "native") {
        c.remote_fallback = FallbackPolicy::kNative;
      } else {
        throw ValidationError("remote_fallback must be queue or native");
      }
    } else if (key == "estate_fallback_model") {
      c.estate_fallback_model = resolve(base_dir, v);
    } else if (key == "topic_fallback_model") {
      c.topic_fallback_model = resolve(base_dir, v);
    } else if (key == "geolocation_mode") {
      const auto m = geolocation_mode_from_name(v);
      if (!m) throw ValidationError("geolocation_mode must be off, poi or neighbourhood");
      c.geolocation_mode = *m;
    } else if (key == "gazetteer_dir") {
      c.gazetteer_dir = resolve(base_dir, v);
    } else if (key == "store_path") {
      c.store_path = resolve(base_dir, v);
    } else if (key == "store_sync") {
      c.store_sync = parse_bool(key, v);
    } else if (key == "retry_capacity") {
      c.retry_capacity = parse_unsigned(key, v);
    } else if (key == "listen") {
      const auto colon = v.rfind(':');
      if (colon == std::string::npos || colon == 0) throw ValidationError("listen must be host:port");
      c.listen_host = v.substr(0, colon);
      const auto port = parse_unsigned(key, v.substr(colon + 1));
      if (port > 65535) throw ValidationError("listen port out of range");
      c.listen_port = static_cast<int>(port);
    } else if (key == "pseudonym_key_env") {
      c.pseudonym_key_env = v;
    } else if (key == "pseudonym_key_file") {
      c.pseudonym_key_file = resolve(base_dir, v);
    } else if (key == "request_body_limit") {
      c.request_body_limit = parse_unsigned(key, v);
    } else if (key == "gold_path") {
      c.gold_path = resolve(base_dir, v);
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  if (!kv.contains("store_path")) c.store_path = base_dir / c.store_path;
  if (c.estate_backend.empty()) throw ValidationError("config needs estate_backend");
  if (c.topic_backend.empty()) throw ValidationError("config needs topic_backend");
  if (c.remote_timeout.count() <= 0) throw ValidationError("remote_timeout_ms must be positive");
  if (c.max_inflight_remote == 0) throw ValidationError("max_inflight_remote must be positive");
  if (c.request_body_limit == 0) throw ValidationError("request_body_limit must be positive");
  if (c.retry_capacity == 0) throw ValidationError("retry_capacity must be positive");
  // Native backend paths are relative to the config file too.
  for (auto* spec : {&c.estate_backend, &c.topic_backend}) {
    if (spec->rfind("native:", 0) == 0) *spec = "native:" + resolve(base_dir, spec->substr(7)).string();
  }
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  return config_from_key_values(parse_key_values(in), path.parent_path());
}

ClassifierBackend make_backend(const std::string& spec, LabelSpace space,
                               std::chrono::milliseconds timeout, std::size_t max_inflight) {
  if (spec.rfind("native:", 0) == 0) {
    auto model = std::make_shared<const LinearModel>(LinearModel::load(spec.substr(7), num_classes(space)));
    return ClassifierBackend::native(std::move(model), space);
  }
  if (spec.rfind("remote:", 0) == 0) {
    return ClassifierBackend::remote(spec.substr(7), timeout, space, max_inflight);
  }
  throw ValidationError("backend must be native:<model> or remote:<url>, got '" + spec + "'");
}

PseudonymKey load_key(const ServiceConfig& config) {
  if (config.pseudonym_key_file) return PseudonymKey::from_file(*config.pseudonym_key_file);
  return PseudonymKey::from_env(config.pseudonym_key_env.c_str());
}

std::unique_ptr<Pipeline> build_pipeline(const ServiceConfig& c) {
  PipelineConfig pc{
      make_backend(c.estate_backend, LabelSpace::kEstate, c.remote_timeout, c.max_inflight_remote),
      make_backend(c.topic_backend, LabelSpace::kTopic, c.remote_timeout, c.max_inflight_remote),
      c.geolocation_mode,
      c.remote_fallback,
      std::nullopt,
      std::nullopt,
      c.store_path,
      c.retry_capacity,
      GeolocationParams{}};
  if (c.estate_fallback_model) {
    pc.estate_fallback = make_backend("native:" + c.estate_fallback_model->string(), LabelSpace::kEstate,
                                      c.remote_timeout, c.max_inflight_remote);
  }
  if (c.topic_fallback_model) {
    pc.topic_fallback = make_backend("native:" + c.topic_fallback_model->string(), LabelSpace::kTopic,
                                     c.remote_timeout, c.max_inflight_remote);
  }

  std::shared_ptr<const Gazetteer> gaz;
  if (c.gazetteer_dir) {
    gaz = std::make_shared<const Gazetteer>(load_gazetteer_dir(*c.gazetteer_dir));
  } else if (c.geolocation_mode != GeolocationMode::kOff) {
    throw ValidationError("geolocation_mode requires gazetteer_dir");
  }
  StoreOptions so;
  so.sync = c.store_sync;
  auto store = EventStore::open(c.store_path, so);
  return std::make_unique<Pipeline>(std::move(pc), std::move(gaz), std::move(store));
}

}  // namespace estate
