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

#include "estate/ingestion.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "estate/error.hpp"
#include "estate/text.hpp"

namespace estate {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::optional<double> optional_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw ValidationError(std::string(key) + " must be a number");
  return it->get<double>();
}

}  // namespace

PseudonymKey::PseudonymKey(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  if (bytes_.size() < kMinBytes) {
    throw ValidationError("pseudonym key must be at least 16 bytes");
  }
}

PseudonymKey PseudonymKey::from_hex(std::string_view hex) {
  hex = trim(hex);
  if (hex.size() % 2 != 0) throw ValidationError("pseudonym key: odd hex length");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_value(hex[i]);
    const int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw ValidationError("pseudonym key: invalid hex");
    bytes.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return PseudonymKey(std::move(bytes));
}

PseudonymKey PseudonymKey::from_env(const char* var) {
  const char* v = std::getenv(var);
  if (v == nullptr || *v == '\0') {
    throw ValidationError(std::string("environment variable ") + var + " is not set");
  }
  return from_hex(v);
}

PseudonymKey PseudonymKey::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read key file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_hex(ss.str());
}

std::string pseudonymize(std::string_view handle, const PseudonymKey& key) {
  if (handle.empty()) throw ValidationError("empty author handle");
  unsigned char mac[EVP_MAX_MD_SIZE];
  unsigned int mac_len = 0;
  const auto kb = key.bytes();
  if (HMAC(EVP_sha256(), kb.data(), static_cast<int>(kb.size()),
           reinterpret_cast<const unsigned char*>(handle.data()), handle.size(), mac,
           &mac_len) == nullptr) {
    throw SystemError("HMAC-SHA256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (unsigned int i = 0; i < 16; ++i) {
    out.push_back(kHex[mac[i] >> 4]);
    out.push_back(kHex[mac[i] & 0xf]);
  }
  return out;
}

bool looks_like_pseudonym(std::string_view s) {
  if (s.size() != 32) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

RawPost raw_post_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");
  auto str = [&](const char* k) {
    const auto it = j.find(k);
    if (it == j.end() || !it->is_string()) {
      throw ValidationError(std::string("missing string field '") + k + "'");
    }
    return it->get<std::string>();
  };
  RawPost raw;
  raw.post_id = str("id");
  raw.author_handle = str("user");
  raw.text = str("text");
  raw.created_at = str("created_at");
  raw.latitude = optional_number(j, "lat");
  raw.longitude = optional_number(j, "lon");
  return raw;
}

namespace {

Post normalize_common(std::string_view id, std::string pseudonym, std::string_view text,
                      std::string_view created_at, std::optional<double> lat,
                      std::optional<double> lon) {
  Post p;
  p.post_id = std::string(trim(id));
  p.text = std::string(trim(text));
  if (p.post_id.empty()) throw ValidationError("empty post id");
  if (p.text.empty()) throw ValidationError("empty post text");
  p.author_pseudonym = std::move(pseudonym);
  p.tokens = tokenize(p.text);
  p.created_at = parse_rfc3339(trim(created_at));
  if (lat.has_value() != lon.has_value()) {
    throw ValidationError("lat and lon must be given together");
  }
  if (lat) {
    const GeoPoint g{*lat, *lon};
    if (!valid_coordinates(g)) throw ValidationError("geotag out of range");
    p.geotag = g;
  }
  return p;
}

}  // namespace

Post normalize(const RawPost& raw, const PseudonymKey& key) {
  const auto handle = trim(raw.author_handle);
  return normalize_common(raw.post_id, pseudonymize(handle, key), raw.text, raw.created_at,
                          raw.latitude, raw.longitude);
}

IngestedRecord parse_record(std::string_view line, const PseudonymKey& key) {
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("line is not a JSON object");
  IngestedRecord rec;
  try {
    if (j.contains("user")) {
      rec.post = normalize(raw_post_from_json(j), key);
    } else {
      const auto pseudonym = j.at("author_pseudonym").get<std::string>();
      if (!looks_like_pseudonym(pseudonym)) throw ValidationError("malformed author_pseudonym");
      rec.post = normalize_common(j.at("id").get<std::string>(), pseudonym,
                                  j.at("text").get<std::string>(),
                                  j.at("created_at").get<std::string>(), optional_number(j, "lat"),
                                  optional_number(j, "lon"));
    }
    if (auto it = j.find("estate"); it != j.end() && !it->is_null()) {
      rec.estate = EstateLabel(it->get<int>());
    }
    if (auto it = j.find("topic"); it != j.end() && !it->is_null()) {
      const auto t = topic_from_name(it->get<std::string>());
      if (!t) throw ValidationError("unknown topic name");
      rec.topic = *t;
    }
    const auto glat = optional_number(j, "gold_lat");
    const auto glon = optional_number(j, "gold_lon");
    if (glat.has_value() != glon.has_value()) {
      throw ValidationError("gold_lat and gold_lon must be given together");
    }
    if (glat) {
      const GeoPoint g{*glat, *glon};
      if (!valid_coordinates(g)) throw ValidationError("gold location out of range");
      rec.gold_location = g;
    }
    if (auto it = j.find("gold_place"); it != j.end() && !it->is_null()) {
      rec.gold_place = it->get<std::string>();
    }
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("record: ") + ex.what());
  }
  return rec;
}

BatchResult ingest_lines(std::istream& in, const PseudonymKey& key) {
  BatchResult result;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    IngestedRecord rec;
    try {
      rec = parse_record(line, key);
    } catch (const ValidationError&) {
      ++result.skipped;
      continue;
    }
    if (!seen.insert(rec.post.post_id).second) {
      ++result.skipped;
      continue;
    }
    const auto& id = rec.post.post_id;
    if (rec.estate) result.corpus.gold_estate.emplace(id, *rec.estate);
    if (rec.topic) result.corpus.gold_topic.emplace(id, *rec.topic);
    if (rec.gold_location) result.corpus.gold_location.emplace(id, *rec.gold_location);
    if (rec.gold_place) result.corpus.gold_place.emplace(id, *rec.gold_place);
    result.corpus.posts.push_back(std::move(rec.post));
  }
  if (result.corpus.posts.empty()) throw EmptyCorpusError("no parseable records");
  sort_posts(result.corpus.posts);
  return result;
}

BatchResult ingest_batch(const std::filesystem::path& path, const PseudonymKey& key) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return ingest_lines(in, key);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& p : corpus.posts) {
    json j;
    j["id"] = p.post_id;
    j["author_pseudonym"] = p.author_pseudonym;
    j["text"] = p.text;
    j["created_at"] = format_rfc3339(p.created_at);
    if (p.geotag) {
      j["lat"] = p.geotag->latitude;
      j["lon"] = p.geotag->longitude;
    }
    if (auto it = corpus.gold_estate.find(p.post_id); it != corpus.gold_estate.end()) {
      j["estate"] = it->second.value();
    }
    if (auto it = corpus.gold_topic.find(p.post_id); it != corpus.gold_topic.end()) {
      j["topic"] = std::string(topic_name(it->second));
    }
    if (auto it = corpus.gold_location.find(p.post_id); it != corpus.gold_location.end()) {
      j["gold_lat"] = it->second.latitude;
      j["gold_lon"] = it->second.longitude;
    }
    if (auto it = corpus.gold_place.find(p.post_id); it != corpus.gold_place.end()) {
      j["gold_place"] = it->second;
    }
    out << j.dump() << '\n';
  }
}

StreamSummary ingest_stream(const RecordSource& source, const PseudonymKey& key,
                            const PostSink& sink) {
  StreamSummary summary;
  while (auto line = source()) {
    if (trim(*line).empty()) continue;
    IngestedRecord rec;
    try {
      rec = parse_record(*line, key);
    } catch (const ValidationError&) {
      ++summary.rejected;
      continue;
    }
    sink(std::move(rec));
    ++summary.accepted;
  }
  return summary;
}

}  // namespace estate
