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

#ifndef ESTATE_INGESTION_HPP
#define ESTATE_INGESTION_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "estate/core_types.hpp"

namespace estate {

// Input record. On the wire: {"id", "user", "text", "created_at", "lat", "lon"}.
struct RawPost {
  std::string post_id;
  std::string author_handle;
  std::string text;
  std::string created_at;
  std::optional<double> latitude;
  std::optional<double> longitude;
};

// Secret key for pseudonyms. Never serialized or printed.
class PseudonymKey {
 public:
  static constexpr std::size_t kMinBytes = 16;

  // Throws ValidationError if shorter than kMinBytes.
  explicit PseudonymKey(std::vector<std::uint8_t> bytes);
  // Hex string, whitespace-trimmed. Throws ValidationError.
  static PseudonymKey from_hex(std::string_view hex);
  // Reads hex from the named environment variable. Throws ValidationError if
  // unset or invalid.
  static PseudonymKey from_env(const char* var = "PSEUDONYM_KEY");
  // Reads hex from a file. Throws IoError / ValidationError.
  static PseudonymKey from_file(const std::filesystem::path& path);

  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

// HMAC-SHA256(key, handle) truncated to 128 bits, as 32 lowercase hex chars.
// Throws ValidationError for an empty handle.
std::string pseudonymize(std::string_view handle, const PseudonymKey& key);

bool looks_like_pseudonym(std::string_view s);

// One parsed input line. Gold fields are optional extensions of the record
// schema: "estate" (0/1), "topic" (name), "gold_lat"/"gold_lon", "gold_place".
// A record may carry "author_pseudonym" (already pseudonymized) instead of
// "user"; that is the form write_corpus emits.
struct IngestedRecord {
  Post post;
  std::optional<EstateLabel> estate;
  std::optional<Topic> topic;
  std::optional<GeoPoint> gold_location;
  std::optional<std::string> gold_place;
};

RawPost raw_post_from_json(const nlohmann::json& j);

// Trims id and text, tokenizes, converts the timestamp to UTC and replaces
// the handle. Throws ValidationError.
Post normalize(const RawPost& raw, const PseudonymKey& key);

// Throws ValidationError on malformed lines.
IngestedRecord parse_record(std::string_view line, const PseudonymKey& key);

struct BatchResult {
  Corpus corpus;
  std::size_t skipped = 0;  // malformed or duplicate-id lines
};

// Throws IoError if the file cannot be read, EmptyCorpusError if no line
// parses.
BatchResult ingest_batch(const std::filesystem::path& path, const PseudonymKey& key);
BatchResult ingest_lines(std::istream& in, const PseudonymKey& key);

// Writes the corpus in the input record schema, pseudonyms in place of
// handles, gold labels included. Re-ingesting the output yields an equal
// Corpus.
void write_corpus(const Corpus& corpus, std::ostream& out);

struct StreamSummary {
  std::size_t accepted = 0;
  std::size_t rejected = 0;

  friend bool operator==(const StreamSummary&, const StreamSummary&) = default;
};

// Yields the next raw line, or nullopt when the source is exhausted.
using RecordSource = std::function<std::optional<std::string>()>;
using PostSink = std::function<void(IngestedRecord&&)>;

// Reads records in arrival order and hands each valid one to the sink exactly
// once. The sink runs on the reading thread, so a slow sink stalls the reader
// instead of losing records.
StreamSummary ingest_stream(const RecordSource& source, const PseudonymKey& key,
                            const PostSink& sink);

}  // namespace estate

#endif  // ESTATE_INGESTION_HPP
