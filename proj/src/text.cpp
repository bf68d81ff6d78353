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

#include "estate/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>

#include "estate/error.hpp"

namespace estate {
namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }

  // Decodes the code point at pos without advancing. Returns a negative
  // value for malformed sequences; len receives the byte length either way.
  UChar32 peek(std::size_t at, std::size_t* len) const {
    std::int32_t i = static_cast<std::int32_t>(at);
    const auto n = static_cast<std::int32_t>(text.size());
    UChar32 c;
    U8_NEXT(reinterpret_cast<const std::uint8_t*>(text.data()), i, n, c);
    *len = static_cast<std::size_t>(i) - at;
    return c;
  }
};

bool is_word_char(UChar32 c) { return c >= 0 && u_isalnum(c); }

bool is_space(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }

void append_lower(std::string& out, UChar32 c) {
  const UChar32 lc = u_tolower(c);
  char buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  UBool err = false;
  U8_APPEND(reinterpret_cast<std::uint8_t*>(buf), len, U8_MAX_LENGTH, lc, err);
  if (!err) out.append(buf, static_cast<std::size_t>(len));
}

bool starts_url(std::string_view rest) {
  auto ieq_prefix = [&](std::string_view p) {
    if (rest.size() < p.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const char c = rest[i];
      const char lower = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      if (lower != p[i]) return false;
    }
    return true;
  };
  return ieq_prefix("http://") || ieq_prefix("https://");
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  Cursor cur{text};
  bool prev_word = false;  // previous code point was alphanumeric

  while (!cur.done()) {
    std::size_t len = 0;
    const UChar32 c = cur.peek(cur.pos, &len);

    if (!prev_word && (c == 'h' || c == 'H') && starts_url(text.substr(cur.pos))) {
      while (!cur.done()) {
        std::size_t l = 0;
        const UChar32 u = cur.peek(cur.pos, &l);
        if (is_space(u)) break;
        cur.pos += l;
      }
      tokens.emplace_back(kUrlToken);
      prev_word = false;
      continue;
    }

    if (c == '@' || c == '#') {
      std::size_t next_len = 0;
      const UChar32 next =
          cur.pos + 1 < text.size() ? cur.peek(cur.pos + 1, &next_len) : -1;
      if (is_word_char(next) || (c == '@' && next == '_')) {
        cur.pos += 1;
        std::string body;
        while (!cur.done()) {
          std::size_t l = 0;
          const UChar32 u = cur.peek(cur.pos, &l);
          const bool keep = is_word_char(u) || (c == '@' && u == '_');
          if (!keep) break;
          if (c == '#') append_lower(body, u);
          cur.pos += l;
        }
        if (c == '#') tokens.push_back(std::move(body));
        prev_word = false;
        continue;
      }
    }

    if (is_word_char(c)) {
      std::string word;
      while (!cur.done()) {
        std::size_t l = 0;
        const UChar32 u = cur.peek(cur.pos, &l);
        if (!is_word_char(u)) break;
        append_lower(word, u);
        cur.pos += l;
      }
      tokens.push_back(std::move(word));
      prev_word = true;
      continue;
    }

    cur.pos += len == 0 ? 1 : len;
    prev_word = false;
  }
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : bytes) {
    h ^= static_cast<std::uint8_t>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t feature_index(std::string_view ngram) {
  return static_cast<std::uint32_t>(fnv1a64(ngram) & (kFeatureDim - 1));
}

FeatureVector::FeatureVector(std::vector<Entry> entries) {
  for (const auto& [idx, v] : entries) {
    if (idx >= kFeatureDim) throw ValidationError("feature index out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back().second += e.second;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
}

double FeatureVector::norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second * e.second;
  return std::sqrt(s);
}

FeatureVector featurize(std::span<const std::string> tokens) {
  std::vector<FeatureVector::Entry> counts;
  counts.reserve(tokens.size() * 2);
  std::string bigram;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    counts.emplace_back(feature_index(tokens[i]), 1.0);
    if (i + 1 < tokens.size()) {
      bigram.assign(tokens[i]);
      bigram.push_back('_');
      bigram.append(tokens[i + 1]);
      counts.emplace_back(feature_index(bigram), 1.0);
    }
  }
  FeatureVector merged(std::move(counts));
  const double n = merged.norm();
  if (n == 0.0) return merged;
  std::vector<FeatureVector::Entry> scaled(merged.entries().begin(), merged.entries().end());
  for (auto& e : scaled) e.second /= n;
  return FeatureVector(std::move(scaled));
}

}  // namespace estate
