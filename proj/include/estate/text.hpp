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

#ifndef ESTATE_TEXT_HPP
#define ESTATE_TEXT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace estate {

// Hashed feature space: 2^18 buckets.
inline constexpr std::uint32_t kFeatureBits = 18;
inline constexpr std::uint32_t kFeatureDim = 1u << kFeatureBits;

inline constexpr std::string_view kUrlToken = "<url>";

// Lowercases and splits on Unicode non-alphanumeric boundaries.
//   #tag           -> "tag"   (hashtag body kept, '#' stripped)
//   @handle        -> dropped (letters, digits and '_' after '@')
//   http(s)://...  -> "<url>" (up to the next whitespace)
// Invalid UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

// 64-bit FNV-1a over the UTF-8 bytes. Offset basis 0xcbf29ce484222325,
// prime 0x100000001b3. Stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

// Bucket of an n-gram string: fnv1a64(s) mod 2^18.
std::uint32_t feature_index(std::string_view ngram);

// Sparse vector sorted by index; no explicit zeros.
class FeatureVector {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  FeatureVector() = default;
  // Sorts, merges duplicate indices and drops zeros. Throws ValidationError
  // for indices outside the hashed dimension.
  explicit FeatureVector(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double norm() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<Entry> entries_;
};

// Unigrams plus adjacent bigrams joined with '_', counted, hashed, then
// L2-normalised.
FeatureVector featurize(std::span<const std::string> tokens);

}  // namespace estate

#endif  // ESTATE_TEXT_HPP
