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

#ifndef ESTATE_TESTS_SUPPORT_HPP
#define ESTATE_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "estate/core_types.hpp"
#include "estate/geolocation.hpp"
#include "estate/ingestion.hpp"
#include "estate/linear_model.hpp"
#include "estate/pipeline.hpp"

namespace estate::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Bytes seed, seed+1, ..., seed+31.
PseudonymKey test_key(std::uint8_t seed = 0);

Timestamp at_seconds(std::int64_t seconds_since_epoch);

Post make_post(const std::string& id, const std::string& text, std::int64_t seconds = 1'700'000'000,
               std::optional<GeoPoint> geotag = std::nullopt);

std::string random_word(std::mt19937_64& rng, std::size_t min_len = 3, std::size_t max_len = 10);
double uniform(std::mt19937_64& rng, double lo, double hi);
GeoPoint random_point(std::mt19937_64& rng);

// Four topics with disjoint vocabularies ("t<k>w<i>") plus non-estate posts
// drawn from a fifth vocabulary ("nw<i>"). Gold estate and topic labels are
// filled in.
Corpus synthetic_corpus(int per_topic, int non_estate, std::uint64_t seed, int words_per_post = 6);

// Stratified by (estate, topic): test_fraction of each stratum goes to the
// second corpus.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed);

// n_neighbourhoods neighbourhoods, each with pois_per POIs named
// "<word> <word>" from a pool of distinct words, scattered around a city
// centre.
Gazetteer synthetic_gazetteer(int n_neighbourhoods, int pois_per, std::uint64_t seed);

// A ClassifiedEvent satisfying check_event, with seq left at -1.
ClassifiedEvent random_event(std::mt19937_64& rng, const std::string& post_id, std::int64_t seconds);

// A model that predicts class c for posts containing one of its keywords
// and class 0 otherwise.
std::shared_ptr<const LinearModel> keyword_model(int num_classes,
                                                 const std::vector<std::pair<std::string, int>>& keywords);

// Estate: "lift", "noise", "parking", "leak", "others" -> 1.
// Topic: "lift"/"leak" -> Infrastructure, "parking" -> Parking,
// "noise" -> Noise, "others" -> Others.
std::shared_ptr<const LinearModel> keyword_estate_model();
std::shared_ptr<const LinearModel> keyword_topic_model();

PipelineConfig native_config(std::shared_ptr<const LinearModel> estate, std::shared_ptr<const LinearModel> topic,
                             GeolocationMode mode = GeolocationMode::kOff);

}  // namespace estate::testing

#endif  // ESTATE_TESTS_SUPPORT_HPP
