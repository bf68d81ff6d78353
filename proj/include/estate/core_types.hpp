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

#ifndef ESTATE_CORE_TYPES_HPP
#define ESTATE_CORE_TYPES_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "estate/time.hpp"

namespace estate {

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Latitude in [-90, 90], longitude in [-180, 180], both finite.
bool valid_coordinates(const GeoPoint& p);

struct Post {
  std::string post_id;
  std::string author_pseudonym;
  std::string text;
  std::vector<std::string> tokens;
  Timestamp created_at{};
  std::optional<GeoPoint> geotag;

  friend bool operator==(const Post&, const Post&) = default;
};

// Binary relevance label. 1 means estate-related.
class EstateLabel {
 public:
  constexpr EstateLabel() = default;
  // Throws ValidationError outside {0, 1}.
  explicit EstateLabel(int value);

  constexpr int value() const { return value_; }
  constexpr bool related() const { return value_ == 1; }

  friend bool operator==(const EstateLabel&, const EstateLabel&) = default;

 private:
  int value_ = 0;
};

// Integer assignment follows the order the topics are listed in: this is a
// convention of this project, serialized by name.
enum class Topic : int { kInfrastructure = 0, kParking = 1, kNoise = 2, kOthers = 3 };

inline constexpr int kNumTopics = 4;
inline constexpr std::array<Topic, kNumTopics> kAllTopics = {
    Topic::kInfrastructure, Topic::kParking, Topic::kNoise, Topic::kOthers};

std::string_view topic_name(Topic t);
std::optional<Topic> topic_from_name(std::string_view name);
// Throws ValidationError outside [0, 3].
Topic topic_from_index(int value);
constexpr int topic_index(Topic t) { return static_cast<int>(t); }

struct Corpus {
  std::vector<Post> posts;  // created_at ascending, ties by post_id
  std::map<std::string, EstateLabel> gold_estate;
  std::map<std::string, Topic> gold_topic;
  std::map<std::string, GeoPoint> gold_location;
  // Optional POI or neighbourhood id accompanying gold_location.
  std::map<std::string, std::string> gold_place;

  std::size_t size() const { return posts.size(); }
  bool empty() const { return posts.empty(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Restores the ordering invariant.
void sort_posts(std::vector<Post>& posts);

struct Violation {
  std::string post_id;
  std::string what;
};

// Empty iff every Corpus and Post invariant holds.
std::vector<Violation> validate_corpus(const Corpus& corpus);

enum class Granularity { kPoi, kNeighbourhood };

std::string_view granularity_name(Granularity g);
std::optional<Granularity> granularity_from_name(std::string_view name);

struct ResolvedLocation {
  Granularity granularity = Granularity::kPoi;
  std::optional<std::string> poi_id;  // present iff granularity == kPoi
  std::string neighbourhood_id;
  GeoPoint point;                     // POI coordinates or neighbourhood centroid
  double confidence = 0.0;

  friend bool operator==(const ResolvedLocation&, const ResolvedLocation&) = default;
};

using TopicScores = std::array<double, kNumTopics>;

struct ClassifiedEvent {
  Post post;
  EstateLabel estate_label;
  double estate_score = 0.0;  // P(label = 1)
  std::optional<Topic> topic_label;
  std::optional<TopicScores> topic_scores;
  std::optional<ResolvedLocation> location;
  std::int64_t pipeline_seq = -1;  // assigned by the store
  bool fallback = false;           // a native fallback model stood in for a remote one

  friend bool operator==(const ClassifiedEvent&, const ClassifiedEvent&) = default;
};

// Routing and score-consistency checks. Empty means valid.
std::vector<std::string> check_event(const ClassifiedEvent& event);

// Index of the largest element; the smallest index wins ties. Empty input
// returns 0.
std::size_t argmax(std::span<const double> values);

}  // namespace estate

#endif  // ESTATE_CORE_TYPES_HPP
