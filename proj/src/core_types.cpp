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

#include "estate/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "estate/error.hpp"
#include "estate/text.hpp"

namespace estate {

bool valid_coordinates(const GeoPoint& p) {
  return std::isfinite(p.latitude) && std::isfinite(p.longitude) && p.latitude >= -90.0 &&
         p.latitude <= 90.0 && p.longitude >= -180.0 && p.longitude <= 180.0;
}

EstateLabel::EstateLabel(int value) : value_(value) {
  if (value != 0 && value != 1) {
    throw ValidationError("estate label must be 0 or 1, got " + std::to_string(value));
  }
}

namespace {
constexpr std::array<std::string_view, kNumTopics> kTopicNames = {"Infrastructure", "Parking",
                                                                  "Noise", "Others"};
}

std::string_view topic_name(Topic t) { return kTopicNames[static_cast<std::size_t>(t)]; }

std::optional<Topic> topic_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTopicNames.size(); ++i) {
    if (kTopicNames[i] == name) return static_cast<Topic>(i);
  }
  return std::nullopt;
}

Topic topic_from_index(int value) {
  if (value < 0 || value >= kNumTopics) {
    throw ValidationError("topic label must be in [0,3], got " + std::to_string(value));
  }
  return static_cast<Topic>(value);
}

void sort_posts(std::vector<Post>& posts) {
  std::stable_sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
    return std::tie(a.created_at, a.post_id) < std::tie(b.created_at, b.post_id);
  });
}

std::vector<Violation> validate_corpus(const Corpus& corpus) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  const Post* prev = nullptr;
  for (const auto& p : corpus.posts) {
    if (p.post_id.empty()) out.push_back({p.post_id, "empty post_id"});
    if (!ids.insert(p.post_id).second) out.push_back({p.post_id, "duplicate id"});
    if (p.tokens != tokenize(p.text)) out.push_back({p.post_id, "tokens differ from tokenize(text)"});
    if (p.geotag && !valid_coordinates(*p.geotag)) {
      out.push_back({p.post_id, "geotag out of range"});
    }
    if (prev != nullptr && std::tie(p.created_at, p.post_id) < std::tie(prev->created_at, prev->post_id)) {
      out.push_back({p.post_id, "out of order"});
    }
    prev = &p;
  }
  auto dangling = [&](const auto& gold) {
    for (const auto& [id, unused] : gold) {
      if (!ids.contains(id)) out.push_back({id, "dangling gold key"});
    }
  };
  dangling(corpus.gold_estate);
  dangling(corpus.gold_topic);
  dangling(corpus.gold_location);
  dangling(corpus.gold_place);
  return out;
}

std::string_view granularity_name(Granularity g) {
  return g == Granularity::kPoi ? "POI" : "Neighbourhood";
}

std::optional<Granularity> granularity_from_name(std::string_view name) {
  if (name == "POI" || name == "poi") return Granularity::kPoi;
  if (name == "Neighbourhood" || name == "neighbourhood") return Granularity::kNeighbourhood;
  return std::nullopt;
}

std::vector<std::string> check_event(const ClassifiedEvent& e) {
  std::vector<std::string> problems;
  if (e.topic_label.has_value() != e.estate_label.related()) {
    problems.emplace_back("topic_label present iff estate_label = 1");
  }
  if (e.topic_scores.has_value() != e.topic_label.has_value()) {
    problems.emplace_back("topic_scores present iff topic_label present");
  }
  if (!(e.estate_score >= 0.0 && e.estate_score <= 1.0)) {
    problems.emplace_back("estate_score outside [0,1]");
  }
  if (e.topic_scores && e.topic_label) {
    double sum = 0.0;
    for (double s : *e.topic_scores) sum += s;
    if (std::abs(sum - 1.0) > 1e-6) problems.emplace_back("topic_scores do not sum to 1");
    if (static_cast<int>(argmax(*e.topic_scores)) != topic_index(*e.topic_label)) {
      problems.emplace_back("topic_label is not argmax(topic_scores)");
    }
  }
  if (e.location) {
    const auto& loc = *e.location;
    if ((loc.granularity == Granularity::kPoi) != loc.poi_id.has_value()) {
      problems.emplace_back("poi_id present iff granularity = POI");
    }
    if (!(loc.confidence >= 0.0 && loc.confidence <= 1.0)) {
      problems.emplace_back("location confidence outside [0,1]");
    }
    if (e.post.geotag && loc.granularity == Granularity::kPoi) {
      problems.emplace_back("POI location inferred for a geotagged post");
    }
  }
  return problems;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace estate
