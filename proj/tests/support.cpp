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

#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>

#include <unistd.h>

#include "estate/text.hpp"

namespace estate::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("estate-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

PseudonymKey test_key(std::uint8_t seed) {
  std::vector<std::uint8_t> bytes(32);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(seed + i);
  return PseudonymKey(std::move(bytes));
}

Timestamp at_seconds(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

Post make_post(const std::string& id, const std::string& text, std::int64_t seconds,
               std::optional<GeoPoint> geotag) {
  Post p;
  p.post_id = id;
  p.author_pseudonym = std::string(32, 'a');
  p.text = text;
  p.tokens = tokenize(text);
  p.created_at = at_seconds(seconds);
  p.geotag = geotag;
  return p;
}

std::string random_word(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string w(len(rng), 'a');
  for (auto& c : w) c = static_cast<char>(letter(rng));
  return w;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

GeoPoint random_point(std::mt19937_64& rng) { return {uniform(rng, -90, 90), uniform(rng, -180, 180)}; }

Corpus synthetic_corpus(int per_topic, int non_estate, std::uint64_t seed, int words_per_post) {
  std::mt19937_64 rng(seed);
  constexpr int kVocab = 30;
  std::uniform_int_distribution<int> word(0, kVocab - 1);
  std::uniform_int_distribution<std::int64_t> when(1'700'000'000, 1'700'000'000 + 30 * 86400);
  Corpus c;
  int next_id = 0;
  auto emit = [&](const std::string& prefix, std::optional<Topic> topic) {
    std::string text;
    for (int k = 0; k < words_per_post; ++k) {
      if (k) text += ' ';
      text += prefix + "w" + std::to_string(word(rng));
    }
    char id[16];
    std::snprintf(id, sizeof id, "p%06d", next_id++);
    c.posts.push_back(make_post(id, text, when(rng)));
    c.gold_estate.emplace(id, EstateLabel(topic ? 1 : 0));
    if (topic) c.gold_topic.emplace(id, *topic);
  };
  for (Topic t : kAllTopics) {
    for (int i = 0; i < per_topic; ++i) emit("t" + std::to_string(topic_index(t)), t);
  }
  for (int i = 0; i < non_estate; ++i) emit("n", std::nullopt);
  sort_posts(c.posts);
  return c;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    const auto& id = corpus.posts[i].post_id;
    int key = -1;
    if (auto it = corpus.gold_estate.find(id); it != corpus.gold_estate.end() && it->second.related()) {
      const auto t = corpus.gold_topic.find(id);
      key = t == corpus.gold_topic.end() ? 4 : topic_index(t->second);
    }
    strata[key].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::set<std::size_t> test;
  for (auto& [key, idx] : strata) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
    test.insert(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
  }
  Corpus train, held;
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    Corpus& dst = test.count(i) ? held : train;
    const auto& p = corpus.posts[i];
    dst.posts.push_back(p);
    if (auto it = corpus.gold_estate.find(p.post_id); it != corpus.gold_estate.end()) {
      dst.gold_estate.insert(*it);
    }
    if (auto it = corpus.gold_topic.find(p.post_id); it != corpus.gold_topic.end()) dst.gold_topic.insert(*it);
    if (auto it = corpus.gold_location.find(p.post_id); it != corpus.gold_location.end()) {
      dst.gold_location.insert(*it);
    }
    if (auto it = corpus.gold_place.find(p.post_id); it != corpus.gold_place.end()) dst.gold_place.insert(*it);
  }
  return {std::move(train), std::move(held)};
}

Gazetteer synthetic_gazetteer(int n_neighbourhoods, int pois_per, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<std::string> used;
  auto fresh = [&] {
    for (;;) {
      auto w = random_word(rng, 5, 9);
      if (used.insert(w).second) return w;
    }
  };
  std::vector<Neighbourhood> nbhds;
  std::vector<PointOfInterest> pois;
  for (int n = 0; n < n_neighbourhoods; ++n) {
    char nid[16];
    std::snprintf(nid, sizeof nid, "N%03d", n);
    const GeoPoint centre{1.30 + uniform(rng, -0.1, 0.1), 103.80 + uniform(rng, -0.15, 0.15)};
    nbhds.push_back({nid, fresh(), centre});
    for (int k = 0; k < pois_per; ++k) {
      char pid[16];
      std::snprintf(pid, sizeof pid, "P%04d", n * pois_per + k);
      const GeoPoint at{centre.latitude + uniform(rng, -0.01, 0.01),
                        centre.longitude + uniform(rng, -0.01, 0.01)};
      pois.push_back({pid, fresh() + " " + fresh(), {}, at, nid});
    }
  }
  return Gazetteer::build(std::move(pois), std::move(nbhds));
}

ClassifiedEvent random_event(std::mt19937_64& rng, const std::string& post_id, std::int64_t seconds) {
  std::bernoulli_distribution coin(0.5);
  std::optional<GeoPoint> geotag;
  if (coin(rng)) geotag = GeoPoint{uniform(rng, 1.2, 1.45), uniform(rng, 103.6, 104.0)};
  ClassifiedEvent e;
  e.post = make_post(post_id, random_word(rng) + " " + random_word(rng) + " " + random_word(rng), seconds,
                     geotag);
  e.estate_label = EstateLabel(coin(rng) ? 1 : 0);
  e.estate_score = e.estate_label.related() ? uniform(rng, 0.5, 1.0) : uniform(rng, 0.0, 0.5);
  if (e.estate_label.related()) {
    TopicScores s{};
    double sum = 0.0;
    for (auto& v : s) sum += (v = uniform(rng, 0.01, 1.0));
    for (auto& v : s) v /= sum;
    e.topic_scores = s;
    e.topic_label = topic_from_index(static_cast<int>(argmax(s)));
    if (!geotag && coin(rng)) {
      ResolvedLocation loc;
      const int n = std::uniform_int_distribution<int>(0, 4)(rng);
      loc.neighbourhood_id = "N00" + std::to_string(n);
      if (coin(rng)) {
        loc.granularity = Granularity::kPoi;
        loc.poi_id = "P000" + std::to_string(n);
      } else {
        loc.granularity = Granularity::kNeighbourhood;
      }
      loc.point = {uniform(rng, 1.2, 1.45), uniform(rng, 103.6, 104.0)};
      loc.confidence = uniform(rng, 0.0, 1.0);
      e.location = loc;
    }
  }
  e.fallback = coin(rng);
  return e;
}

std::shared_ptr<const LinearModel> keyword_model(int num_classes,
                                                 const std::vector<std::pair<std::string, int>>& keywords) {
  auto m = std::make_shared<LinearModel>(num_classes);
  m->bias()[0] = 0.5;
  for (const auto& [word, c] : keywords) m->weight(c, feature_index(word)) = 20.0;
  return m;
}

std::shared_ptr<const LinearModel> keyword_estate_model() {
  return keyword_model(2, {{"lift", 1}, {"noise", 1}, {"parking", 1}, {"leak", 1}, {"others", 1}});
}

std::shared_ptr<const LinearModel> keyword_topic_model() {
  return keyword_model(4, {{"lift", 0}, {"leak", 0}, {"parking", 1}, {"noise", 2}, {"others", 3}});
}

PipelineConfig native_config(std::shared_ptr<const LinearModel> estate, std::shared_ptr<const LinearModel> topic,
                             GeolocationMode mode) {
  return PipelineConfig{ClassifierBackend::native(std::move(estate), LabelSpace::kEstate),
                        ClassifierBackend::native(std::move(topic), LabelSpace::kTopic),
                        mode,
                        FallbackPolicy::kQueue,
                        std::nullopt,
                        std::nullopt,
                        {},
                        16,
                        GeolocationParams{}};
}

}  // namespace estate::testing
