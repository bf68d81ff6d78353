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

#include "estate/pipeline.hpp"

#include <algorithm>

#include "estate/error.hpp"
#include "estate/kernels.hpp"

namespace estate {

ConsolidationMap ConsolidationMap::standard() {
  ConsolidationMap m;
  m.mapping.emplace("Infrastructure", Topic::kInfrastructure);
  m.mapping.emplace("Parking", Topic::kParking);
  m.mapping.emplace("Noise", Topic::kNoise);
  return m;
}

Topic consolidate(std::string_view category, const ConsolidationMap& map) {
  const auto it = map.mapping.find(category);
  return it == map.mapping.end() ? map.default_target : it->second;
}

std::optional<GeolocationMode> geolocation_mode_from_name(std::string_view name) {
  if (name == "off") return GeolocationMode::kOff;
  if (name == "poi") return GeolocationMode::kPoi;
  if (name == "neighbourhood") return GeolocationMode::kNeighbourhood;
  return std::nullopt;
}

void validate_config(const PipelineConfig& c, const Gazetteer* gazetteer) {
  if (c.estate_backend.label_space() != LabelSpace::kEstate) {
    throw ValidationError("estate backend must use the estate label space");
  }
  if (c.topic_backend.label_space() != LabelSpace::kTopic) {
    throw ValidationError("topic backend must use the topic label space");
  }
  auto check_fallback = [](const std::optional<ClassifierBackend>& fb, LabelSpace space, const char* which) {
    if (!fb) return;
    if (fb->kind() != ClassifierBackend::Kind::kNative || fb->label_space() != space) {
      throw ValidationError(std::string(which) + " fallback must be a native model of the same label space");
    }
  };
  check_fallback(c.estate_fallback, LabelSpace::kEstate, "estate");
  check_fallback(c.topic_fallback, LabelSpace::kTopic, "topic");
  if (c.remote_fallback == FallbackPolicy::kNative) {
    if (c.estate_backend.kind() == ClassifierBackend::Kind::kRemote && !c.estate_fallback) {
      throw ValidationError("native fallback policy needs an estate fallback model");
    }
    if (c.topic_backend.kind() == ClassifierBackend::Kind::kRemote && !c.topic_fallback) {
      throw ValidationError("native fallback policy needs a topic fallback model");
    }
  }
  if (c.geolocation_mode != GeolocationMode::kOff && (gazetteer == nullptr || gazetteer->empty())) {
    throw ValidationError("geolocation needs a non-empty gazetteer");
  }
  if (c.retry_capacity == 0) throw ValidationError("retry queue capacity must be positive");
}

bool RetryQueue::park(Post post, int attempts, Clock::time_point now) {
  std::lock_guard lock(mu_);
  if (entries_.size() >= capacity_) return false;
  entries_.push_back({std::move(post), attempts, now + backoff(attempts)});
  return true;
}

std::vector<std::pair<Post, int>> RetryQueue::take_due(Clock::time_point now) {
  std::lock_guard lock(mu_);
  std::vector<std::pair<Post, int>> due;
  std::deque<Entry> waiting;
  for (auto& e : entries_) {
    if (e.next_attempt <= now) {
      due.emplace_back(std::move(e.post), e.attempts);
    } else {
      waiting.push_back(std::move(e));
    }
  }
  entries_ = std::move(waiting);
  return due;
}

std::size_t RetryQueue::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

RetryQueue::Clock::duration RetryQueue::backoff(int attempts) {
  using std::chrono::milliseconds;
  const int shift = std::clamp(attempts - 1, 0, 7);
  return std::min<Clock::duration>(milliseconds(500) * (1 << shift), std::chrono::seconds(60));
}

std::string_view post_status_name(PostStatus s) {
  switch (s) {
    case PostStatus::kProcessed: return "processed";
    case PostStatus::kDuplicate: return "duplicate";
    case PostStatus::kParked: return "parked";
  }
  return "";
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const Gazetteer> gazetteer, EventStore store)
    : config_(std::move(config)),
      gazetteer_(std::move(gazetteer)),
      store_(std::move(store)),
      retry_(config_.retry_capacity) {
  validate_config(config_, gazetteer_.get());
}

Pipeline::StageResult Pipeline::finish_stage(Prediction* prediction, std::exception_ptr error,
                                             const std::optional<ClassifierBackend>& fallback,
                                             const Post& post) const {
  StageResult r;
  if (!error) {
    r.prediction = std::move(*prediction);
    return r;
  }
  try {
    std::rethrow_exception(error);
  } catch (const BackendUnavailable& e) {
    if (config_.remote_fallback == FallbackPolicy::kNative && fallback) {
      r.prediction = fallback->classify(post);
      r.fallback = true;
    } else {
      r.error = e.what();
    }
  }
  return r;
}

Pipeline::StageResult Pipeline::run_stage(const ClassifierBackend& backend,
                                          const std::optional<ClassifierBackend>& fallback,
                                          const Post& post) const {
  Prediction p;
  std::exception_ptr error;
  try {
    p = backend.classify(post);
  } catch (const BackendUnavailable&) {
    error = std::current_exception();
  }
  return finish_stage(&p, error, fallback, post);
}

bool Pipeline::needs_inference(const Post& post, int estate_label) const {
  return estate_label == 1 && config_.geolocation_mode != GeolocationMode::kOff && !post.geotag;
}

namespace {

Granularity granularity_of(GeolocationMode mode) {
  return mode == GeolocationMode::kNeighbourhood ? Granularity::kNeighbourhood : Granularity::kPoi;
}

}  // namespace

ClassifiedEvent Pipeline::assemble(const Post& post, const Prediction& estate, bool estate_fallback,
                                   const std::optional<Prediction>& topic, bool topic_fallback,
                                   const std::optional<GeolocationResult>& inferred) const {
  ClassifiedEvent e;
  e.post = post;
  e.estate_label = EstateLabel(estate.label);
  e.estate_score = estate.scores.at(1);
  e.fallback = estate_fallback || topic_fallback;
  if (e.estate_label.related()) {
    e.topic_label = topic_from_index(topic->label);
    TopicScores scores{};
    std::copy_n(topic->scores.begin(), kNumTopics, scores.begin());
    e.topic_scores = scores;
  }
  if (config_.geolocation_mode == GeolocationMode::kNeighbourhood && e.post.geotag) {
    // Stored precision is capped at neighbourhood level.
    if (e.estate_label.related()) e.location = coarsen_to_neighbourhood(*e.post.geotag, *gazetteer_);
    e.post.geotag.reset();
  }
  if (inferred && inferred->resolved) e.location = inferred->resolved;
  return e;
}

PostOutcome Pipeline::park(const Post& post, int attempts, const std::string& why) {
  if (!retry_.park(post, attempts, RetryQueue::Clock::now())) {
    throw BackendUnavailable(config_.estate_backend.endpoint(),
                             "retry queue full; cannot park post " + post.post_id + ": " + why);
  }
  return {PostStatus::kParked, std::nullopt, why};
}

PostOutcome Pipeline::process_post_attempt(const Post& post, int attempts) {
  if (auto stored = store_.find(post.post_id)) return {PostStatus::kDuplicate, std::move(stored), {}};

  auto estate = run_stage(config_.estate_backend, config_.estate_fallback, post);
  if (!estate.prediction) return park(post, attempts, estate.error);

  std::optional<Prediction> topic;
  bool topic_fallback = false;
  if (estate.prediction->label == 1) {
    auto t = run_stage(config_.topic_backend, config_.topic_fallback, post);
    if (!t.prediction) return park(post, attempts, t.error);
    topic = std::move(t.prediction);
    topic_fallback = t.fallback;
  }

  std::optional<GeolocationResult> inferred;
  if (needs_inference(post, estate.prediction->label)) {
    inferred = geolocate(post, *gazetteer_, granularity_of(config_.geolocation_mode),
                         config_.geolocation_params);
  }

  ClassifiedEvent event = assemble(post, *estate.prediction, estate.fallback, topic, topic_fallback, inferred);
  const auto r = store_.append(event);
  if (!r.inserted) return {PostStatus::kDuplicate, store_.find(post.post_id), {}};
  event.pipeline_seq = r.seq;
  return {PostStatus::kProcessed, std::move(event), {}};
}

PostOutcome Pipeline::process_post(const Post& post) { return process_post_attempt(post, 1); }

std::vector<PostOutcome> Pipeline::retry_parked(RetryQueue::Clock::time_point now) {
  std::vector<PostOutcome> outcomes;
  for (auto& [post, attempts] : retry_.take_due(now)) {
    outcomes.push_back(process_post_attempt(post, attempts + 1));
  }
  return outcomes;
}

std::vector<ClassifiedEvent> Pipeline::run_corpus(const Corpus& corpus, bool parallel) {
  const std::size_t n = corpus.posts.size();
  std::vector<std::optional<ClassifiedEvent>> stored(n);
  std::vector<std::size_t> todo;  // corpus indices still to classify
  for (std::size_t i = 0; i < n; ++i) {
    stored[i] = store_.find(corpus.posts[i].post_id);
    if (!stored[i]) todo.push_back(i);
  }

  auto classify = [&](const ClassifierBackend& backend, const std::vector<const Post*>& posts) {
    return parallel ? kernels::classify_posts(backend, posts)
                    : kernels::classify_posts_serial(backend, posts);
  };

  // Stage 1: estate gate over every unstored post.
  std::vector<const Post*> gate_input;
  for (auto i : todo) gate_input.push_back(&corpus.posts[i]);
  auto gate_raw = classify(config_.estate_backend, gate_input);
  std::vector<StageResult> gate(n);
  for (std::size_t k = 0; k < todo.size(); ++k) {
    gate[todo[k]] = finish_stage(&gate_raw[k].prediction, gate_raw[k].error, config_.estate_fallback,
                                 corpus.posts[todo[k]]);
  }

  // Stage 2: topic classifier over posts the gate passed.
  std::vector<std::size_t> relevant;
  for (auto i : todo) {
    if (gate[i].prediction && gate[i].prediction->label == 1) relevant.push_back(i);
  }
  std::vector<const Post*> topic_input;
  for (auto i : relevant) topic_input.push_back(&corpus.posts[i]);
  auto topic_raw = classify(config_.topic_backend, topic_input);
  std::vector<StageResult> topic(n);
  for (std::size_t k = 0; k < relevant.size(); ++k) {
    topic[relevant[k]] = finish_stage(&topic_raw[k].prediction, topic_raw[k].error,
                                      config_.topic_fallback, corpus.posts[relevant[k]]);
  }

  // Stage 3: geolocation for relevant posts without a geotag.
  std::vector<std::size_t> to_locate;
  std::vector<Post> locate_input;
  for (auto i : relevant) {
    if (topic[i].prediction && needs_inference(corpus.posts[i], 1)) {
      to_locate.push_back(i);
      locate_input.push_back(corpus.posts[i]);
    }
  }
  std::vector<std::optional<GeolocationResult>> located(n);
  if (!locate_input.empty()) {
    const auto g = granularity_of(config_.geolocation_mode);
    auto results = parallel
                       ? kernels::geolocate_batch(locate_input, *gazetteer_, g, config_.geolocation_params)
                       : kernels::geolocate_batch_serial(locate_input, *gazetteer_, g, config_.geolocation_params);
    for (std::size_t k = 0; k < to_locate.size(); ++k) located[to_locate[k]] = std::move(results[k]);
  }

  // Stage 4: persist in corpus order.
  std::vector<ClassifiedEvent> events;
  events.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Post& post = corpus.posts[i];
    if (stored[i]) {
      events.push_back(std::move(*stored[i]));
      continue;
    }
    if (!gate[i].prediction) {
      park(post, 1, gate[i].error);
      continue;
    }
    const bool is_relevant = gate[i].prediction->label == 1;
    if (is_relevant && !topic[i].prediction) {
      park(post, 1, topic[i].error);
      continue;
    }
    ClassifiedEvent e = assemble(post, *gate[i].prediction, gate[i].fallback,
                                 is_relevant ? topic[i].prediction : std::nullopt, topic[i].fallback,
                                 located[i]);
    const auto r = store_.append(e);
    if (r.inserted) {
      e.pipeline_seq = r.seq;
      events.push_back(std::move(e));
    } else if (auto existing = store_.find(post.post_id)) {
      events.push_back(std::move(*existing));
    }
  }
  return events;
}

std::vector<ClassifiedEvent> Pipeline::process_corpus(const Corpus& corpus) {
  return run_corpus(corpus, true);
}

std::vector<ClassifiedEvent> Pipeline::process_corpus_serial(const Corpus& corpus) {
  return run_corpus(corpus, false);
}

}  // namespace estate
