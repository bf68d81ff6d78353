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

#ifndef ESTATE_PIPELINE_HPP
#define ESTATE_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "estate/backend.hpp"
#include "estate/core_types.hpp"
#include "estate/event_store.hpp"
#include "estate/geolocation.hpp"

namespace estate {

// Relabels a source report taxonomy onto the four deployed topics. The three
// major categories map to themselves; anything unlisted goes to the default.
struct ConsolidationMap {
  std::map<std::string, Topic, std::less<>> mapping;
  Topic default_target = Topic::kOthers;

  static ConsolidationMap standard();
};

Topic consolidate(std::string_view category, const ConsolidationMap& map);

enum class GeolocationMode { kOff, kPoi, kNeighbourhood };
enum class FallbackPolicy { kQueue, kNative };

std::optional<GeolocationMode> geolocation_mode_from_name(std::string_view name);

struct PipelineConfig {
  ClassifierBackend estate_backend;
  ClassifierBackend topic_backend;
  GeolocationMode geolocation_mode = GeolocationMode::kOff;
  FallbackPolicy remote_fallback = FallbackPolicy::kQueue;
  // Native models used when a remote stage is unavailable and the policy is
  // kNative. Each must be a native backend of the stage's label space.
  std::optional<ClassifierBackend> estate_fallback;
  std::optional<ClassifierBackend> topic_fallback;
  std::filesystem::path store_path;
  std::size_t retry_capacity = 1024;
  GeolocationParams geolocation_params;
};

// Throws ValidationError.
void validate_config(const PipelineConfig& config, const Gazetteer* gazetteer);

// Bounded FIFO of posts waiting for a remote backend, with exponential
// backoff per entry: 0.5 s * 2^(attempts - 1), capped at 60 s.
class RetryQueue {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RetryQueue(std::size_t capacity) : capacity_(capacity) {}

  // False when full.
  bool park(Post post, int attempts, Clock::time_point now);
  // Removes and returns every entry due at `now`, in FIFO order.
  std::vector<std::pair<Post, int>> take_due(Clock::time_point now);
  std::size_t size() const;

  static Clock::duration backoff(int attempts);

 private:
  struct Entry {
    Post post;
    int attempts;
    Clock::time_point next_attempt;
  };

  mutable std::mutex mu_;
  std::size_t capacity_;
  std::deque<Entry> entries_;
};

enum class PostStatus { kProcessed, kDuplicate, kParked };
std::string_view post_status_name(PostStatus s);

struct PostOutcome {
  PostStatus status = PostStatus::kProcessed;
  std::optional<ClassifiedEvent> event;  // absent when parked
  std::string detail;
};

// Estate gate -> topic classifier -> geolocation -> store.
class Pipeline {
 public:
  // gazetteer may be null only when geolocation is off. Throws
  // ValidationError for an invalid configuration.
  Pipeline(PipelineConfig config, std::shared_ptr<const Gazetteer> gazetteer, EventStore store);

  // Classifies and persists one post. Already-stored posts return their
  // stored event. With remote_fallback = kQueue an unavailable backend parks
  // the post; if the retry queue is full BackendUnavailable propagates.
  PostOutcome process_post(const Post& post);

  // Events in corpus order, parked posts omitted. Classification and
  // geolocation run on the OpenMP kernels; persistence is sequential in
  // corpus order.
  std::vector<ClassifiedEvent> process_corpus(const Corpus& corpus);
  // Same contract on the serial kernels. Used as the reference in tests.
  std::vector<ClassifiedEvent> process_corpus_serial(const Corpus& corpus);

  // Re-runs parked posts whose backoff has elapsed. Returns the outcomes of
  // the attempts (re-parked posts included).
  std::vector<PostOutcome> retry_parked(RetryQueue::Clock::time_point now = RetryQueue::Clock::now());
  std::size_t parked() const { return retry_.size(); }

  const PipelineConfig& config() const { return config_; }
  const Gazetteer* gazetteer() const { return gazetteer_.get(); }
  EventStore& store() { return store_; }
  const EventStore& store() const { return store_; }

 private:
  struct StageResult {
    std::optional<Prediction> prediction;  // absent: backend down, no fallback
    bool fallback = false;
    std::string error;
  };

  StageResult run_stage(const ClassifierBackend& backend, const std::optional<ClassifierBackend>& fallback,
                        const Post& post) const;
  StageResult finish_stage(Prediction* prediction, std::exception_ptr error,
                           const std::optional<ClassifierBackend>& fallback, const Post& post) const;
  ClassifiedEvent assemble(const Post& post, const Prediction& estate, bool estate_fallback,
                           const std::optional<Prediction>& topic, bool topic_fallback,
                           const std::optional<GeolocationResult>& inferred) const;
  bool needs_inference(const Post& post, int estate_label) const;
  PostOutcome process_post_attempt(const Post& post, int attempts);
  std::vector<ClassifiedEvent> run_corpus(const Corpus& corpus, bool parallel);
  PostOutcome park(const Post& post, int attempts, const std::string& why);

  PipelineConfig config_;
  std::shared_ptr<const Gazetteer> gazetteer_;
  EventStore store_;
  RetryQueue retry_;
};

}  // namespace estate

#endif  // ESTATE_PIPELINE_HPP
