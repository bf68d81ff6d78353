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

#include "estate/kernels.hpp"

#include <omp.h>

#include "estate/error.hpp"
#include "estate/text.hpp"

namespace estate::kernels {

int max_threads() { return omp_get_max_threads(); }

namespace {

Prediction predict(const LinearModel& model, const Post& post) {
  Prediction p;
  p.scores = model.predict_proba(featurize(post.tokens));
  p.label = static_cast<int>(argmax(p.scores));
  return p;
}

Outcome guarded(const ClassifierBackend& backend, const Post& post) {
  Outcome o;
  try {
    o.prediction = backend.classify(post);
  } catch (...) {
    o.error = std::current_exception();
  }
  return o;
}

}  // namespace

std::vector<Prediction> classify_batch_serial(const LinearModel& model, std::span<const Post> posts) {
  std::vector<Prediction> out(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) out[i] = predict(model, posts[i]);
  return out;
}

std::vector<Prediction> classify_batch(const LinearModel& model, std::span<const Post> posts) {
  std::vector<Prediction> out(posts.size());
  const auto n = static_cast<std::ptrdiff_t>(posts.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = predict(model, posts[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<Outcome> classify_posts_serial(const ClassifierBackend& backend,
                                           std::span<const Post* const> posts) {
  std::vector<Outcome> out(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) out[i] = guarded(backend, *posts[i]);
  return out;
}

std::vector<Outcome> classify_posts(const ClassifierBackend& backend,
                                    std::span<const Post* const> posts) {
  std::vector<Outcome> out(posts.size());
  const auto n = static_cast<std::ptrdiff_t>(posts.size());
  // Remote calls block on I/O; dynamic scheduling keeps slow requests from
  // stalling a whole chunk. The backend's own limiter caps in-flight calls.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = guarded(backend, *posts[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<GeolocationResult> geolocate_batch_serial(std::span<const Post> posts, const Gazetteer& gaz,
                                                      Granularity granularity,
                                                      const GeolocationParams& params) {
  std::vector<GeolocationResult> out(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) out[i] = geolocate(posts[i], gaz, granularity, params);
  return out;
}

std::vector<GeolocationResult> geolocate_batch(std::span<const Post> posts, const Gazetteer& gaz,
                                               Granularity granularity,
                                               const GeolocationParams& params) {
  std::vector<GeolocationResult> out(posts.size());
  const auto n = static_cast<std::ptrdiff_t>(posts.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = geolocate(posts[k], gaz, granularity, params);
  }
  return out;
}

ConfusionMatrix confusion_parallel(std::span<const int> gold, std::span<const int> pred,
                                   int num_classes) {
  if (gold.size() != pred.size()) {
    throw ValidationError("gold and predicted sequences differ in length");
  }
  ConfusionMatrix cm(num_classes);
  const auto n = static_cast<std::ptrdiff_t>(gold.size());
  const auto cells = static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes);
  std::ptrdiff_t first_bad = n;
  std::vector<std::uint64_t> counts(cells, 0);

#pragma omp parallel
  {
    std::vector<std::uint64_t> local(cells, 0);
    std::ptrdiff_t local_bad = n;
#pragma omp for nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const int g = gold[static_cast<std::size_t>(i)];
      const int p = pred[static_cast<std::size_t>(i)];
      if (g < 0 || g >= num_classes || p < 0 || p >= num_classes) {
        local_bad = std::min(local_bad, i);
        continue;
      }
      ++local[static_cast<std::size_t>(g) * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(p)];
    }
#pragma omp critical(estate_confusion_merge)
    {
      for (std::size_t k = 0; k < cells; ++k) counts[k] += local[k];
      first_bad = std::min(first_bad, local_bad);
    }
  }
  if (first_bad != n) {
    throw ValidationError("label out of range at position " + std::to_string(first_bad));
  }
  for (int g = 0; g < num_classes; ++g) {
    for (int p = 0; p < num_classes; ++p) {
      cm.at(g, p) = counts[static_cast<std::size_t>(g) * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(p)];
    }
  }
  return cm;
}

}  // namespace estate::kernels
