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

#ifndef ESTATE_KERNELS_HPP
#define ESTATE_KERNELS_HPP

#include <exception>
#include <span>
#include <vector>

#include "estate/backend.hpp"
#include "estate/core_types.hpp"
#include "estate/evaluation.hpp"
#include "estate/geolocation.hpp"
#include "estate/linear_model.hpp"

// Data-parallel batch kernels. Each has an OpenMP version and a serial
// reference; the two must produce identical output for identical input, which
// the test suite checks.
namespace estate::kernels {

// Threads OpenMP will use for the parallel kernels.
int max_threads();

std::vector<Prediction> classify_batch_serial(const LinearModel& model, std::span<const Post> posts);
std::vector<Prediction> classify_batch(const LinearModel& model, std::span<const Post> posts);

// Classification through any backend. Failures (e.g. remote outages) are
// captured per post instead of aborting the batch.
struct Outcome {
  Prediction prediction;
  std::exception_ptr error;
};
std::vector<Outcome> classify_posts_serial(const ClassifierBackend& backend,
                                           std::span<const Post* const> posts);
std::vector<Outcome> classify_posts(const ClassifierBackend& backend,
                                    std::span<const Post* const> posts);

std::vector<GeolocationResult> geolocate_batch_serial(std::span<const Post> posts, const Gazetteer& gaz,
                                                      Granularity granularity,
                                                      const GeolocationParams& params = {});
std::vector<GeolocationResult> geolocate_batch(std::span<const Post> posts, const Gazetteer& gaz,
                                               Granularity granularity,
                                               const GeolocationParams& params = {});

// Parallel counterpart of confusion(); same validation.
ConfusionMatrix confusion_parallel(std::span<const int> gold, std::span<const int> pred,
                                   int num_classes);

}  // namespace estate::kernels

#endif  // ESTATE_KERNELS_HPP
