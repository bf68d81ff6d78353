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

// Serial reference vs OpenMP kernels. Run with --benchmark_filter to pick a
// kernel; OMP_NUM_THREADS controls the team size.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "estate/kernels.hpp"
#include "estate/text.hpp"

namespace estate {
namespace {

std::string word(std::mt19937_64& rng) {
  std::string w(3 + rng() % 6, 'a');
  for (auto& c : w) c = static_cast<char>('a' + rng() % 26);
  return w;
}

std::vector<Post> make_posts(std::size_t n, const std::vector<std::string>& names) {
  std::mt19937_64 rng(1);
  std::vector<Post> posts(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (int k = 0; k < 20; ++k) {
      if (k) text += ' ';
      text += (!names.empty() && rng() % 4 == 0) ? names[rng() % names.size()] : word(rng);
    }
    posts[i].post_id = std::to_string(i);
    posts[i].text = text;
    posts[i].tokens = tokenize(text);
    posts[i].created_at = Timestamp(std::chrono::seconds(1'700'000'000 + static_cast<std::int64_t>(rng() % 1'000'000)));
  }
  return posts;
}

const LinearModel& model() {
  static const LinearModel m = [] {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    LinearModel m(kNumTopics);
    for (auto& w : m.weights()) w = u(rng);
    return m;
  }();
  return m;
}

const Gazetteer& gazetteer() {
  static const Gazetteer g = [] {
    std::mt19937_64 rng(3);
    std::vector<Neighbourhood> nbs;
    std::vector<PointOfInterest> pois;
    for (int n = 0; n < 50; ++n) {
      const auto nid = "N" + std::to_string(n);
      nbs.push_back({nid, word(rng), {1.3 + (n % 7) * 0.01, 103.8 + (n / 7) * 0.01}});
      for (int k = 0; k < 40; ++k) {
        pois.push_back({nid + "P" + std::to_string(k), word(rng) + " " + word(rng), {},
                        {1.3 + k * 0.001, 103.8 + n * 0.001}, nid});
      }
    }
    return Gazetteer::build(std::move(pois), std::move(nbs));
  }();
  return g;
}

std::vector<std::string> poi_words() {
  std::vector<std::string> out;
  for (const auto& p : gazetteer().pois()) out.insert(out.end(), p.name_tokens.begin(), p.name_tokens.end());
  return out;
}

template <auto Kernel>
void BM_Classify(benchmark::State& state) {
  const auto posts = make_posts(static_cast<std::size_t>(state.range(0)), {});
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(model(), posts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_Geolocate(benchmark::State& state) {
  const auto posts = make_posts(static_cast<std::size_t>(state.range(0)), poi_words());
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(posts, gazetteer(), Granularity::kPoi, GeolocationParams{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_Confusion(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<int> gold(static_cast<std::size_t>(state.range(0))), pred(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold[i] = static_cast<int>(rng() % kNumTopics);
    pred[i] = static_cast<int>(rng() % kNumTopics);
  }
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(gold, pred, kNumTopics));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_Classify<kernels::classify_batch_serial>)->Name("classify/serial")->Arg(2000)->UseRealTime();
BENCHMARK(BM_Classify<kernels::classify_batch>)->Name("classify/omp")->Arg(2000)->UseRealTime();
BENCHMARK(BM_Geolocate<kernels::geolocate_batch_serial>)->Name("geolocate/serial")->Arg(2000)->UseRealTime();
BENCHMARK(BM_Geolocate<kernels::geolocate_batch>)->Name("geolocate/omp")->Arg(2000)->UseRealTime();
BENCHMARK(BM_Confusion<confusion>)->Name("confusion/serial")->Arg(1 << 20)->UseRealTime();
BENCHMARK(BM_Confusion<kernels::confusion_parallel>)->Name("confusion/omp")->Arg(1 << 20)->UseRealTime();

}  // namespace
}  // namespace estate

BENCHMARK_MAIN();
