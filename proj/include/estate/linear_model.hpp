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

#ifndef ESTATE_LINEAR_MODEL_HPP
#define ESTATE_LINEAR_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "estate/core_types.hpp"
#include "estate/text.hpp"

namespace estate {

enum class LabelSpace { kEstate, kTopic };

constexpr int num_classes(LabelSpace s) { return s == LabelSpace::kEstate ? 2 : kNumTopics; }
std::string_view label_space_name(LabelSpace s);  // "estate" / "topic"
std::optional<LabelSpace> label_space_from_name(std::string_view name);

// Multinomial logistic regression over hashed n-gram features.
// Weights are stored row-major: weight(c, f) = weights()[c * dim() + f].
class LinearModel {
 public:
  explicit LinearModel(int num_classes, std::uint32_t dim = kFeatureDim);

  int num_classes() const { return num_classes_; }
  std::uint32_t dim() const { return dim_; }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> bias() { return bias_; }
  std::span<const double> bias() const { return bias_; }

  double weight(int c, std::uint32_t f) const { return weights_[row(c) + f]; }
  double& weight(int c, std::uint32_t f) { return weights_[row(c) + f]; }

  const std::string& trained_on() const { return trained_on_; }
  void set_trained_on(std::string fingerprint) { trained_on_ = std::move(fingerprint); }

  std::vector<double> logits(const FeatureVector& x) const;
  std::vector<double> predict_proba(const FeatureVector& x) const;
  bool all_finite() const;

  // Binary format, little-endian:
  //   "ESLM" u32 version=1 u32 dim u32 num_classes
  //   u32 len, fingerprint bytes
  //   num_classes x f64 bias
  //   per class: u32 nnz, nnz x (u32 index, f64 value)
  void save(const std::filesystem::path& path) const;
  // Throws IoError / SchemaError; rejects dimension or class-count mismatch.
  static LinearModel load(const std::filesystem::path& path,
                          std::optional<int> expected_classes = std::nullopt);

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::size_t row(int c) const { return static_cast<std::size_t>(c) * dim_; }

  int num_classes_;
  std::uint32_t dim_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  std::string trained_on_;
};

// Numerically stable softmax. With two or more classes every component is
// strictly inside (0, 1).
std::vector<double> softmax(std::span<const double> logits);

struct Example {
  FeatureVector features;
  int label = 0;
};

struct TrainParams {
  double l2 = 1e-4;
  double learning_rate = 0.1;  // epoch e (1-based) uses learning_rate / sqrt(e)
  int epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 13;
};

// Mean cross-entropy over the batch plus (l2 / 2) * ||W||^2. Bias is not
// penalised. Gradients are dense, laid out like the model.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;
};

double training_loss(const LinearModel& model, std::span<const Example> batch, double l2);
LossGradient loss_and_gradient(const LinearModel& model, std::span<const Example> batch,
                               double l2);

struct TrainingResult {
  LinearModel model;
  std::vector<double> epoch_losses;  // full-data loss after each epoch
};

// Mini-batch gradient descent. Throws DegenerateDataError with fewer than two
// classes present and DivergenceError on a non-finite loss.
TrainingResult train_examples(std::vector<Example> examples, int num_classes,
                              const TrainParams& params, std::string fingerprint = {});

// Builds examples from gold labels. For kTopic only posts whose gold estate
// label is 1 (or absent) and that carry a gold topic are used.
std::vector<Example> make_examples(const Corpus& corpus, LabelSpace target);
std::string corpus_fingerprint(const Corpus& corpus, LabelSpace target);
TrainingResult train_linear(const Corpus& corpus, LabelSpace target,
                            const TrainParams& params = {});

}  // namespace estate

#endif  // ESTATE_LINEAR_MODEL_HPP
