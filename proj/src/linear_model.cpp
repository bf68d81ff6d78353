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

#include "estate/linear_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "estate/error.hpp"

namespace estate {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host byte order");

std::string_view label_space_name(LabelSpace s) {
  return s == LabelSpace::kEstate ? "estate" : "topic";
}

std::optional<LabelSpace> label_space_from_name(std::string_view name) {
  if (name == "estate") return LabelSpace::kEstate;
  if (name == "topic") return LabelSpace::kTopic;
  return std::nullopt;
}

LinearModel::LinearModel(int num_classes, std::uint32_t dim)
    : num_classes_(num_classes), dim_(dim) {
  if (num_classes < 2) throw ValidationError("a linear model needs at least 2 classes");
  if (dim == 0) throw ValidationError("a linear model needs a positive dimension");
  weights_.assign(static_cast<std::size_t>(num_classes) * dim, 0.0);
  bias_.assign(static_cast<std::size_t>(num_classes), 0.0);
}

std::vector<double> LinearModel::logits(const FeatureVector& x) const {
  std::vector<double> z(bias_.begin(), bias_.end());
  for (int c = 0; c < num_classes_; ++c) {
    const double* w = weights_.data() + row(c);
    double acc = 0.0;
    for (const auto& [f, v] : x.entries()) {
      if (f >= dim_) throw ValidationError("feature index exceeds model dimension");
      acc += w[f] * v;
    }
    z[static_cast<std::size_t>(c)] += acc;
  }
  return z;
}

std::vector<double> LinearModel::predict_proba(const FeatureVector& x) const {
  return softmax(logits(x));
}

bool LinearModel::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(weights_.begin(), weights_.end(), finite) &&
         std::all_of(bias_.begin(), bias_.end(), finite);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  if (p.size() > 1) {
    // Keep every component strictly inside (0, 1) even when the logit spread
    // exceeds what a double can resolve. Moves the sum by at most 1 ulp.
    const double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    for (double& v : p) v = std::clamp(v, lo, hi);
  }
  return p;
}

namespace {

constexpr char kMagic[4] = {'E', 'S', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw SchemaError("model file truncated reading " + what);
  }
  return v;
}

// Per-example log loss and class probabilities.
double example_loss(const LinearModel& m, const Example& ex, std::vector<double>* probs) {
  const auto z = m.logits(ex.features);
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  const double log_norm = mx + std::log(sum);
  if (probs != nullptr) {
    probs->resize(z.size());
    for (std::size_t c = 0; c < z.size(); ++c) (*probs)[c] = std::exp(z[c] - log_norm);
  }
  return log_norm - z[static_cast<std::size_t>(ex.label)];
}

double l2_term(const LinearModel& m, double l2) {
  double s = 0.0;
  for (double w : m.weights()) s += w * w;
  return 0.5 * l2 * s;
}

void check_labels(std::span<const Example> batch, int num_classes) {
  for (const auto& ex : batch) {
    if (ex.label < 0 || ex.label >= num_classes) throw ValidationError("example label out of range");
  }
}

}  // namespace

void LinearModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(kMagic, sizeof kMagic);
  put(out, kVersion);
  put(out, dim_);
  put(out, static_cast<std::uint32_t>(num_classes_));
  put(out, static_cast<std::uint32_t>(trained_on_.size()));
  out.write(trained_on_.data(), static_cast<std::streamsize>(trained_on_.size()));
  for (double b : bias_) put(out, b);
  for (int c = 0; c < num_classes_; ++c) {
    const double* w = weights_.data() + row(c);
    std::uint32_t nnz = 0;
    for (std::uint32_t f = 0; f < dim_; ++f) nnz += w[f] != 0.0;
    put(out, nnz);
    for (std::uint32_t f = 0; f < dim_; ++f) {
      if (w[f] != 0.0) {
        put(out, f);
        put(out, w[f]);
      }
    }
  }
  if (!out.flush()) throw IoError("failed writing model file " + path.string());
}

LinearModel LinearModel::load(const std::filesystem::path& path, std::optional<int> expected_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model file " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw SchemaError("not a model file: " + path.string());
  }
  if (get<std::uint32_t>(in, "version") != kVersion) throw SchemaError("unsupported model version");
  const auto dim = get<std::uint32_t>(in, "dim");
  const auto classes = get<std::uint32_t>(in, "num_classes");
  if (dim != kFeatureDim) {
    throw SchemaError("model dimension " + std::to_string(dim) + " does not match feature space " +
                      std::to_string(kFeatureDim));
  }
  if (classes < 2 || classes > 64) throw SchemaError("implausible class count");
  if (expected_classes && static_cast<int>(classes) != *expected_classes) {
    throw SchemaError("model has " + std::to_string(classes) + " classes, expected " +
                      std::to_string(*expected_classes));
  }
  LinearModel m(static_cast<int>(classes), dim);
  const auto flen = get<std::uint32_t>(in, "fingerprint length");
  if (flen > 4096) throw SchemaError("implausible fingerprint length");
  std::string fp(flen, '\0');
  if (!in.read(fp.data(), flen)) throw SchemaError("model file truncated reading fingerprint");
  m.trained_on_ = std::move(fp);
  for (auto& b : m.bias_) b = get<double>(in, "bias");
  for (std::uint32_t c = 0; c < classes; ++c) {
    const auto nnz = get<std::uint32_t>(in, "nnz");
    if (nnz > dim) throw SchemaError("implausible nonzero count");
    for (std::uint32_t k = 0; k < nnz; ++k) {
      const auto f = get<std::uint32_t>(in, "index");
      const auto v = get<double>(in, "weight");
      if (f >= dim) throw SchemaError("weight index out of range");
      m.weight(static_cast<int>(c), f) = v;
    }
  }
  if (!m.all_finite()) throw SchemaError("model contains non-finite weights");
  return m;
}

double training_loss(const LinearModel& model, std::span<const Example> batch, double l2) {
  check_labels(batch, model.num_classes());
  double data = 0.0;
  for (const auto& ex : batch) data += example_loss(model, ex, nullptr);
  const double mean = batch.empty() ? 0.0 : data / static_cast<double>(batch.size());
  return mean + l2_term(model, l2);
}

LossGradient loss_and_gradient(const LinearModel& model, std::span<const Example> batch,
                               double l2) {
  check_labels(batch, model.num_classes());
  LossGradient g;
  const auto w = model.weights();
  g.grad_weights.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g.grad_weights[i] = l2 * w[i];
  g.grad_bias.assign(static_cast<std::size_t>(model.num_classes()), 0.0);
  if (batch.empty()) {
    g.loss = l2_term(model, l2);
    return g;
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> p;
  double data = 0.0;
  for (const auto& ex : batch) {
    data += example_loss(model, ex, &p);
    for (int c = 0; c < model.num_classes(); ++c) {
      const double d = (p[static_cast<std::size_t>(c)] - (c == ex.label ? 1.0 : 0.0)) * inv_b;
      g.grad_bias[static_cast<std::size_t>(c)] += d;
      const std::size_t base = static_cast<std::size_t>(c) * model.dim();
      for (const auto& [f, v] : ex.features.entries()) g.grad_weights[base + f] += d * v;
    }
  }
  g.loss = data * inv_b + l2_term(model, l2);
  return g;
}

TrainingResult train_examples(std::vector<Example> examples, int num_classes,
                              const TrainParams& params, std::string fingerprint) {
  if (params.epochs < 1 || params.batch_size == 0 || !(params.learning_rate > 0.0) ||
      !(params.l2 >= 0.0)) {
    throw ValidationError("invalid training hyperparameters");
  }
  check_labels(examples, num_classes);
  std::set<int> present;
  for (const auto& ex : examples) present.insert(ex.label);
  if (present.size() < 2) {
    throw DegenerateDataError("training data must contain at least 2 classes, found " +
                              std::to_string(present.size()));
  }

  TrainingResult result{LinearModel(num_classes), {}};
  LinearModel& model = result.model;
  model.set_trained_on(std::move(fingerprint));

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);

  struct Delta {
    std::size_t index;
    double value;
  };
  std::vector<Delta> deltas;
  std::vector<double> bias_grad(static_cast<std::size_t>(num_classes));
  std::vector<double> p;

  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    // Fisher-Yates with explicit modulo so the permutation does not depend on
    // the standard library's distribution implementation.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    const double lr = params.learning_rate / std::sqrt(static_cast<double>(epoch));
    const double decay = 1.0 - lr * params.l2;

    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t end = std::min(order.size(), start + params.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      deltas.clear();
      std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = examples[order[k]];
        example_loss(model, ex, &p);
        for (int c = 0; c < num_classes; ++c) {
          const double d = (p[static_cast<std::size_t>(c)] - (c == ex.label ? 1.0 : 0.0)) * inv_b;
          bias_grad[static_cast<std::size_t>(c)] += d;
          const std::size_t base = static_cast<std::size_t>(c) * model.dim();
          for (const auto& [f, v] : ex.features.entries()) deltas.push_back({base + f, d * v});
        }
      }
      auto w = model.weights();
      if (decay != 1.0) {
        for (double& x : w) x *= decay;
      }
      for (const auto& d : deltas) w[d.index] -= lr * d.value;
      auto b = model.bias();
      for (std::size_t c = 0; c < b.size(); ++c) b[c] -= lr * bias_grad[c];
    }

    const double loss = training_loss(model, examples, params.l2);
    if (!std::isfinite(loss) || !model.all_finite()) {
      throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch));
    }
    result.epoch_losses.push_back(loss);
  }
  return result;
}

std::vector<Example> make_examples(const Corpus& corpus, LabelSpace target) {
  std::vector<Example> out;
  for (const auto& p : corpus.posts) {
    if (target == LabelSpace::kEstate) {
      const auto it = corpus.gold_estate.find(p.post_id);
      if (it == corpus.gold_estate.end()) continue;
      out.push_back({featurize(p.tokens), it->second.value()});
    } else {
      const auto it = corpus.gold_topic.find(p.post_id);
      if (it == corpus.gold_topic.end()) continue;
      const auto est = corpus.gold_estate.find(p.post_id);
      if (est != corpus.gold_estate.end() && !est->second.related()) continue;
      out.push_back({featurize(p.tokens), topic_index(it->second)});
    }
  }
  return out;
}

std::string corpus_fingerprint(const Corpus& corpus, LabelSpace target) {
  std::string acc(label_space_name(target));
  for (const auto& p : corpus.posts) {
    acc += '\n';
    acc += p.post_id;
    acc += '\t';
    acc += p.text;
    if (auto it = corpus.gold_estate.find(p.post_id); it != corpus.gold_estate.end()) {
      acc += "\te" + std::to_string(it->second.value());
    }
    if (auto it = corpus.gold_topic.find(p.post_id); it != corpus.gold_topic.end()) {
      acc += "\tt" + std::to_string(topic_index(it->second));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(acc)));
  return buf;
}

TrainingResult train_linear(const Corpus& corpus, LabelSpace target, const TrainParams& params) {
  auto examples = make_examples(corpus, target);
  return train_examples(std::move(examples), num_classes(target), params,
                        corpus_fingerprint(corpus, target));
}

}  // namespace estate
