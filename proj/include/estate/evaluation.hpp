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

#ifndef ESTATE_EVALUATION_HPP
#define ESTATE_EVALUATION_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "estate/core_types.hpp"
#include "estate/geolocation.hpp"

namespace estate {

// Rows are gold labels, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const { return n_; }
  std::uint64_t at(int gold, int pred) const { return counts_[index(gold, pred)]; }
  std::uint64_t& at(int gold, int pred) { return counts_[index(gold, pred)]; }
  std::uint64_t row_sum(int gold) const;
  std::uint64_t col_sum(int pred) const;
  std::uint64_t trace() const;
  std::uint64_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t index(int g, int p) const {
    return static_cast<std::size_t>(g) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(p);
  }

  int n_;
  std::vector<std::uint64_t> counts_;
};

// Throws ValidationError on length mismatch or out-of-range labels.
ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred, int num_classes);

enum class Task { kEstateDetection, kTopicClassification, kGeolocation };

std::string_view task_name(Task t);  // "estate" / "topic" / "geo"
std::optional<Task> task_from_name(std::string_view name);

struct ClassMetrics {
  std::string name;
  std::uint64_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;  // one-vs-rest
};

struct EvaluationReport {
  Task task = Task::kEstateDetection;
  std::vector<ClassMetrics> per_class;
  std::uint64_t total = 0;
  double overall_accuracy = 0.0;
  double weighted_f1 = 0.0;
  double weighted_accuracy = 0.0;
  std::optional<double> positive_f1;  // binary tasks: F1 of class 1
  std::optional<double> mean_distance_km;
  std::optional<double> resolved_fraction;
  bool empty_evaluation = false;
};

std::vector<std::string> default_class_names(Task task);

// 0/0 is taken as 0. Weighted aggregates use gold support. A matrix with no
// observations yields all zeros and empty_evaluation = true.
EvaluationReport metrics_from_confusion(const ConfusionMatrix& cm, Task task,
                                        std::span<const std::string> class_names = {});

struct GeoTruth {
  GeoPoint point;
  std::optional<std::string> place_id;  // POI or neighbourhood id
};

struct GeoErrorSummary {
  std::size_t total = 0;
  std::size_t resolved = 0;
  double mean_distance_km = 0.0;   // over resolved posts
  double resolved_fraction = 0.0;
  // Correct / total over posts whose gold carries a place id; unresolved
  // posts count as wrong. Absent when no gold place ids are supplied.
  std::optional<double> accuracy;
  bool empty_evaluation = false;
};

// Throws ValidationError when a result key is missing from gold.
GeoErrorSummary geolocation_error(const std::map<std::string, GeoTruth>& gold,
                                  const std::map<std::string, GeolocationResult>& results);

EvaluationReport geolocation_report(const GeoErrorSummary& summary);

enum class ReportFormat { kText, kCsv, kJson };
std::optional<ReportFormat> report_format_from_name(std::string_view name);

nlohmann::json report_to_json(const EvaluationReport& report);
// Table layout: one row per class then "Weighted Avg"; columns Accuracy,
// F1-score. Byte-stable.
std::string render_report(const EvaluationReport& report, ReportFormat format);

// Newline-delimited JSON keyed by post_id. Gold lines carry any of
// "estate" (0/1), "topic" (name), "lat"/"lon" and "place_id". Prediction
// lines are either canonical event records (as written by the pipeline) or
// {"post_id", "estate", "topic", "location"} with location in the event
// record's form or null.
struct GoldLabels {
  std::map<std::string, int> estate;
  std::map<std::string, int> topic;
  std::map<std::string, GeoTruth> geo;
};

struct PredictionSet {
  std::map<std::string, int> estate;
  std::map<std::string, int> topic;
  std::map<std::string, GeolocationResult> geo;
};

// Throw IoError / ValidationError (the latter names the line).
GoldLabels load_gold(const std::filesystem::path& path);
GoldLabels gold_from_corpus(const Corpus& corpus);
PredictionSet load_predictions(const std::filesystem::path& path);
PredictionSet predictions_from_events(std::span<const ClassifiedEvent> events);

// Scores posts present in both gold and predictions for the task.
EvaluationReport evaluate(Task task, const GoldLabels& gold, const PredictionSet& pred);

}  // namespace estate

#endif  // ESTATE_EVALUATION_HPP
