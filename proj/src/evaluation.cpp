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

#include "estate/evaluation.hpp"

#include <cstdio>
#include <fstream>

#include "estate/error.hpp"
#include "estate/json_codec.hpp"

namespace estate {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(int num_classes) : n_(num_classes) {
  if (num_classes < 2) throw ValidationError("confusion matrix needs at least 2 classes");
  counts_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
}

std::uint64_t ConfusionMatrix::row_sum(int gold) const {
  std::uint64_t s = 0;
  for (int p = 0; p < n_; ++p) s += at(gold, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(int pred) const {
  std::uint64_t s = 0;
  for (int g = 0; g < n_; ++g) s += at(g, pred);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (int c = 0; c < n_; ++c) s += at(c, c);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto v : counts_) s += v;
  return s;
}

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred, int num_classes) {
  if (gold.size() != pred.size()) {
    throw ValidationError("gold and predicted sequences differ in length");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= num_classes || pred[i] < 0 || pred[i] >= num_classes) {
      throw ValidationError("label out of range at position " + std::to_string(i));
    }
    ++cm.at(gold[i], pred[i]);
  }
  return cm;
}

std::string_view task_name(Task t) {
  switch (t) {
    case Task::kEstateDetection: return "estate";
    case Task::kTopicClassification: return "topic";
    case Task::kGeolocation: return "geo";
  }
  return "";
}

std::optional<Task> task_from_name(std::string_view name) {
  if (name == "estate") return Task::kEstateDetection;
  if (name == "topic") return Task::kTopicClassification;
  if (name == "geo") return Task::kGeolocation;
  return std::nullopt;
}

std::vector<std::string> default_class_names(Task task) {
  if (task == Task::kEstateDetection) return {"Non-estate", "Estate"};
  if (task == Task::kTopicClassification) {
    std::vector<std::string> names;
    for (auto t : kAllTopics) names.emplace_back(topic_name(t));
    return names;
  }
  return {};
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvaluationReport metrics_from_confusion(const ConfusionMatrix& cm, Task task,
                                        std::span<const std::string> class_names) {
  EvaluationReport r;
  r.task = task;
  const int n = cm.num_classes();
  std::vector<std::string> names(class_names.begin(), class_names.end());
  if (names.empty()) {
    names = default_class_names(task);
    if (static_cast<int>(names.size()) != n) {
      names.clear();
      for (int c = 0; c < n; ++c) names.push_back("class " + std::to_string(c));
    }
  }
  if (static_cast<int>(names.size()) != n) throw ValidationError("class name count mismatch");

  const std::uint64_t total = cm.total();
  r.total = total;
  r.empty_evaluation = total == 0;
  for (int c = 0; c < n; ++c) {
    ClassMetrics m;
    m.name = names[static_cast<std::size_t>(c)];
    const std::uint64_t tp = cm.at(c, c);
    const std::uint64_t row = cm.row_sum(c);
    const std::uint64_t col = cm.col_sum(c);
    m.support = row;
    m.precision = ratio(tp, col);
    m.recall = ratio(tp, row);
    // Count form of the harmonic mean: one rounding, so exact ratios stay exact.
    m.f1 = ratio(2 * tp, 2 * tp + (col - tp) + (row - tp));
    const std::uint64_t tn = total - row - col + tp;
    m.accuracy = ratio(tp + tn, total);
    r.per_class.push_back(std::move(m));
  }
  r.overall_accuracy = ratio(cm.trace(), total);
  if (total > 0) {
    for (const auto& m : r.per_class) {
      const double w = static_cast<double>(m.support) / static_cast<double>(total);
      r.weighted_f1 += w * m.f1;
      r.weighted_accuracy += w * m.accuracy;
    }
  }
  if (n == 2) r.positive_f1 = r.per_class[1].f1;
  return r;
}

GeoErrorSummary geolocation_error(const std::map<std::string, GeoTruth>& gold,
                                  const std::map<std::string, GeolocationResult>& results) {
  GeoErrorSummary s;
  s.total = results.size();
  s.empty_evaluation = results.empty();
  double dist_sum = 0.0;
  std::size_t with_place = 0;
  std::size_t correct = 0;
  for (const auto& [id, res] : results) {
    const auto it = gold.find(id);
    if (it == gold.end()) throw ValidationError("result for '" + id + "' has no gold location");
    const GeoTruth& truth = it->second;
    if (truth.place_id) ++with_place;
    if (!res.resolved) continue;
    ++s.resolved;
    dist_sum += haversine_km(truth.point, res.resolved->point);
    if (truth.place_id) {
      const auto& loc = *res.resolved;
      const std::string& predicted =
          loc.granularity == Granularity::kPoi && loc.poi_id ? *loc.poi_id : loc.neighbourhood_id;
      if (predicted == *truth.place_id) ++correct;
    }
  }
  s.mean_distance_km = s.resolved == 0 ? 0.0 : dist_sum / static_cast<double>(s.resolved);
  s.resolved_fraction = ratio(s.resolved, s.total);
  if (with_place > 0) s.accuracy = ratio(correct, with_place);
  return s;
}

EvaluationReport geolocation_report(const GeoErrorSummary& summary) {
  EvaluationReport r;
  r.task = Task::kGeolocation;
  r.total = summary.total;
  r.overall_accuracy = summary.accuracy.value_or(0.0);
  r.mean_distance_km = summary.mean_distance_km;
  r.resolved_fraction = summary.resolved_fraction;
  r.empty_evaluation = summary.empty_evaluation;
  return r;
}

std::optional<ReportFormat> report_format_from_name(std::string_view name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  return std::nullopt;
}

json report_to_json(const EvaluationReport& r) {
  json j;
  j["task"] = std::string(task_name(r.task));
  j["total"] = r.total;
  j["empty_evaluation"] = r.empty_evaluation;
  j["overall_accuracy"] = r.overall_accuracy;
  if (r.task != Task::kGeolocation) {
    json rows = json::array();
    for (const auto& m : r.per_class) {
      rows.push_back({{"class", m.name},
                      {"support", m.support},
                      {"precision", m.precision},
                      {"recall", m.recall},
                      {"f1", m.f1},
                      {"accuracy", m.accuracy}});
    }
    j["per_class"] = rows;
    j["weighted_f1"] = r.weighted_f1;
    j["weighted_accuracy"] = r.weighted_accuracy;
    j["weighted_avg"] = {{"class", "Weighted Avg"},
                         {"accuracy", r.weighted_accuracy},
                         {"f1", r.weighted_f1}};
  }
  j["positive_f1"] = r.positive_f1 ? json(*r.positive_f1) : json(nullptr);
  j["mean_distance_km"] = r.mean_distance_km ? json(*r.mean_distance_km) : json(nullptr);
  j["resolved_fraction"] = r.resolved_fraction ? json(*r.resolved_fraction) : json(nullptr);
  return j;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_text(const EvaluationReport& r) {
  std::string out;
  if (r.task == Task::kGeolocation) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %-20s %-9s\n", "Accuracy", "Mean distance (km)", "Resolved");
    out += buf;
    std::snprintf(buf, sizeof buf, "%-10.3f %-20.3f %-9.3f\n", r.overall_accuracy,
                  r.mean_distance_km.value_or(0.0), r.resolved_fraction.value_or(0.0));
    out += buf;
    return out;
  }
  std::size_t width = std::string("Weighted Avg").size();
  for (const auto& m : r.per_class) width = std::max(width, m.name.size());
  auto row = [&](const std::string& name, const std::string& acc, const std::string& f1) {
    out += name + std::string(width - name.size() + 2, ' ');
    out += acc + std::string(acc.size() < 10 ? 10 - acc.size() : 1, ' ');
    out += f1 + "\n";
  };
  out += "Task: " + std::string(task_name(r.task)) + " (n=" + std::to_string(r.total) + ")";
  out += r.empty_evaluation ? " empty evaluation\n" : "\n";
  out += "Overall accuracy: " + fmt("%.3f", r.overall_accuracy) + "\n";
  if (r.positive_f1) out += "F1 (positive class): " + fmt("%.3f", *r.positive_f1) + "\n";
  out += "\n";
  row("Class", "Accuracy", "F1-score");
  for (const auto& m : r.per_class) row(m.name, fmt("%.3f", m.accuracy), fmt("%.3f", m.f1));
  row("Weighted Avg", fmt("%.3f", r.weighted_accuracy), fmt("%.3f", r.weighted_f1));
  return out;
}

std::string render_csv(const EvaluationReport& r) {
  std::string out;
  if (r.task == Task::kGeolocation) {
    out += "accuracy,mean_distance_km,resolved_fraction\n";
    out += fmt("%.6f", r.overall_accuracy) + "," + fmt("%.6f", r.mean_distance_km.value_or(0.0)) +
           "," + fmt("%.6f", r.resolved_fraction.value_or(0.0)) + "\n";
    return out;
  }
  out += "class,accuracy,f1\n";
  for (const auto& m : r.per_class) {
    out += csv_field(m.name) + "," + fmt("%.6f", m.accuracy) + "," + fmt("%.6f", m.f1) + "\n";
  }
  out += "Weighted Avg," + fmt("%.6f", r.weighted_accuracy) + "," + fmt("%.6f", r.weighted_f1) + "\n";
  return out;
}

}  // namespace

std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText: return render_text(report);
    case ReportFormat::kCsv: return render_csv(report);
    case ReportFormat::kJson: return report_to_json(report).dump(2) + "\n";
  }
  return {};
}

namespace {

template <typename F>
void for_each_json_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ValidationError(path.string() + " line " + std::to_string(lineno) + ": not a JSON object");
    }
    try {
      f(j);
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

int topic_label_from_json(const json& v) {
  if (v.is_number_integer()) return topic_index(topic_from_index(v.get<int>()));
  const auto t = topic_from_name(v.get<std::string>());
  if (!t) throw ValidationError("unknown topic name");
  return topic_index(*t);
}

}  // namespace

GoldLabels load_gold(const std::filesystem::path& path) {
  GoldLabels gold;
  for_each_json_line(path, [&](const json& j) {
    const auto id = j.at("post_id").get<std::string>();
    if (auto it = j.find("estate"); it != j.end() && !it->is_null()) {
      gold.estate[id] = EstateLabel(it->get<int>()).value();
    }
    if (auto it = j.find("topic"); it != j.end() && !it->is_null()) {
      gold.topic[id] = topic_label_from_json(*it);
    }
    const bool has_lat = j.contains("lat") && !j["lat"].is_null();
    const bool has_lon = j.contains("lon") && !j["lon"].is_null();
    if (has_lat != has_lon) throw ValidationError("lat and lon must be given together");
    if (has_lat) {
      GeoTruth t{{j["lat"].get<double>(), j["lon"].get<double>()}, std::nullopt};
      if (!valid_coordinates(t.point)) throw ValidationError("gold coordinates out of range");
      if (auto it = j.find("place_id"); it != j.end() && !it->is_null()) t.place_id = it->get<std::string>();
      gold.geo[id] = std::move(t);
    }
  });
  return gold;
}

GoldLabels gold_from_corpus(const Corpus& corpus) {
  GoldLabels gold;
  for (const auto& [id, label] : corpus.gold_estate) gold.estate[id] = label.value();
  for (const auto& [id, topic] : corpus.gold_topic) gold.topic[id] = topic_index(topic);
  for (const auto& [id, point] : corpus.gold_location) {
    GeoTruth t{point, std::nullopt};
    if (auto it = corpus.gold_place.find(id); it != corpus.gold_place.end()) t.place_id = it->second;
    gold.geo[id] = std::move(t);
  }
  return gold;
}

namespace {

void add_event(PredictionSet& pred, const ClassifiedEvent& e) {
  const auto& id = e.post.post_id;
  pred.estate[id] = e.estate_label.value();
  if (e.topic_label) pred.topic[id] = topic_index(*e.topic_label);
  GeolocationResult g;
  g.resolved = e.location;
  pred.geo[id] = std::move(g);
}

}  // namespace

PredictionSet load_predictions(const std::filesystem::path& path) {
  PredictionSet pred;
  for_each_json_line(path, [&](const json& j) {
    if (j.contains("post")) {
      add_event(pred, event_from_json(j));
      return;
    }
    const auto id = j.at("post_id").get<std::string>();
    if (auto it = j.find("estate"); it != j.end() && !it->is_null()) {
      pred.estate[id] = EstateLabel(it->get<int>()).value();
    }
    if (auto it = j.find("topic"); it != j.end() && !it->is_null()) {
      pred.topic[id] = topic_label_from_json(*it);
    }
    if (auto it = j.find("location"); it != j.end()) {
      GeolocationResult g;
      if (!it->is_null()) g.resolved = location_from_json(*it);
      pred.geo[id] = std::move(g);
    }
  });
  return pred;
}

PredictionSet predictions_from_events(std::span<const ClassifiedEvent> events) {
  PredictionSet pred;
  for (const auto& e : events) add_event(pred, e);
  return pred;
}

EvaluationReport evaluate(Task task, const GoldLabels& gold, const PredictionSet& pred) {
  auto paired = [](const std::map<std::string, int>& g, const std::map<std::string, int>& p, int classes) {
    std::vector<int> gv;
    std::vector<int> pv;
    for (const auto& [id, label] : g) {
      if (auto it = p.find(id); it != p.end()) {
        gv.push_back(label);
        pv.push_back(it->second);
      }
    }
    return confusion(gv, pv, classes);
  };
  switch (task) {
    case Task::kEstateDetection:
      return metrics_from_confusion(paired(gold.estate, pred.estate, 2), task);
    case Task::kTopicClassification:
      return metrics_from_confusion(paired(gold.topic, pred.topic, kNumTopics), task);
    case Task::kGeolocation: {
      std::map<std::string, GeolocationResult> results;
      for (const auto& [id, r] : pred.geo) {
        if (gold.geo.contains(id)) results.emplace(id, r);
      }
      return geolocation_report(geolocation_error(gold.geo, results));
    }
  }
  return {};
}

}  // namespace estate
