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

#include "estate/geolocation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "estate/error.hpp"
#include "estate/text.hpp"

namespace estate {

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  if (!valid_coordinates(a) || !valid_coordinates(b)) {
    throw ValidationError("coordinates out of range");
  }
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (b.latitude - a.latitude) * kRad;
  const double dlon = (b.longitude - a.longitude) * kRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(a.latitude * kRad) * std::cos(b.latitude * kRad) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

int prior_cell(Timestamp ts) { return day_of_week(ts) * 24 + hour_of_day(ts); }

namespace {

template <typename T>
std::size_t index_of(const std::vector<T>& sorted, std::string_view id, std::string T::*key) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), id,
                                   [&](const T& x, std::string_view v) { return x.*key < v; });
  if (it == sorted.end() || (*it).*key != id) return sorted.size();
  return static_cast<std::size_t>(it - sorted.begin());
}

}  // namespace

Gazetteer Gazetteer::build(std::vector<PointOfInterest> pois,
                           std::vector<Neighbourhood> neighbourhoods,
                           std::span<const PoiVisit> history) {
  Gazetteer g;
  std::sort(neighbourhoods.begin(), neighbourhoods.end(),
            [](const auto& a, const auto& b) { return a.neighbourhood_id < b.neighbourhood_id; });
  for (std::size_t i = 0; i < neighbourhoods.size(); ++i) {
    const auto& n = neighbourhoods[i];
    if (n.neighbourhood_id.empty()) throw SchemaError("neighbourhood with empty id");
    if (i > 0 && neighbourhoods[i - 1].neighbourhood_id == n.neighbourhood_id) {
      throw SchemaError("duplicate neighbourhood id " + n.neighbourhood_id);
    }
    if (!valid_coordinates(n.centroid)) {
      throw SchemaError("neighbourhood " + n.neighbourhood_id + ": centroid out of range");
    }
  }
  g.neighbourhoods_ = std::move(neighbourhoods);

  std::sort(pois.begin(), pois.end(), [](const auto& a, const auto& b) { return a.poi_id < b.poi_id; });
  for (std::size_t i = 0; i < pois.size(); ++i) {
    auto& p = pois[i];
    if (p.poi_id.empty()) throw SchemaError("POI with empty id");
    if (i > 0 && pois[i - 1].poi_id == p.poi_id) throw SchemaError("duplicate poi id " + p.poi_id);
    if (!valid_coordinates(p.point)) throw SchemaError("POI " + p.poi_id + ": coordinates out of range");
    const std::size_t n = index_of(g.neighbourhoods_, p.neighbourhood_id, &Neighbourhood::neighbourhood_id);
    if (n == g.neighbourhoods_.size()) {
      throw SchemaError("POI " + p.poi_id + " references unknown neighbourhood '" +
                        p.neighbourhood_id + "'");
    }
    g.poi_neighbourhood_.push_back(n);
    p.name_tokens = tokenize(p.name);
  }
  g.pois_ = std::move(pois);

  for (std::uint32_t i = 0; i < g.pois_.size(); ++i) {
    const std::set<std::string> distinct(g.pois_[i].name_tokens.begin(), g.pois_[i].name_tokens.end());
    for (const auto& t : distinct) g.token_index_[t].push_back(i);
  }
  const double n_pois = static_cast<double>(g.pois_.size());
  for (const auto& [token, posting] : g.token_index_) {
    g.idf_[token] = std::log((1.0 + n_pois) / (1.0 + static_cast<double>(posting.size()))) + 1.0;
  }

  std::vector<std::array<std::uint64_t, kPriorCells>> counts(g.pois_.size());
  for (auto& c : counts) c.fill(0);
  for (const auto& v : history) {
    const std::size_t i = index_of(g.pois_, v.poi_id, &PointOfInterest::poi_id);
    if (i == g.pois_.size()) throw SchemaError("history references unknown POI '" + v.poi_id + "'");
    ++counts[i][static_cast<std::size_t>(prior_cell(v.at))];
  }
  g.priors_.resize(g.pois_.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::uint64_t total = 0;
    for (auto c : counts[i]) total += c;
    const double denom = static_cast<double>(total) + kPriorCells;
    for (int k = 0; k < kPriorCells; ++k) {
      g.priors_[i][static_cast<std::size_t>(k)] = (static_cast<double>(counts[i][static_cast<std::size_t>(k)]) + 1.0) / denom;
    }
  }
  return g;
}

const PointOfInterest* Gazetteer::find_poi(std::string_view poi_id) const {
  const std::size_t i = index_of(pois_, poi_id, &PointOfInterest::poi_id);
  return i == pois_.size() ? nullptr : &pois_[i];
}

const Neighbourhood* Gazetteer::find_neighbourhood(std::string_view id) const {
  const std::size_t i = index_of(neighbourhoods_, id, &Neighbourhood::neighbourhood_id);
  return i == neighbourhoods_.size() ? nullptr : &neighbourhoods_[i];
}

std::span<const std::uint32_t> Gazetteer::postings(const std::string& token) const {
  const auto it = token_index_.find(token);
  if (it == token_index_.end()) return {};
  return it->second;
}

double Gazetteer::idf(const std::string& token) const {
  const auto it = idf_.find(token);
  return it == idf_.end() ? 0.0 : it->second;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (quoted) throw SchemaError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

struct CsvTable {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": missing header");
  if (split_csv_line(line) != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw SchemaError(path.string() + ": header must be '" + expected + "'");
  }
  CsvTable t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw SchemaError(path.string() + " row " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  return t;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError(where + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

Gazetteer build_gazetteer(const std::filesystem::path& poi_file,
                          const std::filesystem::path& neighbourhood_file,
                          const std::optional<std::filesystem::path>& history_file) {
  const auto nt = read_csv(neighbourhood_file, {"neighbourhood_id", "name", "centroid_lat", "centroid_lon"});
  std::vector<Neighbourhood> neighbourhoods;
  std::set<std::string> known;
  for (std::size_t i = 0; i < nt.rows.size(); ++i) {
    const auto& r = nt.rows[i];
    const auto where = neighbourhood_file.string() + " row " + std::to_string(nt.line_numbers[i]);
    neighbourhoods.push_back({r[0], r[1], {parse_double(r[2], where), parse_double(r[3], where)}});
    known.insert(r[0]);
  }

  const auto pt = read_csv(poi_file, {"poi_id", "name", "lat", "lon", "neighbourhood_id"});
  std::vector<PointOfInterest> pois;
  for (std::size_t i = 0; i < pt.rows.size(); ++i) {
    const auto& r = pt.rows[i];
    const auto where = poi_file.string() + " row " + std::to_string(pt.line_numbers[i]);
    if (!known.contains(r[4])) {
      throw SchemaError(where + ": unknown neighbourhood '" + r[4] + "'");
    }
    pois.push_back({r[0], r[1], {}, {parse_double(r[2], where), parse_double(r[3], where)}, r[4]});
  }

  std::vector<PoiVisit> history;
  if (history_file) {
    const auto ht = read_csv(*history_file, {"poi_id", "timestamp"});
    for (std::size_t i = 0; i < ht.rows.size(); ++i) {
      try {
        history.push_back({ht.rows[i][0], parse_rfc3339(ht.rows[i][1])});
      } catch (const ValidationError& e) {
        throw SchemaError(history_file->string() + " row " + std::to_string(ht.line_numbers[i]) +
                          ": " + e.what());
      }
    }
  }
  return Gazetteer::build(std::move(pois), std::move(neighbourhoods), history);
}

Gazetteer load_gazetteer_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("gazetteer directory not found: " + dir.string());
  const auto history = dir / "history.csv";
  return build_gazetteer(dir / "pois.csv", dir / "neighbourhoods.csv",
                         std::filesystem::exists(history) ? std::optional(history) : std::nullopt);
}

std::vector<CandidateScore> score_candidates(const Post& post, const Gazetteer& gaz,
                                             const GeolocationParams& params) {
  const std::set<std::string> distinct(post.tokens.begin(), post.tokens.end());
  // Sparse accumulation: POI index -> text score.
  std::vector<std::pair<std::uint32_t, double>> hits;
  for (const auto& t : distinct) {
    const auto postings = gaz.postings(t);
    if (postings.empty()) continue;
    const double w = gaz.idf(t);
    for (auto i : postings) hits.emplace_back(i, w);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  const auto cell = static_cast<std::size_t>(prior_cell(post.created_at));
  std::vector<CandidateScore> out;
  for (std::size_t k = 0; k < hits.size();) {
    const auto poi = hits[k].first;
    double text = 0.0;
    for (; k < hits.size() && hits[k].first == poi; ++k) text += hits[k].second;
    const double temporal = std::log(gaz.prior(poi)[cell] * kPriorCells);
    out.push_back({poi, text + params.temporal_weight * temporal});
  }
  return out;
}

GeolocationResult geolocate(const Post& post, const Gazetteer& gaz, Granularity granularity,
                            const GeolocationParams& params) {
  GeolocationResult result;
  const auto candidates = score_candidates(post, gaz, params);
  result.candidates_considered = candidates.size();
  if (candidates.empty()) return result;

  if (granularity == Granularity::kPoi) {
    // Candidates are in ascending POI index, i.e. ascending poi_id, so a
    // strict comparison keeps the smallest id on ties.
    std::size_t best = 0;
    double positive = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (candidates[k].score > candidates[best].score) best = k;
      if (candidates[k].score > 0.0) positive += candidates[k].score;
    }
    const auto& win = candidates[best];
    if (!(win.score >= params.threshold)) return result;
    const auto& poi = gaz.pois()[win.poi_index];
    ResolvedLocation loc;
    loc.granularity = Granularity::kPoi;
    loc.poi_id = poi.poi_id;
    loc.neighbourhood_id = poi.neighbourhood_id;
    loc.point = poi.point;
    loc.confidence = positive > 0.0 ? std::clamp(win.score / positive, 0.0, 1.0) : 0.0;
    result.resolved = std::move(loc);
    return result;
  }

  std::vector<std::pair<std::size_t, double>> sums;  // neighbourhood index -> summed score
  for (const auto& c : candidates) sums.emplace_back(gaz.neighbourhood_of(c.poi_index), c.score);
  std::sort(sums.begin(), sums.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<std::size_t, double>> merged;
  for (const auto& s : sums) {
    if (!merged.empty() && merged.back().first == s.first) {
      merged.back().second += s.second;
    } else {
      merged.push_back(s);
    }
  }
  std::size_t best = 0;
  double positive = 0.0;
  for (std::size_t k = 0; k < merged.size(); ++k) {
    if (merged[k].second > merged[best].second) best = k;
    if (merged[k].second > 0.0) positive += merged[k].second;
  }
  const auto& [nb_index, score] = merged[best];
  if (!(score >= params.threshold)) return result;
  const auto& nb = gaz.neighbourhoods()[nb_index];
  ResolvedLocation loc;
  loc.granularity = Granularity::kNeighbourhood;
  loc.neighbourhood_id = nb.neighbourhood_id;
  loc.point = nb.centroid;
  loc.confidence = positive > 0.0 ? std::clamp(score / positive, 0.0, 1.0) : 0.0;
  result.resolved = std::move(loc);
  return result;
}

ResolvedLocation coarsen_to_neighbourhood(const GeoPoint& point, const Gazetteer& gaz) {
  const auto& nbs = gaz.neighbourhoods();
  if (nbs.empty()) throw ValidationError("gazetteer has no neighbourhoods");
  std::size_t best = 0;
  double best_d = haversine_km(point, nbs[0].centroid);
  for (std::size_t i = 1; i < nbs.size(); ++i) {
    const double d = haversine_km(point, nbs[i].centroid);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  ResolvedLocation loc;
  loc.granularity = Granularity::kNeighbourhood;
  loc.neighbourhood_id = nbs[best].neighbourhood_id;
  loc.point = nbs[best].centroid;
  loc.confidence = 1.0;
  return loc;
}

}  // namespace estate
