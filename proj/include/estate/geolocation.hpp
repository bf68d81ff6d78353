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

#ifndef ESTATE_GEOLOCATION_HPP
#define ESTATE_GEOLOCATION_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "estate/core_types.hpp"

namespace estate {

inline constexpr double kEarthRadiusKm = 6371.0;

// Great-circle distance. Throws ValidationError for out-of-range input.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

struct PointOfInterest {
  std::string poi_id;
  std::string name;
  std::vector<std::string> name_tokens;  // tokenize(name), filled by the gazetteer
  GeoPoint point;
  std::string neighbourhood_id;
};

struct Neighbourhood {
  std::string neighbourhood_id;
  std::string name;
  GeoPoint centroid;
};

struct PoiVisit {
  std::string poi_id;
  Timestamp at;
};

// Day-of-week (Monday first) x hour-of-day, UTC. Cell index = dow * 24 + hour.
inline constexpr int kPriorCells = 7 * 24;
using TemporalPrior = std::array<double, kPriorCells>;
int prior_cell(Timestamp ts);

class Gazetteer {
 public:
  // POIs and neighbourhoods are kept sorted by id. Temporal priors use
  // add-one smoothing over the 168 cells; IDF is
  // ln((1 + |pois|) / (1 + df)) + 1. Throws SchemaError for duplicate ids,
  // dangling neighbourhood references, unknown POIs in the history or
  // out-of-range coordinates.
  static Gazetteer build(std::vector<PointOfInterest> pois,
                         std::vector<Neighbourhood> neighbourhoods,
                         std::span<const PoiVisit> history = {});

  const std::vector<PointOfInterest>& pois() const { return pois_; }
  const std::vector<Neighbourhood>& neighbourhoods() const { return neighbourhoods_; }
  bool empty() const { return pois_.empty(); }

  const PointOfInterest* find_poi(std::string_view poi_id) const;
  const Neighbourhood* find_neighbourhood(std::string_view id) const;
  // Index into neighbourhoods() for a POI index.
  std::size_t neighbourhood_of(std::size_t poi_index) const { return poi_neighbourhood_[poi_index]; }

  // POI indices whose name contains the token, ascending.
  std::span<const std::uint32_t> postings(const std::string& token) const;
  // 0 for tokens absent from every POI name.
  double idf(const std::string& token) const;
  const TemporalPrior& prior(std::size_t poi_index) const { return priors_[poi_index]; }

 private:
  std::vector<PointOfInterest> pois_;
  std::vector<Neighbourhood> neighbourhoods_;
  std::vector<std::size_t> poi_neighbourhood_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> token_index_;
  std::unordered_map<std::string, double> idf_;
  std::vector<TemporalPrior> priors_;
};

// CSV files with headers
//   pois:            poi_id,name,lat,lon,neighbourhood_id
//   neighbourhoods:  neighbourhood_id,name,centroid_lat,centroid_lon
//   history:         poi_id,timestamp            (RFC 3339)
// Fields may be double-quoted. Throws IoError / SchemaError.
Gazetteer build_gazetteer(const std::filesystem::path& poi_file,
                          const std::filesystem::path& neighbourhood_file,
                          const std::optional<std::filesystem::path>& history_file = std::nullopt);
// Directory holding pois.csv, neighbourhoods.csv and optionally history.csv.
Gazetteer load_gazetteer_dir(const std::filesystem::path& dir);

struct GeolocationParams {
  double temporal_weight = 1.0;  // weight of the log-prior bonus
  double threshold = 2.0;        // minimum winning score
};

struct CandidateScore {
  std::size_t poi_index;
  double score;
};

// score(poi) = sum of idf over distinct tokens shared by the post and the POI
// name, plus temporal_weight * ln(prior[cell] * 168). Candidates are the
// POIs sharing at least one token, in ascending index order.
std::vector<CandidateScore> score_candidates(const Post& post, const Gazetteer& gaz,
                                             const GeolocationParams& params = {});

struct GeolocationResult {
  std::optional<ResolvedLocation> resolved;
  std::size_t candidates_considered = 0;
};

// POI mode picks the best POI (smallest id on ties). Neighbourhood mode sums
// candidate scores per neighbourhood and returns the winner's centroid. The
// winner must reach the threshold. Confidence is the winner's share of the
// positive scores at that granularity.
GeolocationResult geolocate(const Post& post, const Gazetteer& gaz, Granularity granularity,
                            const GeolocationParams& params = {});

// Nearest neighbourhood centroid (smallest id on ties), confidence 1.
ResolvedLocation coarsen_to_neighbourhood(const GeoPoint& point, const Gazetteer& gaz);

}  // namespace estate

#endif  // ESTATE_GEOLOCATION_HPP
