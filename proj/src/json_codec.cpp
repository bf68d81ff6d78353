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

#include "estate/json_codec.hpp"

#include "estate/error.hpp"

namespace estate {

using nlohmann::json;

namespace {

json point_json(const GeoPoint& p) {
  return json{{"latitude", p.latitude}, {"longitude", p.longitude}};
}

GeoPoint point_from(const json& j) {
  GeoPoint p{j.at("latitude").get<double>(), j.at("longitude").get<double>()};
  if (!valid_coordinates(p)) throw SchemaError("coordinates out of range");
  return p;
}

}  // namespace

json post_to_json(const Post& post) {
  json j;
  j["post_id"] = post.post_id;
  j["author_pseudonym"] = post.author_pseudonym;
  j["text"] = post.text;
  j["tokens"] = post.tokens;
  j["created_at"] = format_rfc3339(post.created_at);
  j["geotag"] = post.geotag ? point_json(*post.geotag) : json(nullptr);
  return j;
}

Post post_from_json(const json& j) {
  Post p;
  p.post_id = j.at("post_id").get<std::string>();
  p.author_pseudonym = j.at("author_pseudonym").get<std::string>();
  p.text = j.at("text").get<std::string>();
  p.tokens = j.at("tokens").get<std::vector<std::string>>();
  p.created_at = parse_rfc3339(j.at("created_at").get<std::string>());
  if (const auto& g = j.at("geotag"); !g.is_null()) p.geotag = point_from(g);
  return p;
}

json location_to_json(const ResolvedLocation& loc) {
  json j;
  j["granularity"] = std::string(granularity_name(loc.granularity));
  j["poi_id"] = loc.poi_id ? json(*loc.poi_id) : json(nullptr);
  j["neighbourhood_id"] = loc.neighbourhood_id;
  j["latitude"] = loc.point.latitude;
  j["longitude"] = loc.point.longitude;
  j["confidence"] = loc.confidence;
  return j;
}

ResolvedLocation location_from_json(const json& j) {
  ResolvedLocation loc;
  const auto g = granularity_from_name(j.at("granularity").get<std::string>());
  if (!g) throw SchemaError("unknown granularity");
  loc.granularity = *g;
  if (const auto& poi = j.at("poi_id"); !poi.is_null()) loc.poi_id = poi.get<std::string>();
  loc.neighbourhood_id = j.at("neighbourhood_id").get<std::string>();
  loc.point = point_from(j);
  loc.confidence = j.at("confidence").get<double>();
  return loc;
}

json event_to_json(const ClassifiedEvent& e) {
  json j;
  j["post"] = post_to_json(e.post);
  j["estate_label"] = e.estate_label.value();
  j["estate_score"] = e.estate_score;
  j["topic_label"] = e.topic_label ? json(std::string(topic_name(*e.topic_label))) : json(nullptr);
  j["topic_scores"] = e.topic_scores ? json(*e.topic_scores) : json(nullptr);
  j["location"] = e.location ? location_to_json(*e.location) : json(nullptr);
  j["pipeline_seq"] = e.pipeline_seq;
  j["fallback"] = e.fallback;
  return j;
}

ClassifiedEvent event_from_json(const json& j) {
  try {
    ClassifiedEvent e;
    e.post = post_from_json(j.at("post"));
    e.estate_label = EstateLabel(j.at("estate_label").get<int>());
    e.estate_score = j.at("estate_score").get<double>();
    if (const auto& t = j.at("topic_label"); !t.is_null()) {
      const auto topic = topic_from_name(t.get<std::string>());
      if (!topic) throw SchemaError("unknown topic name");
      e.topic_label = *topic;
    }
    if (const auto& s = j.at("topic_scores"); !s.is_null()) {
      e.topic_scores = s.get<TopicScores>();
    }
    if (const auto& l = j.at("location"); !l.is_null()) e.location = location_from_json(l);
    e.pipeline_seq = j.at("pipeline_seq").get<std::int64_t>();
    e.fallback = j.value("fallback", false);
    return e;
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("event record: ") + ex.what());
  } catch (const ValidationError& ex) {
    throw SchemaError(std::string("event record: ") + ex.what());
  }
}

std::string serialize_event(const ClassifiedEvent& event) { return event_to_json(event).dump(); }

ClassifiedEvent parse_event(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw SchemaError("event record is not a JSON object");
  return event_from_json(j);
}

}  // namespace estate
