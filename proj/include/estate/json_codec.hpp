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

#ifndef ESTATE_JSON_CODEC_HPP
#define ESTATE_JSON_CODEC_HPP

#include <string>
#include <string_view>

#include "json.hpp"

#include "estate/core_types.hpp"

namespace estate {

// Canonical JSON forms. Field names follow the domain types; absent
// optionals are written as null and topics are written by name. Keys are
// emitted in sorted order so output is byte-stable.
nlohmann::json post_to_json(const Post& post);
Post post_from_json(const nlohmann::json& j);

nlohmann::json location_to_json(const ResolvedLocation& loc);
ResolvedLocation location_from_json(const nlohmann::json& j);

nlohmann::json event_to_json(const ClassifiedEvent& event);
ClassifiedEvent event_from_json(const nlohmann::json& j);

// One line, no trailing newline.
std::string serialize_event(const ClassifiedEvent& event);
// Throws SchemaError on malformed input.
ClassifiedEvent parse_event(std::string_view line);

}  // namespace estate

#endif  // ESTATE_JSON_CODEC_HPP
