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

#ifndef ESTATE_TIME_HPP
#define ESTATE_TIME_HPP

#include <chrono>
#include <string>
#include <string_view>

namespace estate {

// UTC instant at one-second precision.
using Timestamp = std::chrono::sys_seconds;

// Accepts `YYYY-MM-DDTHH:MM:SS[.fff](Z|+hh:mm|-hh:mm)`; lowercase `t`/`z`
// and a space separator are tolerated. Fractional seconds are truncated.
// Throws ValidationError on anything else.
Timestamp parse_rfc3339(std::string_view text);

// Always `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_rfc3339(Timestamp ts);

// 0 = Monday ... 6 = Sunday, in UTC.
int day_of_week(Timestamp ts);
int hour_of_day(Timestamp ts);

}  // namespace estate

#endif  // ESTATE_TIME_HPP
