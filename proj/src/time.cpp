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

#include "estate/time.hpp"

#include <cctype>
#include <cstdio>

#include "estate/error.hpp"

namespace estate {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ValidationError("timestamp too short");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw ValidationError("timestamp: expected digit");
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) {
    throw ValidationError(std::string("timestamp: expected '") + c + "'");
  }
}

}  // namespace

Timestamp parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  const int y = digits(s, 0, 4);
  expect(s, 4, '-');
  const int mo = digits(s, 5, 2);
  expect(s, 7, '-');
  const int d = digits(s, 8, 2);
  if (s.size() <= 10 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ')) {
    throw ValidationError("timestamp: expected 'T'");
  }
  const int h = digits(s, 11, 2);
  expect(s, 13, ':');
  const int mi = digits(s, 14, 2);
  expect(s, 16, ':');
  const int sec = digits(s, 17, 2);
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) throw ValidationError("timestamp: empty fraction");
  }
  if (pos >= s.size()) throw ValidationError("timestamp: missing offset");
  int offset_min = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    const int oh = digits(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    const int om = digits(s, pos + 4, 2);
    if (oh > 23 || om > 59) throw ValidationError("timestamp: bad offset");
    offset_min = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw ValidationError("timestamp: bad offset");
  }
  if (pos != s.size()) throw ValidationError("timestamp: trailing characters");

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  // Leap seconds (sec == 60) are rejected; the stream clock never emits them.
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) {
    throw ValidationError("timestamp: field out of range");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_min};
}

std::string format_rfc3339(Timestamp ts) {
  using namespace std::chrono;
  const auto day_start = floor<days>(ts);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{ts - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

int day_of_week(Timestamp ts) {
  using namespace std::chrono;
  const weekday wd{floor<days>(ts)};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

int hour_of_day(Timestamp ts) {
  using namespace std::chrono;
  const auto since_midnight = ts - floor<days>(ts);
  return static_cast<int>(duration_cast<hours>(since_midnight).count());
}

}  // namespace estate
