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

#ifndef ESTATE_EVENT_STORE_HPP
#define ESTATE_EVENT_STORE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "estate/core_types.hpp"

namespace estate {

// Store directory layout:
//   events.log  sequence of frames
//                 u32 little-endian payload length
//                 payload (canonical event JSON, see serialize_event)
//                 u32 little-endian CRC-32 (zlib polynomial) of the payload
//   LOCK        held with an exclusive flock by the single writer
std::string frame_record(std::string_view payload);

struct LogScan {
  std::vector<ClassifiedEvent> events;
  std::uint64_t valid_bytes = 0;  // length of the intact prefix
  bool torn = false;              // bytes after the intact prefix were discarded
};

// Parses a log image. A damaged frame at the tail is treated as a torn
// write; a damaged frame followed by an intact frame is corruption and throws
// CorruptionError naming the sequence number.
LogScan scan_log(std::string_view bytes);

struct EventFilter {
  std::optional<Topic> topic;
  std::optional<Timestamp> from;  // inclusive, on post.created_at
  std::optional<Timestamp> to;    // inclusive
  std::optional<std::string> neighbourhood;
  bool estate_only = false;
  std::optional<std::int64_t> after_seq;  // pagination cursor
  std::size_t limit = std::numeric_limits<std::size_t>::max();
};

// Predicate part of the filter (cursor and limit excluded).
bool matches(const ClassifiedEvent& event, const EventFilter& filter);

struct StoreOptions {
  bool sync = true;        // fdatasync after every append
  bool read_only = false;  // no lock, no truncation, append throws
};

struct RecoveryReport {
  std::size_t records = 0;
  bool truncated = false;
  std::uint64_t truncated_bytes = 0;
};

struct AppendResult {
  std::int64_t seq = -1;
  bool inserted = false;  // false when the post was already stored
};

// Append-only event log with in-memory indexes rebuilt on open. One writer
// per directory; readers within the process see a consistent prefix.
class EventStore {
 public:
  // Recovers the store in dir, creating it if needed. A torn trailing frame
  // is truncated and reported. Throws IoError if the directory is locked by
  // another writer or unreadable, CorruptionError for mid-log damage.
  static EventStore open(const std::filesystem::path& dir, StoreOptions options = {});

  EventStore(EventStore&&) noexcept;
  EventStore& operator=(EventStore&&) noexcept;
  ~EventStore();

  // Idempotent by post_id. Assigns the next pipeline_seq and returns once the
  // frame is written (and synced when options.sync). Throws ValidationError
  // for an event violating the routing invariants and DurableWriteError if
  // the write fails.
  AppendResult append(ClassifiedEvent event);

  // Ordered by pipeline_seq. Throws ValidationError when from > to.
  std::vector<ClassifiedEvent> query(const EventFilter& filter) const;
  std::optional<ClassifiedEvent> find(const std::string& post_id) const;

  std::size_t size() const;
  std::int64_t high_water() const;  // -1 when empty
  const RecoveryReport& recovery() const { return recovery_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct State;

  EventStore() = default;
  void index(const ClassifiedEvent& e);

  std::filesystem::path dir_;
  StoreOptions options_;
  RecoveryReport recovery_;
  std::unique_ptr<State> state_;
};

}  // namespace estate

#endif  // ESTATE_EVENT_STORE_HPP
