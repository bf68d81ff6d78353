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

#include "estate/event_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "estate/error.hpp"
#include "estate/json_codec.hpp"

namespace estate {
namespace {

constexpr std::uint32_t kMaxPayload = 64u << 20;

std::uint32_t crc32_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  return v;
}

// Payload of an intact frame at pos, or nullopt.
std::optional<std::string_view> frame_at(std::string_view bytes, std::size_t pos) {
  if (bytes.size() - pos < 8) return std::nullopt;
  const std::uint32_t len = get_u32(bytes, pos);
  if (len > kMaxPayload || bytes.size() - pos - 8 < len) return std::nullopt;
  const auto payload = bytes.substr(pos + 4, len);
  if (crc32_of(payload) != get_u32(bytes, pos + 4 + len)) return std::nullopt;
  return payload;
}

std::string errno_text() { return std::strerror(errno); }

// Best effort: drop a partially written frame so the log ends on a boundary.
void rollback(int fd, off_t size) {
  if (size >= 0 && ::ftruncate(fd, size) != 0) {
    // recover() treats whatever remains as a torn tail
  }
}

}  // namespace

std::string frame_record(std::string_view payload) {
  if (payload.size() > kMaxPayload) throw ValidationError("event record too large");
  std::string out;
  out.reserve(payload.size() + 8);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.append(payload);
  put_u32(out, crc32_of(payload));
  return out;
}

LogScan scan_log(std::string_view bytes) {
  LogScan scan;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto payload = frame_at(bytes, pos);
    const auto seq = static_cast<std::int64_t>(scan.events.size());
    if (!payload) {
      // A damaged frame whose declared extent is followed by an intact frame
      // cannot be a torn tail.
      if (bytes.size() - pos >= 4) {
        const std::uint64_t next = pos + 8ull + get_u32(bytes, pos);
        if (next < bytes.size() && frame_at(bytes, static_cast<std::size_t>(next))) {
          throw CorruptionError(seq, "event log corrupt at sequence " + std::to_string(seq));
        }
      }
      scan.torn = true;
      break;
    }
    ClassifiedEvent e;
    try {
      e = parse_event(*payload);
    } catch (const SchemaError& ex) {
      throw CorruptionError(seq, "event log record " + std::to_string(seq) + " unreadable: " + ex.what());
    }
    if (e.pipeline_seq != seq) {
      throw CorruptionError(seq, "event log sequence gap at " + std::to_string(seq));
    }
    scan.events.push_back(std::move(e));
    pos += payload->size() + 8;
  }
  scan.valid_bytes = pos;
  return scan;
}

bool matches(const ClassifiedEvent& e, const EventFilter& f) {
  if (f.topic && e.topic_label != f.topic) return false;
  if (f.from && e.post.created_at < *f.from) return false;
  if (f.to && e.post.created_at > *f.to) return false;
  if (f.neighbourhood && (!e.location || e.location->neighbourhood_id != *f.neighbourhood)) return false;
  if (f.estate_only && !e.estate_label.related()) return false;
  return true;
}

struct EventStore::State {
  mutable std::shared_mutex mu;
  std::vector<ClassifiedEvent> events;  // position == pipeline_seq
  std::unordered_map<std::string, std::int64_t> by_post;
  std::array<std::vector<std::int64_t>, kNumTopics> by_topic;
  std::multimap<Timestamp, std::int64_t> by_time;
  int log_fd = -1;
  int lock_fd = -1;

  ~State() {
    if (log_fd >= 0) ::close(log_fd);
    if (lock_fd >= 0) {
      ::flock(lock_fd, LOCK_UN);
      ::close(lock_fd);
    }
  }
};

EventStore::EventStore(EventStore&&) noexcept = default;
EventStore& EventStore::operator=(EventStore&&) noexcept = default;
EventStore::~EventStore() = default;

void EventStore::index(const ClassifiedEvent& e) {
  state_->by_post.emplace(e.post.post_id, e.pipeline_seq);
  if (e.topic_label) state_->by_topic[static_cast<std::size_t>(topic_index(*e.topic_label))].push_back(e.pipeline_seq);
  state_->by_time.emplace(e.post.created_at, e.pipeline_seq);
}

EventStore EventStore::open(const std::filesystem::path& dir, StoreOptions options) {
  EventStore store;
  store.dir_ = dir;
  store.options_ = options;
  store.state_ = std::make_unique<State>();
  State& st = *store.state_;

  std::error_code ec;
  if (!options.read_only) {
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create store directory " + dir.string() + ": " + ec.message());
    const auto lock_path = dir / "LOCK";
    st.lock_fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (st.lock_fd < 0) throw IoError("cannot open " + lock_path.string() + ": " + errno_text());
    if (::flock(st.lock_fd, LOCK_EX | LOCK_NB) != 0) {
      throw IoError("event store " + dir.string() + " is locked by another writer");
    }
  } else if (!std::filesystem::is_directory(dir)) {
    throw IoError("store directory not found: " + dir.string());
  }

  const auto log_path = dir / "events.log";
  std::string bytes;
  if (std::filesystem::exists(log_path)) {
    std::ifstream in(log_path, std::ios::binary);
    if (!in) throw IoError("cannot read " + log_path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes = ss.str();
  }
  LogScan scan = scan_log(bytes);
  store.recovery_.records = scan.events.size();
  if (scan.torn) {
    store.recovery_.truncated = true;
    store.recovery_.truncated_bytes = bytes.size() - scan.valid_bytes;
  }

  if (!options.read_only) {
    st.log_fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (st.log_fd < 0) throw IoError("cannot open " + log_path.string() + ": " + errno_text());
    if (scan.torn) {
      if (::ftruncate(st.log_fd, static_cast<off_t>(scan.valid_bytes)) != 0 || ::fsync(st.log_fd) != 0) {
        throw IoError("cannot truncate torn record in " + log_path.string() + ": " + errno_text());
      }
    }
  }

  st.events = std::move(scan.events);
  for (const auto& e : st.events) {
    if (st.by_post.contains(e.post.post_id)) {
      throw CorruptionError(e.pipeline_seq, "duplicate post_id in event log at sequence " +
                                                std::to_string(e.pipeline_seq));
    }
    store.index(e);
  }
  return store;
}

AppendResult EventStore::append(ClassifiedEvent event) {
  if (options_.read_only) throw ValidationError("store opened read-only");
  if (const auto problems = check_event(event); !problems.empty()) {
    throw ValidationError("invalid event for post " + event.post.post_id + ": " + problems.front());
  }
  State& st = *state_;
  std::unique_lock lock(st.mu);
  if (const auto it = st.by_post.find(event.post.post_id); it != st.by_post.end()) {
    return {it->second, false};
  }
  const auto seq = static_cast<std::int64_t>(st.events.size());
  event.pipeline_seq = seq;
  const std::string frame = frame_record(serialize_event(event));

  const off_t before = ::lseek(st.log_fd, 0, SEEK_END);
  std::size_t written = 0;
  while (written < frame.size()) {
    const ssize_t n = ::write(st.log_fd, frame.data() + written, frame.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string why = errno_text();
      rollback(st.log_fd, before);
      throw DurableWriteError(seq - 1, "event log write failed: " + why);
    }
    written += static_cast<std::size_t>(n);
  }
  if (options_.sync && ::fdatasync(st.log_fd) != 0) {
    const std::string why = errno_text();
    rollback(st.log_fd, before);
    throw DurableWriteError(seq - 1, "event log sync failed: " + why);
  }
  st.events.push_back(std::move(event));
  index(st.events.back());
  return {seq, true};
}

std::vector<ClassifiedEvent> EventStore::query(const EventFilter& f) const {
  if (f.from && f.to && *f.from > *f.to) throw ValidationError("time range inverted: from > to");
  const State& st = *state_;
  std::shared_lock lock(st.mu);

  std::vector<std::int64_t> candidates;
  if (f.topic) {
    candidates = st.by_topic[static_cast<std::size_t>(topic_index(*f.topic))];
  } else if (f.from || f.to) {
    auto lo = f.from ? st.by_time.lower_bound(*f.from) : st.by_time.begin();
    auto hi = f.to ? st.by_time.upper_bound(*f.to) : st.by_time.end();
    for (auto it = lo; it != hi; ++it) candidates.push_back(it->second);
    std::sort(candidates.begin(), candidates.end());
  } else {
    candidates.resize(st.events.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = static_cast<std::int64_t>(i);
  }

  std::vector<ClassifiedEvent> out;
  for (const auto seq : candidates) {
    if (out.size() >= f.limit) break;
    if (f.after_seq && seq <= *f.after_seq) continue;
    const auto& e = st.events[static_cast<std::size_t>(seq)];
    if (matches(e, f)) out.push_back(e);
  }
  return out;
}

std::optional<ClassifiedEvent> EventStore::find(const std::string& post_id) const {
  std::shared_lock lock(state_->mu);
  const auto it = state_->by_post.find(post_id);
  if (it == state_->by_post.end()) return std::nullopt;
  return state_->events[static_cast<std::size_t>(it->second)];
}

std::size_t EventStore::size() const {
  std::shared_lock lock(state_->mu);
  return state_->events.size();
}

std::int64_t EventStore::high_water() const {
  return static_cast<std::int64_t>(size()) - 1;
}

}  // namespace estate
