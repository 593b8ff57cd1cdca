#pragma once

// Deterministic discrete-event core: a virtual clock, a (time, seq) ordered
// event queue and named random streams.

#include "errors.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace wsnsim {

using SimTime = double;  // seconds of virtual time

template <typename Payload>
struct Event {
  SimTime fire_time = 0.0;
  std::uint64_t seq = 0;
  Payload payload{};
};

// Single-threaded scheduler. Events with equal fire_time dispatch in the
// order they were scheduled.
template <typename Payload>
class Scheduler {
 public:
  using EventType = Event<Payload>;

  SimTime now() const noexcept { return now_; }
  std::size_t pending() const noexcept { return queue_.size(); }
  std::uint64_t dispatched() const noexcept { return dispatched_; }

  std::uint64_t schedule(SimTime at, Payload payload) {
    if (!(at >= now_)) {
      throw ConfigError("event scheduled in the past (t=" + std::to_string(at) +
                        ", clock=" + std::to_string(now_) + ")");
    }
    const std::uint64_t seq = next_seq_++;
    queue_.push(EventType{at, seq, std::move(payload)});
    return seq;
  }

  std::uint64_t schedule_in(SimTime delay, Payload payload) {
    return schedule(now_ + delay, std::move(payload));
  }

  // Dispatches every event with fire_time <= t_end, then sets the clock to
  // t_end. Handlers may schedule further events.
  template <typename Handler>
  std::uint64_t run_until(SimTime t_end, Handler&& handler) {
    if (!(t_end >= now_)) {
      throw ConfigError("run_until target precedes the clock");
    }
    std::uint64_t count = 0;
    while (!queue_.empty() && queue_.top().fire_time <= t_end) {
      EventType ev = queue_.top();
      queue_.pop();
      now_ = ev.fire_time;
      ++count;
      ++dispatched_;
      handler(static_cast<const EventType&>(ev));
    }
    now_ = t_end;
    return count;
  }

 private:
  struct Later {
    bool operator()(const EventType& a, const EventType& b) const noexcept {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.seq > b.seq;
    }
  };

  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::priority_queue<EventType, std::vector<EventType>, Later> queue_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

// A named, independently seeded random stream. The engine (mt19937_64) is
// fully specified by the standard; the mappings to real and integer ranges
// are done here so sequences match across standard library vendors.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string stream_id)
      : seed_(seed),
        stream_id_(std::move(stream_id)),
        engine_(detail::splitmix64(seed ^ detail::fnv1a(stream_id_))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& stream_id() const noexcept { return stream_id_; }
  std::uint64_t draws() const noexcept { return draws_; }

  // Uniform in [0, 1) with 53 bits of resolution.
  double canonical() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi); lo == hi returns lo.
  double uniform(double lo, double hi) {
    if (lo > hi) throw ConfigError("uniform: lo > hi");
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * canonical();
    return v < hi ? v : lo;
  }

  // Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ConfigError("uniform_int: lo > hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo);
    if (span == std::numeric_limits<std::uint64_t>::max()) {
      ++draws_;
      return static_cast<std::int64_t>(engine_());
    }
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
      ++draws_;
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

 private:
  std::uint64_t seed_;
  std::string stream_id_;
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

inline double uniform(RngStream& stream, double lo, double hi) {
  return stream.uniform(lo, hi);
}

// One stream per subsystem so draw counts in one never shift another.
struct RngStreams {
  explicit RngStreams(std::uint64_t seed)
      : placement(seed, "placement"),
        mobility(seed, "mobility"),
        backoff(seed, "backoff"),
        election(seed, "election"),
        traffic(seed, "traffic"),
        jitter(seed, "jitter") {}

  RngStream placement;
  RngStream mobility;
  RngStream backoff;
  RngStream election;
  RngStream traffic;
  RngStream jitter;
};

}  // namespace wsnsim
