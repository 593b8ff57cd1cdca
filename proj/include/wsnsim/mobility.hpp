#pragma once

// Random-waypoint motion, the mobility-error predictor (time-weighted mean
// position) and the adaptive beaconing trigger built on it.

#include "errors.hpp"
#include "geometry.hpp"
#include "sim_core.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace wsnsim {

struct MobilityParams {
  double v_min = 0.0;  // m/s
  double v_max = 5.0;  // m/s

  void validate() const {
    if (!(v_min >= 0.0 && v_min <= v_max && v_max <= 5.0)) {
      throw ConfigError("mobility speeds must satisfy 0 <= v_min <= v_max <= 5");
    }
  }
};

struct WaypointState {
  Position destination;
  double speed = 0.0;      // m/s
  SimTime pause_until = 0.0;
};

inline WaypointState draw_waypoint(const Region& region, const MobilityParams& params,
                                   RngStream& rng) {
  WaypointState wp;
  wp.destination.x = rng.uniform(0.0, region.side);
  wp.destination.y = rng.uniform(0.0, region.side);
  wp.speed = rng.uniform(params.v_min, params.v_max);
  return wp;
}

// Moves `pos` toward the waypoint for dt seconds. On arrival the node stops
// at the destination for the rest of the step and a fresh waypoint is drawn
// (zero pause).
inline Position step_waypoint(Position& pos, WaypointState& wp, double dt, const Region& region,
                              const MobilityParams& params, RngStream& rng) {
  if (!(dt > 0.0)) throw DomainError("step_waypoint: dt must be positive");
  if (wp.speed <= 0.0) return pos;

  const double dx = wp.destination.x - pos.x;
  const double dy = wp.destination.y - pos.y;
  const double remaining = std::hypot(dx, dy);
  const double travel = wp.speed * dt;
  if (travel >= remaining) {
    pos = region.clamp(wp.destination);
    wp = draw_waypoint(region, params, rng);
  } else {
    const double f = travel / remaining;
    pos = region.clamp({pos.x + dx * f, pos.y + dy * f});
  }
  return pos;
}

// One predictor sample. `t` is the weight the mean applies to the sample: the
// time the node spent at it, in units of the evaluation interval. `at` is the
// absolute time the sample was taken.
struct MepSample {
  double x = 0.0;
  double y = 0.0;
  double t = 1.0;
  SimTime at = 0.0;
};

// (sum of x_j * t_j) / k, divided by the count as the predictor is defined.
inline double mep_mean_x(std::span<const MepSample> samples) {
  if (samples.empty()) throw DomainError("mep_mean_x: empty history");
  double acc = 0.0;
  for (const auto& s : samples) acc += s.x * s.t;
  return acc / static_cast<double>(samples.size());
}

inline double mep_mean_y(std::span<const MepSample> samples) {
  if (samples.empty()) throw DomainError("mep_mean_y: empty history");
  double acc = 0.0;
  for (const auto& s : samples) acc += s.y * s.t;
  return acc / static_cast<double>(samples.size());
}

// Euclidean displacement between the current position and the prediction.
inline double deviation(const Position& current, const Position& predicted) noexcept {
  return std::hypot(current.x - predicted.x, current.y - predicted.y);
}

// The deviation expression exactly as typeset in the source material:
// (x + px)^2 + (y + py)^2, no square root. Audit only; never used for control.
inline double deviation_literal(const Position& current, const Position& predicted) noexcept {
  const double sx = current.x + predicted.x;
  const double sy = current.y + predicted.y;
  return sx * sx + sy * sy;
}

class MepHistory {
 public:
  explicit MepHistory(std::size_t window = 10) : window_(window == 0 ? 1 : window) {}

  void reset(const Position& p, SimTime at) {
    samples_.clear();
    samples_.push_back({p.x, p.y, 1.0, at});
    last_beacon_pos_ = p;
  }

  void add(const Position& p, SimTime at, double weight) {
    if (!samples_.empty() && !(at > samples_.back().at)) {
      throw DomainError("MepHistory: sample timestamps must be strictly increasing");
    }
    samples_.push_back({p.x, p.y, weight, at});
    if (samples_.size() > window_) samples_.erase(samples_.begin());
  }

  std::span<const MepSample> samples() const noexcept { return samples_; }
  std::size_t k() const noexcept { return samples_.size(); }
  std::size_t window() const noexcept { return window_; }
  const Position& last_beacon_pos() const noexcept { return last_beacon_pos_; }

  Position predicted() const { return {mep_mean_x(samples_), mep_mean_y(samples_)}; }

 private:
  std::size_t window_;
  std::vector<MepSample> samples_;
  Position last_beacon_pos_;
};

struct MepParams {
  double threshold_m = 5.0;
  double check_interval_s = 1.0;
  std::size_t window = 10;
};

// Adaptive beaconing: a node re-announces its position only when it has
// drifted more than the threshold from where its own history predicts it.
class BeaconTrigger {
 public:
  explicit BeaconTrigger(MepParams params = {}) : params_(params), history_(params.window) {}

  // Deployment beacon; seeds the history.
  void start(const Position& p, SimTime at) { history_.reset(p, at); }

  // Evaluates the predictor at `at`. Returns true when a beacon is due, in
  // which case the history restarts from `current`.
  bool should_beacon(const Position& current, SimTime at) {
    last_deviation_ = deviation(current, history_.predicted());
    if (last_deviation_ > params_.threshold_m) {
      history_.reset(current, at);
      return true;
    }
    const SimTime prev = history_.samples().back().at;
    history_.add(current, at, (at - prev) / params_.check_interval_s);
    return false;
  }

  double last_deviation() const noexcept { return last_deviation_; }
  const MepHistory& history() const noexcept { return history_; }
  const MepParams& params() const noexcept { return params_; }

 private:
  MepParams params_;
  MepHistory history_;
  double last_deviation_ = 0.0;
};

}  // namespace wsnsim
