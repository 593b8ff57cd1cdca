#pragma once

// Cluster-head election by energy-weighted waiting timers, competition radii,
// grid partitioning of the region and relay selection between cluster heads.

#include "errors.hpp"
#include "geometry.hpp"
#include "sim_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace wsnsim {

struct ElectionParams {
  double t1 = 20.0;   // round period, s
  double t2 = 2.0;    // waiting window, s
  double vr_lo = 0.9;
  double vr_hi = 1.0;
  double alpha = 0.3;
  double r_max = 50.0;  // m
  double d_max = 0.0;   // m, max node-to-sink distance
  double d_min = 0.0;   // m, min node-to-sink distance
  std::optional<double> pin_vr;
  double slot_s = 0.02;  // TDMA slot length

  void validate() const {
    if (!(t1 > 0 && t2 > 0 && t2 < t1)) throw ConfigError("election needs 0 < t2 < t1");
    if (!(vr_lo >= 0 && vr_lo <= vr_hi)) throw ConfigError("election needs 0 <= vr_lo <= vr_hi");
    if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(r_max > 0)) throw ConfigError("r_max must be positive");
    if (!(d_min >= 0 && d_min <= d_max)) throw ConfigError("election needs 0 <= d_min <= d_max");
    if (pin_vr && !(*pin_vr >= 0)) throw ConfigError("pinned V_r must be non-negative");
    if (!(slot_s > 0)) throw ConfigError("slot length must be positive");
  }

  double draw_vr(RngStream& rng) const { return pin_vr ? *pin_vr : rng.uniform(vr_lo, vr_hi); }
};

// [1 - e_i / e_max] * t2 * v_r. The fullest battery fires first.
inline double waiting_time(double e_i, double e_max, double t2, double v_r) {
  if (!(e_max > 0.0)) throw ConfigError("waiting_time: e_max must be positive");
  if (e_i > e_max) throw ConfigError("waiting_time: residual energy exceeds e_max");
  if (!(e_i >= 0.0 && t2 >= 0.0 && v_r >= 0.0)) {
    throw ConfigError("waiting_time: negative argument");
  }
  return (1.0 - e_i / e_max) * t2 * v_r;
}

// [1 - alpha * (d_max - d_i) / (d_max - d_min)] * r_max, evaluated as written.
// With no distance spread the bracket is taken as 1.
inline double overlying_radius(double d_i, double d_max, double d_min, double alpha,
                               double r_max) {
  if (d_max == d_min) return r_max;
  if (!(d_min < d_max && d_i >= d_min && d_i <= d_max)) {
    throw DomainError("overlying_radius: distance outside [d_min, d_max]");
  }
  return (1.0 - alpha * (d_max - d_i) / (d_max - d_min)) * r_max;
}

struct CellIndex {
  int col = 0;
  int row = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct GridCell {
  CellIndex index;
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  Position midpoint;
};

// Square cells of side r_tx / sqrt(2): any two points of one cell are within
// r_tx of each other. Cells are half-open [min, max) except the last row and
// column, which also own the region's far edge.
class Grid {
 public:
  Grid(const Region& region, double r_tx) : region_(region) {
    if (!(r_tx > 0.0)) throw DomainError("grid_partition: r_tx must be positive");
    side_ = r_tx / std::sqrt(2.0);
    n_ = static_cast<int>(std::ceil(region.side / side_));
    cells_.reserve(static_cast<std::size_t>(n_) * n_);
    for (int row = 0; row < n_; ++row) {
      for (int col = 0; col < n_; ++col) {
        GridCell c;
        c.index = {col, row};
        c.min_x = col * side_;
        c.max_x = std::min((col + 1) * side_, region.side);
        c.min_y = row * side_;
        c.max_y = std::min((row + 1) * side_, region.side);
        c.midpoint = {(c.min_x + c.max_x) / 2.0, (c.min_y + c.max_y) / 2.0};
        cells_.push_back(c);
      }
    }
  }

  double cell_side() const noexcept { return side_; }
  int per_axis() const noexcept { return n_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const std::vector<GridCell>& cells() const noexcept { return cells_; }
  const GridCell& cell(std::size_t flat) const { return cells_.at(flat); }

  CellIndex cell_of(const Position& p) const {
    if (!region_.contains(p)) throw DomainError("grid: position outside the region");
    return {axis_index(p.x), axis_index(p.y)};
  }

  std::size_t flat(const CellIndex& c) const noexcept {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(c.col);
  }

  std::size_t flat_of(const Position& p) const { return flat(cell_of(p)); }

 private:
  int axis_index(double v) const noexcept {
    int i = static_cast<int>(std::floor(v / side_));
    // Guard against v / side_ rounding across a boundary.
    while (i > 0 && v < i * side_) --i;
    while (i + 1 < n_ && v >= (i + 1) * side_) ++i;
    return std::clamp(i, 0, n_ - 1);
  }

  Region region_;
  double side_ = 0.0;
  int n_ = 0;
  std::vector<GridCell> cells_;
};

inline Grid grid_partition(const Region& region, double r_tx) { return Grid(region, r_tx); }

struct CellAssignment {
  std::size_t cell = 0;
  double midpoint_distance = 0.0;
};

inline std::vector<CellAssignment> assign_cells(const Grid& grid,
                                                std::span<const Position> nodes) {
  std::vector<CellAssignment> out;
  out.reserve(nodes.size());
  for (const auto& p : nodes) {
    const std::size_t c = grid.flat_of(p);
    out.push_back({c, distance(p, grid.cell(c).midpoint)});
  }
  return out;
}

// Sum of Euclidean distances from a cluster head to its neighbours.
inline double ch_neighbor_distance(const Position& ch, std::span<const Position> neighbors) {
  if (neighbors.empty()) throw DomainError("ch_neighbor_distance: no neighbours");
  double sum = 0.0;
  for (const auto& n : neighbors) sum += distance(ch, n);
  return sum;
}

// The same sum with '+' inside the squares, as typeset. Audit only.
inline double ch_neighbor_distance_literal(const Position& ch,
                                           std::span<const Position> neighbors) {
  if (neighbors.empty()) throw DomainError("ch_neighbor_distance: no neighbours");
  double sum = 0.0;
  for (const auto& n : neighbors) sum += std::hypot(ch.x + n.x, ch.y + n.y);
  return sum;
}

struct RelayCandidate {
  NodeId id = kNoNode;
  Position pos;
};

// Candidate minimising the summed distance to `evaluator_neighbors`; ties go
// to the lowest id.
inline NodeId select_relay_ch(std::span<const RelayCandidate> candidates,
                              std::span<const Position> evaluator_neighbors) {
  if (candidates.empty()) throw DomainError("select_relay_ch: no candidates");
  NodeId best = kNoNode;
  double best_sum = 0.0;
  for (const auto& c : candidates) {
    const double s = ch_neighbor_distance(c.pos, evaluator_neighbors);
    if (best == kNoNode || s < best_sum || (s == best_sum && c.id < best)) {
      best = c.id;
      best_sum = s;
    }
  }
  return best;
}

// Next hop from a cluster head toward the sink: the sink itself when in
// range, otherwise the heard head strictly closer to the sink that lies
// closest to the straight line between this head and the sink.
inline NodeId choose_relay(NodeId sink_id, const Position& self, const Position& sink,
                           std::span<const RelayCandidate> heads_heard, double range) {
  const double own = distance(self, sink);
  if (own <= range) return sink_id;
  std::vector<RelayCandidate> closer;
  for (const auto& h : heads_heard) {
    if (distance(h.pos, sink) < own && distance(h.pos, self) <= range) closer.push_back(h);
  }
  if (closer.empty()) return kNoNode;
  const Position eval[] = {self, sink};
  return select_relay_ch(closer, eval);
}

// Advertisement as seen by a receiver.
struct AdvView {
  NodeId head = kNoNode;
  Position pos;
  double radius = 0.0;
};

// A pending candidate stands down when it lies inside the advertiser's
// competition radius. Passing a grid additionally requires a shared cell.
inline bool adv_suppresses(const AdvView& adv, const Position& receiver, const Grid* grid) {
  if (distance(adv.pos, receiver) > adv.radius) return false;
  if (grid && grid->flat_of(adv.pos) != grid->flat_of(receiver)) return false;
  return true;
}

struct HeardHead {
  NodeId id = kNoNode;
  Position pos;
  double dist = 0.0;
};

// Members affiliate with the nearest advertiser heard (ties: lowest id).
inline NodeId choose_cluster_head(std::span<const HeardHead> heard) {
  NodeId best = kNoNode;
  double best_d = 0.0;
  for (const auto& h : heard) {
    if (best == kNoNode || h.dist < best_d || (h.dist == best_d && h.id < best)) {
      best = h.id;
      best_d = h.dist;
    }
  }
  return best;
}

struct Slot {
  NodeId node = kNoNode;
  SimTime start = 0.0;
  double length = 0.0;
};

// Slots in join order, back to back from frame_start.
inline std::vector<Slot> build_schedule(std::span<const NodeId> join_order, SimTime frame_start,
                                        double slot_len) {
  std::vector<Slot> out;
  out.reserve(join_order.size());
  for (std::size_t i = 0; i < join_order.size(); ++i) {
    out.push_back({join_order[i], frame_start + static_cast<double>(i) * slot_len, slot_len});
  }
  return out;
}

// Start of the first occurrence of slot `index` at or after `t` in a
// repeating frame of `n_slots` slots.
inline SimTime next_slot_start(SimTime frame_start, double slot_len, std::size_t n_slots,
                               std::size_t index, SimTime t) {
  const double frame_len = slot_len * static_cast<double>(n_slots);
  const SimTime first = frame_start + slot_len * static_cast<double>(index);
  if (t <= first) return first;
  const double k = std::ceil((t - first) / frame_len);
  SimTime s = first + k * frame_len;
  if (s < t) s += frame_len;
  return s;
}

struct ClusterPlan {
  std::map<std::size_t, std::vector<NodeId>> ch_of_cell;
  std::map<NodeId, NodeId> members;  // member -> head
  std::map<NodeId, std::vector<Slot>> schedule;
  std::map<NodeId, NodeId> relay_next;
  std::vector<NodeId> unclustered;
};

struct ElectionNode {
  NodeId id = kNoNode;
  Position pos;
  double residual = 0.0;
};

struct ElectionOutcome {
  std::vector<NodeId> heads;       // in order of self-election
  std::vector<NodeId> head_of;     // per input index; own id for heads
  std::vector<double> vr;          // drawn per input index
  std::vector<double> wait;        // per input index
};

// One election round over a lossless, zero-delay broadcast channel with
// reception range `range`. Used as the reference behaviour of the protocol.
inline ElectionOutcome run_election(std::span<const ElectionNode> nodes,
                                    const ElectionParams& params, double e_max,
                                    const Position& sink, double range, RngStream& rng,
                                    const Grid* grid = nullptr) {
  ElectionOutcome out;
  const std::size_t n = nodes.size();
  out.head_of.assign(n, kNoNode);
  out.vr.resize(n);
  out.wait.resize(n);
  std::vector<bool> decided(n, false);
  std::vector<std::vector<HeardHead>> heard(n);

  Scheduler<std::size_t> sched;
  for (std::size_t i = 0; i < n; ++i) {
    out.vr[i] = params.draw_vr(rng);
    out.wait[i] = waiting_time(nodes[i].residual, e_max, params.t2, out.vr[i]);
    sched.schedule(out.wait[i], i);
  }
  sched.run_until(params.t2 * std::max(params.vr_hi, params.pin_vr.value_or(0.0)) + 1.0,
                  [&](const Event<std::size_t>& ev) {
                    const std::size_t i = ev.payload;
                    if (decided[i]) return;
                    decided[i] = true;
                    out.heads.push_back(nodes[i].id);
                    out.head_of[i] = nodes[i].id;
                    const double d_i = std::clamp(distance(nodes[i].pos, sink), params.d_min,
                                                  params.d_max);
                    const AdvView adv{nodes[i].id, nodes[i].pos,
                                      overlying_radius(d_i, params.d_max, params.d_min,
                                                       params.alpha, params.r_max)};
                    for (std::size_t j = 0; j < n; ++j) {
                      if (j == i) continue;
                      const double d = distance(nodes[i].pos, nodes[j].pos);
                      if (d > range) continue;
                      heard[j].push_back({nodes[i].id, nodes[i].pos, d});
                      if (!decided[j] && adv_suppresses(adv, nodes[j].pos, grid)) {
                        decided[j] = true;
                      }
                    }
                  });
  for (std::size_t i = 0; i < n; ++i) {
    if (out.head_of[i] == kNoNode) out.head_of[i] = choose_cluster_head(heard[i]);
  }
  return out;
}

}  // namespace wsnsim
