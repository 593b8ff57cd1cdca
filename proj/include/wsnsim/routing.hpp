#pragma once

// Neighbour table fed by beacons, AODV-style route table, RREQ duplicate
// cache and the energy-first route choice.

#include "errors.hpp"
#include "geometry.hpp"
#include "sim_core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace wsnsim {

struct RouteParams {
  double neighbor_ttl_s = 60.0;
  int rreq_retries = 2;
  double rreq_timeout_s = 0.5;   // first wait; doubles per retry
  double rrep_window_s = 0.05;
  std::size_t buffer_pkts = 64;
  double active_route_s = 10.0;
  double rreq_jitter_s = 0.01;

  void validate() const {
    if (!(neighbor_ttl_s > 0 && rreq_retries >= 0 && rreq_timeout_s > 0 && rrep_window_s >= 0 &&
          buffer_pkts >= 1 && active_route_s > 0 && rreq_jitter_s >= 0)) {
      throw ConfigError("routing parameters out of range");
    }
  }
};

struct NeighborEntry {
  NodeId id = kNoNode;
  Position pos;
  double residual_energy = 0.0;
  SimTime last_heard = 0.0;
};

class NeighborTable {
 public:
  explicit NeighborTable(double ttl_s = 60.0) : ttl_(ttl_s) {}

  void update(NodeId id, const Position& pos, double residual, SimTime now) {
    auto& e = entries_[id];
    e.id = id;
    e.pos = pos;
    e.residual_energy = residual;
    e.last_heard = now;
    ++refreshes_;
  }

  bool live(NodeId id, SimTime now) const {
    auto it = entries_.find(id);
    return it != entries_.end() && now - it->second.last_heard <= ttl_;
  }

  const NeighborEntry* find(NodeId id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  // Drops and returns the neighbours not heard within the ttl.
  std::vector<NodeId> expire(SimTime now) {
    std::vector<NodeId> gone;
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (now - it->second.last_heard > ttl_) {
        gone.push_back(it->first);
        it = entries_.erase(it);
      } else {
        ++it;
      }
    }
    return gone;
  }

  void remove(NodeId id) { entries_.erase(id); }
  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t refreshes() const noexcept { return refreshes_; }
  double ttl() const noexcept { return ttl_; }
  const std::map<NodeId, NeighborEntry>& entries() const noexcept { return entries_; }

 private:
  double ttl_;
  std::map<NodeId, NeighborEntry> entries_;
  std::uint64_t refreshes_ = 0;
};

struct RouteEntry {
  NodeId dest = kNoNode;
  NodeId next_hop = kNoNode;
  std::uint32_t hop_count = 1;
  double bottleneck_energy = 0.0;
  std::uint32_t dest_seq = 0;
  SimTime expires_at = 0.0;
};

// Prefer the path whose weakest node has the most energy, then the shorter
// path, then the lower next-hop id.
inline bool route_better(const RouteEntry& a, const RouteEntry& b) noexcept {
  if (a.bottleneck_energy != b.bottleneck_energy) {
    return a.bottleneck_energy > b.bottleneck_energy;
  }
  if (a.hop_count != b.hop_count) return a.hop_count < b.hop_count;
  return a.next_hop < b.next_hop;
}

inline RouteEntry select_route(std::span<const RouteEntry> candidates) {
  if (candidates.empty()) throw DomainError("select_route: no candidates");
  const RouteEntry* best = &candidates.front();
  for (const auto& c : candidates.subspan(1)) {
    if (route_better(c, *best)) best = &c;
  }
  return *best;
}

class RouteTable {
 public:
  std::optional<RouteEntry> lookup(NodeId dest, SimTime now) const {
    auto it = routes_.find(dest);
    if (it == routes_.end() || it->second.expires_at < now) return std::nullopt;
    return it->second;
  }

  // Installs `e` unless a live entry with a newer sequence number exists or
  // an equally fresh one is better by route_better.
  bool offer(const RouteEntry& e, SimTime now) {
    auto it = routes_.find(e.dest);
    if (it != routes_.end() && it->second.expires_at >= now) {
      const RouteEntry& cur = it->second;
      if (cur.dest_seq > e.dest_seq) return false;
      if (cur.dest_seq == e.dest_seq && cur.next_hop != e.next_hop && route_better(cur, e)) {
        return false;
      }
    }
    routes_[e.dest] = e;
    return true;
  }

  void install(const RouteEntry& e) { routes_[e.dest] = e; }

  void refresh(NodeId dest, SimTime until) {
    auto it = routes_.find(dest);
    if (it != routes_.end() && it->second.expires_at < until) it->second.expires_at = until;
  }

  // Removes every route through `next_hop`; returns the affected destinations.
  std::vector<NodeId> invalidate_via(NodeId next_hop) {
    std::vector<NodeId> dests;
    for (auto it = routes_.begin(); it != routes_.end();) {
      if (it->second.next_hop == next_hop) {
        dests.push_back(it->first);
        it = routes_.erase(it);
      } else {
        ++it;
      }
    }
    return dests;
  }

  void erase(NodeId dest) { routes_.erase(dest); }
  std::size_t size() const noexcept { return routes_.size(); }
  const std::map<NodeId, RouteEntry>& entries() const noexcept { return routes_; }

 private:
  std::map<NodeId, RouteEntry> routes_;
};

class RreqCache {
 public:
  // True the first time (origin, id) is seen.
  bool first_seen(NodeId origin, std::uint32_t rreq_id) {
    return seen_.insert({origin, rreq_id}).second;
  }
  bool seen(NodeId origin, std::uint32_t rreq_id) const {
    return seen_.count({origin, rreq_id}) != 0;
  }
  std::size_t size() const noexcept { return seen_.size(); }

 private:
  std::set<std::pair<NodeId, std::uint32_t>> seen_;
};

}  // namespace wsnsim
