#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace wsnsim {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr NodeId kBroadcast = kNoNode - 1;

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(const Position& a, const Position& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Axis-aligned square deployment area [0, side]^2.
struct Region {
  double side = 250.0;

  bool contains(const Position& p) const noexcept {
    return p.x >= 0.0 && p.x <= side && p.y >= 0.0 && p.y <= side;
  }

  Position clamp(const Position& p) const noexcept {
    return {std::fmin(std::fmax(p.x, 0.0), side), std::fmin(std::fmax(p.y, 0.0), side)};
  }

  Position center() const noexcept { return {side / 2.0, side / 2.0}; }
};

}  // namespace wsnsim
