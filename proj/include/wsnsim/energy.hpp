#pragma once

// Per-node energy ledger. Consumption is
//   Ec = E_rx * N_rx + E_tx * N_tx + P_idle * T_idle + P_sleep * T_sleep
// and the residual is E0 - Ec. A distance-normalised variant is accumulated
// alongside for reporting only.

#include "errors.hpp"

#include <cmath>
#include <cstdint>
#include <optional>

namespace wsnsim {

enum class RadioState : std::uint8_t { Tx, Rx, Idle, Sleep };
enum class Direction : std::uint8_t { Tx, Rx };

struct EnergyParams {
  double e0_j = 100.0;
  double e_txn_j = 0.3e-3;   // per 256-byte packet
  double e_rxn_j = 0.2e-3;   // per 256-byte packet
  double p_idle_w = 1e-3;
  double p_sleep_w = 1e-6;
  double sleep_after_s = 0.5;

  void validate() const {
    if (!(e0_j > 0 && e_txn_j >= 0 && e_rxn_j >= 0 && p_idle_w >= 0 && p_sleep_w >= 0 &&
          sleep_after_s >= 0)) {
      throw ConfigError("energy parameters must be non-negative and e0 positive");
    }
  }
};

struct EnergyLedger {
  double e0 = 100.0;
  double e_rxn = 0.2e-3;
  double e_txn = 0.3e-3;
  double p_i = 1e-3;
  double p_s = 1e-6;

  double n_rx = 0.0;  // packet equivalents received
  double n_tx = 0.0;  // packet equivalents transmitted
  double t_i = 0.0;   // seconds awake
  double t_s = 0.0;   // seconds asleep
  double tx_dist_sum = 0.0;

  RadioState state = RadioState::Idle;
  bool dead = false;
  std::uint64_t dead_activity = 0;

  static EnergyLedger from(const EnergyParams& p) {
    EnergyLedger l;
    l.e0 = p.e0_j;
    l.e_rxn = p.e_rxn_j;
    l.e_txn = p.e_txn_j;
    l.p_i = p.p_idle_w;
    l.p_s = p.p_sleep_w;
    return l;
  }
};

inline double consumed(const EnergyLedger& l) noexcept {
  return (l.e_rxn * l.n_rx) + (l.e_txn * l.n_tx) + (l.p_i * l.t_i) + (l.p_s * l.t_s);
}

inline double remaining(const EnergyLedger& l) noexcept { return l.e0 - consumed(l); }

namespace detail {

// Nudges the last accrued quantity down until consumption no longer exceeds
// e0, so a dead node satisfies consumed <= e0 despite rounding.
inline void clamp_to_budget(EnergyLedger& l, double& field) {
  for (int i = 0; i < 8 && consumed(l) > l.e0; ++i) {
    field = std::nextafter(field, 0.0);
  }
}

}  // namespace detail

// Charges one frame of `packets` packet-equivalents (size / 256 bytes).
// Returns false when the node is dead or cannot afford the frame; in the
// latter case the node dies without the charge being applied.
inline bool charge_packet(EnergyLedger& l, Direction dir, std::optional<double> distance_m,
                          double packets = 1.0) {
  if (l.dead) {
    ++l.dead_activity;
    return false;
  }
  if (dir == Direction::Tx && !(distance_m && *distance_m > 0.0)) {
    throw DomainError("charge_packet: transmissions need a positive distance");
  }
  const double cost = packets * (dir == Direction::Tx ? l.e_txn : l.e_rxn);
  if (cost > remaining(l)) {
    l.dead = true;
    return false;
  }
  if (dir == Direction::Tx) {
    l.n_tx += packets;
    l.tx_dist_sum += packets * l.e_txn / *distance_m;
  } else {
    l.n_rx += packets;
  }
  if (remaining(l) <= 0.0) l.dead = true;
  return true;
}

// Adds dt seconds of idle or sleep time. If the budget runs out part way,
// only the affordable time is booked and the node dies. Returns the time
// actually booked.
inline double accrue_state(EnergyLedger& l, RadioState state, double dt) {
  if (!(dt >= 0.0)) throw DomainError("accrue_state: dt must be non-negative");
  if (state != RadioState::Idle && state != RadioState::Sleep) {
    throw DomainError("accrue_state: only idle or sleep time accrues");
  }
  if (l.dead || dt == 0.0) return 0.0;
  const bool idle = state == RadioState::Idle;
  const double power = idle ? l.p_i : l.p_s;
  double& field = idle ? l.t_i : l.t_s;
  const double left = remaining(l);
  if (power > 0.0 && power * dt >= left) {
    const double booked = left / power;
    field += booked;
    l.dead = true;
    detail::clamp_to_budget(l, field);
    return booked;
  }
  field += dt;
  return dt;
}

// Distance-normalised consumption: sum(Tx/D) + Rx + Idle + Sleep. Reported,
// never used for decisions.
inline double remaining_distance_normalized(const EnergyLedger& l) noexcept {
  return l.tx_dist_sum + l.e_rxn * l.n_rx + l.p_i * l.t_i + l.p_s * l.t_s;
}

}  // namespace wsnsim
