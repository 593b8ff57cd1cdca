#pragma once

// Free-space / two-ray-ground propagation with thresholds calibrated from
// the configured reception and carrier-sense ranges.

#include "errors.hpp"
#include "geometry.hpp"

#include <cmath>
#include <numbers>
#include <span>

namespace wsnsim {

struct RadioParams {
  double pt = 31.32e-3;      // W
  double gt = 1.0;
  double gr = 1.0;
  double ht = 0.5;           // m
  double hr = 0.5;           // m
  double sys_loss = 1.0;     // L >= 1
  double wavelength = 0.125; // m (2.4 GHz)
  double rx_thresh = 0.0;    // W
  double cs_thresh = 0.0;    // W
};

inline double crossover_distance(const RadioParams& p) noexcept {
  return 4.0 * std::numbers::pi * p.ht * p.hr / p.wavelength;
}

inline double friis_power(const RadioParams& p, double d) noexcept {
  const double denom = 4.0 * std::numbers::pi * d;
  return p.pt * p.gt * p.gr * p.wavelength * p.wavelength / (denom * denom * p.sys_loss);
}

inline double two_ray_power(const RadioParams& p, double d) noexcept {
  const double d2 = d * d;
  return p.pt * p.gt * p.gr * p.ht * p.ht * p.hr * p.hr / (d2 * d2 * p.sys_loss);
}

inline double received_power(const RadioParams& p, double d) {
  if (!(d > 0.0)) throw DomainError("received_power: distance must be positive");
  return d < crossover_distance(p) ? friis_power(p, d) : two_ray_power(p, d);
}

// Closed-form inverse of received_power: the distance at which the power
// falls to `threshold`.
inline double range_for_threshold(const RadioParams& p, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("range_for_threshold: threshold must be positive");
  const double d_tr = std::pow(
      p.pt * p.gt * p.gr * p.ht * p.ht * p.hr * p.hr / (p.sys_loss * threshold), 0.25);
  if (d_tr >= crossover_distance(p)) return d_tr;
  return p.wavelength / (4.0 * std::numbers::pi) *
         std::sqrt(p.pt * p.gt * p.gr / (p.sys_loss * threshold));
}

inline bool can_receive(const RadioParams& p, double d) {
  return received_power(p, d) >= p.rx_thresh;
}

struct RadioConfig {
  double pt_mw = 31.32;
  double ht_m = 0.5;
  double hr_m = 0.5;
  double wavelength_m = 0.125;
  double range_m = 35.0;
  double cs_range_m = 70.0;
};

// Builds parameters and sets rx/cs thresholds so that reception ends exactly
// at range_m and carrier sense at cs_range_m.
inline RadioParams calibrate(const RadioConfig& cfg) {
  if (!(cfg.pt_mw > 0 && cfg.ht_m > 0 && cfg.hr_m > 0 && cfg.wavelength_m > 0 &&
        cfg.range_m > 0 && cfg.cs_range_m > 0)) {
    throw ConfigError("radio parameters must be positive");
  }
  if (cfg.cs_range_m < cfg.range_m) {
    throw ConfigError("carrier-sense range must not be shorter than the reception range");
  }
  RadioParams p;
  p.pt = cfg.pt_mw * 1e-3;
  p.ht = cfg.ht_m;
  p.hr = cfg.hr_m;
  p.wavelength = cfg.wavelength_m;
  p.rx_thresh = received_power(p, cfg.range_m);
  p.cs_thresh = received_power(p, cfg.cs_range_m);
  return p;
}

struct Transmitter {
  Position pos;
  RadioParams params;
};

inline bool senses_busy(const RadioParams& listener, std::span<const Transmitter> concurrent,
                        const Position& at) {
  for (const auto& tx : concurrent) {
    const double d = distance(tx.pos, at);
    if (d <= 0.0 || received_power(tx.params, d) >= listener.cs_thresh) return true;
  }
  return false;
}

}  // namespace wsnsim
