#pragma once

// CBR traffic, per-packet bookkeeping and the run-level metric table with its
// CSV rendering.

#include "energy.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "sim_core.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wsnsim {

struct CbrConfig {
  std::uint32_t packet_bytes = 256;
  double offered_load_bps = 2048.0;  // per source
  std::vector<NodeId> sources;
  SimTime start_t = 5.0;
  SimTime stop_t = 100.0;

  double interval() const {
    if (!(offered_load_bps > 0.0) || packet_bytes == 0) {
      throw ConfigError("CBR needs a positive rate and packet size");
    }
    return static_cast<double>(packet_bytes) * 8.0 / offered_load_bps;
  }
};

struct Emission {
  SimTime at = 0.0;
  NodeId src = kNoNode;
};

// Every source emits one packet per interval in [start_t, stop_t); its first
// emission is offset uniformly within one interval.
inline std::vector<Emission> generate_cbr(const CbrConfig& cfg, RngStream& rng) {
  std::vector<Emission> out;
  if (!(cfg.stop_t > cfg.start_t)) return out;
  const double iv = cfg.interval();
  for (NodeId s : cfg.sources) {
    for (SimTime t = cfg.start_t + rng.uniform(0.0, iv); t < cfg.stop_t; t += iv) {
      out.push_back({t, s});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Emission& a, const Emission& b) {
    return a.at < b.at;
  });
  return out;
}

enum class DropReason : std::uint8_t { Queue, Csma, Retry, Buffer, Dead };

struct PacketRecord {
  std::uint64_t id = 0;
  NodeId src = kNoNode;
  SimTime generated_at = 0.0;
  std::optional<SimTime> delivered_at;
  std::optional<DropReason> dropped;
  std::uint32_t hops = 0;
  std::uint32_t size = 256;
  std::vector<NodeId> path;  // nodes that held the packet, source first

  bool resolved() const noexcept { return delivered_at.has_value() || dropped.has_value(); }
};

// Mean end-to-end delay over delivered packets; empty when none arrived.
inline std::optional<double> mean_delay(std::span<const PacketRecord> records) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (!r.delivered_at) continue;
    sum += *r.delivered_at - r.generated_at;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline double throughput_kbps(std::span<const PacketRecord> records, double horizon_s) {
  if (!(horizon_s > 0.0)) throw DomainError("throughput_kbps: horizon must be positive");
  double bits = 0.0;
  for (const auto& r : records) {
    if (r.delivered_at) bits += static_cast<double>(r.size) * 8.0;
  }
  return bits / horizon_s / 1000.0;
}

struct EnergyReport {
  double total_j = 0.0;
  double mean_j = 0.0;
  std::vector<double> per_node_j;
};

inline EnergyReport energy_report(std::span<const EnergyLedger> ledgers) {
  EnergyReport rep;
  rep.per_node_j.reserve(ledgers.size());
  for (const auto& l : ledgers) {
    const double c = consumed(l);
    rep.per_node_j.push_back(c);
    rep.total_j += c;
  }
  if (!ledgers.empty()) rep.mean_j = rep.total_j / static_cast<double>(ledgers.size());
  return rep;
}

struct DropCounts {
  std::uint64_t queue = 0;
  std::uint64_t csma = 0;
  std::uint64_t retry = 0;
  std::uint64_t buffer = 0;
  std::uint64_t dead = 0;

  std::uint64_t total() const noexcept { return queue + csma + retry + buffer + dead; }

  void add(DropReason r) noexcept {
    switch (r) {
      case DropReason::Queue: ++queue; break;
      case DropReason::Csma: ++csma; break;
      case DropReason::Retry: ++retry; break;
      case DropReason::Buffer: ++buffer; break;
      case DropReason::Dead: ++dead; break;
    }
  }
};

struct ThroughputSample {
  SimTime at = 0.0;
  double kbps = 0.0;  // cumulative delivered bits / elapsed time
};

struct MetricsTable {
  std::string scenario = "default";
  std::uint64_t seed = 0;
  std::uint32_t nodes = 0;
  double offered_load_bits = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  DropCounts drops;
  std::optional<double> mean_delay_s;
  double throughput_kbps = 0.0;
  double total_energy_j = 0.0;
  double mean_energy_j = 0.0;
  std::uint64_t beacons_sent = 0;
  std::uint64_t rreq_sent = 0;
  std::uint32_t ch_rounds = 0;

  std::vector<double> per_node_energy_j;
  std::vector<ThroughputSample> throughput_samples;
};

inline constexpr const char* kCsvHeader =
    "scenario,seed,nodes,offered_load_bits,generated,delivered,drop_queue,drop_csma,"
    "drop_retry,drop_buffer,drop_dead,mean_delay_s,throughput_kbps,total_energy_j,"
    "mean_energy_j,beacons_sent,rreq_sent,ch_rounds";

// Nine significant digits, locale independent.
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string csv_row(const MetricsTable& m) {
  std::string s;
  s.reserve(192);
  auto put = [&s](const std::string& field) {
    if (!s.empty()) s += ',';
    s += field;
  };
  put(m.scenario);
  put(std::to_string(m.seed));
  put(std::to_string(m.nodes));
  put(format_real(m.offered_load_bits));
  put(std::to_string(m.generated));
  put(std::to_string(m.delivered));
  put(std::to_string(m.drops.queue));
  put(std::to_string(m.drops.csma));
  put(std::to_string(m.drops.retry));
  put(std::to_string(m.drops.buffer));
  put(std::to_string(m.drops.dead));
  put(m.mean_delay_s ? format_real(*m.mean_delay_s) : std::string("NA"));
  put(format_real(m.throughput_kbps));
  put(format_real(m.total_energy_j));
  put(format_real(m.mean_energy_j));
  put(std::to_string(m.beacons_sent));
  put(std::to_string(m.rreq_sent));
  put(std::to_string(m.ch_rounds));
  return s;
}

inline std::string to_csv(std::span<const MetricsTable> rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += csv_row(r);
    out += '\n';
  }
  return out;
}

inline void emit_csv(std::span<const MetricsTable> rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string text = to_csv(rows);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace wsnsim
