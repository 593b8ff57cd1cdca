#pragma once

// Parameter sweeps: one independent simulation per (value, seed), optionally
// spread over worker threads, merged back in (value, seed) order.

#include "errors.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace wsnsim {

enum class SweepAxis : std::uint8_t { Nodes, OfferedLoad };

inline std::string_view to_string(SweepAxis a) noexcept {
  return a == SweepAxis::Nodes ? "nodes" : "offered_load";
}

inline std::optional<SweepAxis> parse_axis(std::string_view s) {
  if (s == "nodes") return SweepAxis::Nodes;
  if (s == "offered_load") return SweepAxis::OfferedLoad;
  return std::nullopt;
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::Nodes;
  std::vector<double> values;
};

// "nodes=20,40,60" or "offered_load=10000,20000" (aggregate bits per second).
inline SweepSpec parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("sweep: expected AXIS=v1,v2,...");
  const auto axis = parse_axis(detail::trim(text.substr(0, eq)));
  if (!axis) throw ConfigError("sweep: axis must be 'nodes' or 'offered_load'");
  SweepSpec spec{*axis, {}};
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = detail::trim(rest.substr(0, comma));
    const auto v = detail::to_double(item);
    if (!v || !(*v > 0)) {
      throw ConfigError("sweep: '" + std::string(item) + "' is not a positive number");
    }
    if (*axis == SweepAxis::Nodes && *v != static_cast<double>(static_cast<std::uint32_t>(*v))) {
      throw ConfigError("sweep: node counts must be integers");
    }
    spec.values.push_back(*v);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (spec.values.empty()) throw ConfigError("sweep: no values given");
  return spec;
}

// "N..M" inclusive, or a single "N".
inline std::vector<std::uint64_t> parse_seed_range(std::string_view text) {
  const auto dots = text.find("..");
  const auto lo = detail::to_int(detail::trim(text.substr(0, dots)));
  const auto hi = dots == std::string_view::npos ? lo
                                                 : detail::to_int(detail::trim(text.substr(dots + 2)));
  if (!lo || !hi || *lo < 0 || *hi < *lo) throw ConfigError("seeds: expected N..M with 0 <= N <= M");
  if (*hi - *lo >= 100000) throw ConfigError("seeds: range too large");
  std::vector<std::uint64_t> out;
  for (auto s = *lo; s <= *hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
  return out;
}

inline Scenario apply_axis(Scenario s, SweepAxis axis, double value) {
  if (axis == SweepAxis::Nodes) {
    s.nodes = static_cast<std::uint32_t>(value);
    s.overrides.emplace_back("nodes", std::to_string(s.nodes));
  } else {
    s.traffic.load_bps = value;
    s.overrides.emplace_back("traffic.load_bps", detail::fmt(value));
  }
  validate(s);
  return s;
}

struct RunResult {
  double value = 0.0;  // sweep value, or 0 for a plain run
  MetricsTable metrics;
  std::uint64_t event_hash = 0;
  std::uint64_t events = 0;
};

inline RunResult run_one(const Scenario& s, double value = 0.0, std::ostream* trace = nullptr) {
  Network net(s);
  net.set_trace(trace);
  RunResult r;
  r.value = value;
  r.metrics = net.run();
  r.event_hash = net.event_hash();
  r.events = net.events_dispatched();
  return r;
}

// Runs independent instances; results keep the order of `plan` whatever the
// number of jobs.
inline std::vector<RunResult> run_batch(const std::vector<Scenario>& plan,
                                        const std::vector<double>& values, unsigned jobs = 1) {
  std::vector<RunResult> out(plan.size());
  if (plan.empty()) return out;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      try {
        out[i] = run_one(plan[i], i < values.size() ? values[i] : 0.0);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(plan.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// One run per (value, seed), ordered by value, then seed.
inline std::vector<RunResult> run_sweep(const Scenario& base, const SweepSpec& spec,
                                        const std::vector<std::uint64_t>& seeds,
                                        unsigned jobs = 1) {
  if (spec.values.empty() || seeds.empty()) throw ConfigError("sweep needs values and seeds");
  std::vector<Scenario> plan;
  std::vector<double> plan_value;
  for (double v : spec.values) {
    const Scenario at = apply_axis(base, spec.axis, v);
    for (auto seed : seeds) {
      Scenario s = at;
      s.seed = seed;
      plan.push_back(std::move(s));
      plan_value.push_back(v);
    }
  }
  return run_batch(plan, plan_value, jobs);
}

struct SweepSummaryRow {
  double value = 0.0;
  std::size_t runs = 0;
  double total_energy_j = 0.0;
  double mean_energy_j = 0.0;
  std::optional<double> mean_delay_s;  // over runs that delivered anything
  double throughput_kbps = 0.0;
  double delivery_ratio = 0.0;
};

// Per-value means across seeds.
inline std::vector<SweepSummaryRow> summarize(const std::vector<RunResult>& runs) {
  std::vector<SweepSummaryRow> rows;
  for (const auto& r : runs) {
    if (rows.empty() || rows.back().value != r.value) {
      rows.push_back(SweepSummaryRow{});
      rows.back().value = r.value;
    }
    auto& row = rows.back();
    const auto& m = r.metrics;
    ++row.runs;
    row.total_energy_j += m.total_energy_j;
    row.mean_energy_j += m.mean_energy_j;
    row.throughput_kbps += m.throughput_kbps;
    row.delivery_ratio +=
        m.generated == 0 ? 0.0 : static_cast<double>(m.delivered) / static_cast<double>(m.generated);
  }
  for (auto& row : rows) {
    const double n = static_cast<double>(row.runs);
    row.total_energy_j /= n;
    row.mean_energy_j /= n;
    row.throughput_kbps /= n;
    row.delivery_ratio /= n;
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& r : runs) {
      if (r.value == row.value && r.metrics.mean_delay_s) {
        sum += *r.metrics.mean_delay_s;
        ++k;
      }
    }
    if (k > 0) row.mean_delay_s = sum / static_cast<double>(k);
  }
  return rows;
}

inline std::string summary_csv(SweepAxis axis, const std::vector<SweepSummaryRow>& rows) {
  std::string out = std::string(to_string(axis)) +
                    ",runs,mean_total_energy_j,mean_energy_per_node_j,mean_delay_s,"
                    "mean_throughput_kbps,mean_delivery_ratio\n";
  for (const auto& r : rows) {
    out += format_real(r.value) + ',' + std::to_string(r.runs) + ',' +
           format_real(r.total_energy_j) + ',' + format_real(r.mean_energy_j) + ',' +
           (r.mean_delay_s ? format_real(*r.mean_delay_s) : std::string("NA")) + ',' +
           format_real(r.throughput_kbps) + ',' + format_real(r.delivery_ratio) + '\n';
  }
  return out;
}

inline std::vector<MetricsTable> metrics_of(const std::vector<RunResult>& runs) {
  std::vector<MetricsTable> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.metrics);
  return out;
}

}  // namespace wsnsim
