#pragma once

// Scenario configuration: defaults, the `key = value` text format and
// validation.

#include "clustering.hpp"
#include "energy.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "mac.hpp"
#include "mobility.hpp"
#include "radio.hpp"
#include "routing.hpp"

#include <charconv>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wsnsim {

enum class Mode : std::uint8_t { Hybrid, AodvOnly, ClusterOnly };
enum class Beaconing : std::uint8_t { Adaptive, Periodic };

inline std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Hybrid: return "hybrid";
    case Mode::AodvOnly: return "aodv_only";
    case Mode::ClusterOnly: return "cluster_only";
  }
  return "?";
}

inline std::string_view to_string(Beaconing b) noexcept {
  return b == Beaconing::Adaptive ? "adaptive" : "periodic";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "hybrid") return Mode::Hybrid;
  if (s == "aodv_only") return Mode::AodvOnly;
  if (s == "cluster_only") return Mode::ClusterOnly;
  return std::nullopt;
}

inline std::optional<Beaconing> parse_beaconing(std::string_view s) {
  if (s == "adaptive") return Beaconing::Adaptive;
  if (s == "periodic") return Beaconing::Periodic;
  return std::nullopt;
}

struct TrafficParams {
  std::uint32_t sources = 10;
  double load_bps = 20480.0;  // aggregate over all sources
  double start_s = 5.0;
  double stop_s = 100.0;
};

struct Scenario {
  std::string name = "default";
  std::uint32_t nodes = 50;  // sensor nodes; the sink is extra
  Region region{250.0};
  std::optional<Position> sink;  // centre of the region when unset
  double sim_time_s = 100.0;
  std::uint64_t seed = 1;
  std::uint32_t replications = 5;
  Mode mode = Mode::Hybrid;

  MobilityParams mobility;
  double mobility_step_s = 0.1;
  MepParams mep;
  Beaconing beaconing = Beaconing::Adaptive;
  double beacon_period_s = 1.0;
  RadioConfig radio;
  MacParams mac;
  EnergyParams energy;
  ElectionParams cluster;
  RouteParams route;
  TrafficParams traffic;

  // Keys explicitly set by the scenario text or command line, in order.
  std::vector<std::pair<std::string, std::string>> overrides;

  Position sink_position() const { return sink.value_or(region.center()); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> to_double(std::string_view s) {
  double v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

struct ScenarioKey {
  std::string name;
  std::function<std::string(const Scenario&)> get;
  // Returns an error message, or empty on success.
  std::function<std::string(Scenario&, std::string_view)> set;
};

namespace detail {

inline ScenarioKey real_key(std::string name, double lo, double hi,
                            std::function<double&(Scenario&)> ref) {
  return {std::move(name),
          [ref](const Scenario& s) { return fmt(ref(const_cast<Scenario&>(s))); },
          [ref, lo, hi](Scenario& s, std::string_view v) -> std::string {
            auto d = to_double(v);
            if (!d) return "not a number";
            if (!(*d >= lo && *d <= hi)) {
              return "must lie in [" + fmt(lo) + ", " + fmt(hi) + "]";
            }
            ref(s) = *d;
            return {};
          }};
}

template <typename Int>
ScenarioKey int_key(std::string name, std::int64_t lo, std::int64_t hi,
                    std::function<Int&(Scenario&)> ref) {
  return {std::move(name),
          [ref](const Scenario& s) {
            return std::to_string(ref(const_cast<Scenario&>(s)));
          },
          [ref, lo, hi](Scenario& s, std::string_view v) -> std::string {
            auto i = to_int(v);
            if (!i) return "not an integer";
            if (*i < lo || *i > hi) {
              return "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
            }
            ref(s) = static_cast<Int>(*i);
            return {};
          }};
}

}  // namespace detail

inline const std::vector<ScenarioKey>& scenario_keys() {
  using detail::int_key;
  using detail::real_key;
  constexpr double kInf = 1e300;
  static const std::vector<ScenarioKey> keys = [] {
    std::vector<ScenarioKey> k;
    auto real = [&k](std::string n, double lo, double hi, std::function<double&(Scenario&)> r) {
      k.push_back(real_key(std::move(n), lo, hi, std::move(r)));
    };
    k.push_back({"name", [](const Scenario& s) { return s.name; },
                 [](Scenario& s, std::string_view v) -> std::string {
                   if (v.empty() || v.find_first_of(", \t\"") != std::string_view::npos) {
                     return "must be a non-empty token without commas or spaces";
                   }
                   s.name = std::string(v);
                   return {};
                 }});
    k.push_back(int_key<std::uint32_t>("nodes", 1, 1000,
                                       [](Scenario& s) -> std::uint32_t& { return s.nodes; }));
    real("region_m", 1.0, 1e5, [](Scenario& s) -> double& { return s.region.side; });
    k.push_back({"sink.x",
                 [](const Scenario& s) { return detail::fmt(s.sink_position().x); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d) return "not a number";
                   Position p = s.sink_position();
                   p.x = *d;
                   s.sink = p;
                   return {};
                 }});
    k.push_back({"sink.y",
                 [](const Scenario& s) { return detail::fmt(s.sink_position().y); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d) return "not a number";
                   Position p = s.sink_position();
                   p.y = *d;
                   s.sink = p;
                   return {};
                 }});
    real("sim_time_s", 1e-3, 1e7, [](Scenario& s) -> double& { return s.sim_time_s; });
    k.push_back(int_key<std::uint64_t>(
        "seed", 0, std::numeric_limits<std::int64_t>::max(),
        [](Scenario& s) -> std::uint64_t& { return s.seed; }));
    k.push_back(int_key<std::uint32_t>(
        "replications", 1, 1000, [](Scenario& s) -> std::uint32_t& { return s.replications; }));
    k.push_back({"mode", [](const Scenario& s) { return std::string(to_string(s.mode)); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto m = parse_mode(v);
                   if (!m) return "expected hybrid, aodv_only or cluster_only";
                   s.mode = *m;
                   return {};
                 }});

    real("mobility.v_min", 0.0, 5.0, [](Scenario& s) -> double& { return s.mobility.v_min; });
    real("mobility.v_max", 0.0, 5.0, [](Scenario& s) -> double& { return s.mobility.v_max; });
    real("mobility.step_s", 1e-4, 10.0, [](Scenario& s) -> double& { return s.mobility_step_s; });
    real("mep.threshold_m", 0.0, kInf, [](Scenario& s) -> double& { return s.mep.threshold_m; });
    real("mep.check_interval_s", 1e-3, 1e4,
         [](Scenario& s) -> double& { return s.mep.check_interval_s; });
    k.push_back(int_key<std::size_t>("mep.window", 1, 100000,
                                     [](Scenario& s) -> std::size_t& { return s.mep.window; }));
    k.push_back({"beaconing.mode",
                 [](const Scenario& s) { return std::string(to_string(s.beaconing)); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto b = parse_beaconing(v);
                   if (!b) return "expected adaptive or periodic";
                   s.beaconing = *b;
                   return {};
                 }});
    real("beaconing.period_s", 1e-3, 1e4, [](Scenario& s) -> double& { return s.beacon_period_s; });

    real("radio.pt_mw", 1e-9, 1e6, [](Scenario& s) -> double& { return s.radio.pt_mw; });
    real("radio.ht_m", 1e-6, 1e3, [](Scenario& s) -> double& { return s.radio.ht_m; });
    real("radio.hr_m", 1e-6, 1e3, [](Scenario& s) -> double& { return s.radio.hr_m; });
    real("radio.wavelength_m", 1e-6, 1e3,
         [](Scenario& s) -> double& { return s.radio.wavelength_m; });
    real("radio.range_m", 1e-3, 1e5, [](Scenario& s) -> double& { return s.radio.range_m; });
    real("radio.cs_range_m", 1e-3, 1e5, [](Scenario& s) -> double& { return s.radio.cs_range_m; });

    k.push_back(int_key<int>("mac.min_be", 0, 20, [](Scenario& s) -> int& { return s.mac.min_be; }));
    k.push_back(int_key<int>("mac.max_be", 0, 20, [](Scenario& s) -> int& { return s.mac.max_be; }));
    k.push_back(int_key<int>("mac.max_csma_backoffs", 0, 100,
                             [](Scenario& s) -> int& { return s.mac.max_csma_backoffs; }));
    k.push_back(int_key<int>("mac.max_retries", 0, 100,
                             [](Scenario& s) -> int& { return s.mac.max_retries; }));
    k.push_back(int_key<std::size_t>("mac.queue_len", 1, 1000000,
                                     [](Scenario& s) -> std::size_t& { return s.mac.queue_len; }));
    k.push_back(int_key<std::uint32_t>(
        "mac.phy_overhead_bits", 0, 100000,
        [](Scenario& s) -> std::uint32_t& { return s.mac.phy_overhead_bits; }));

    real("energy.e0_j", 1e-12, kInf, [](Scenario& s) -> double& { return s.energy.e0_j; });
    k.push_back({"energy.e_txn_mj",
                 [](const Scenario& s) { return detail::fmt(s.energy.e_txn_j * 1e3); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d || *d < 0) return "must be a non-negative number";
                   s.energy.e_txn_j = *d * 1e-3;
                   return {};
                 }});
    k.push_back({"energy.e_rxn_mj",
                 [](const Scenario& s) { return detail::fmt(s.energy.e_rxn_j * 1e3); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d || *d < 0) return "must be a non-negative number";
                   s.energy.e_rxn_j = *d * 1e-3;
                   return {};
                 }});
    k.push_back({"energy.p_idle_mw",
                 [](const Scenario& s) { return detail::fmt(s.energy.p_idle_w * 1e3); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d || *d < 0) return "must be a non-negative number";
                   s.energy.p_idle_w = *d * 1e-3;
                   return {};
                 }});
    k.push_back({"energy.p_sleep_uw",
                 [](const Scenario& s) { return detail::fmt(s.energy.p_sleep_w * 1e6); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d || *d < 0) return "must be a non-negative number";
                   s.energy.p_sleep_w = *d * 1e-6;
                   return {};
                 }});
    k.push_back({"energy.sleep_after_ms",
                 [](const Scenario& s) { return detail::fmt(s.energy.sleep_after_s * 1e3); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d || *d < 0) return "must be a non-negative number";
                   s.energy.sleep_after_s = *d * 1e-3;
                   return {};
                 }});

    real("cluster.t1_s", 1e-3, 1e6, [](Scenario& s) -> double& { return s.cluster.t1; });
    real("cluster.t2_s", 1e-6, 1e6, [](Scenario& s) -> double& { return s.cluster.t2; });
    real("cluster.alpha", 0.0, 1.0, [](Scenario& s) -> double& { return s.cluster.alpha; });
    real("cluster.r_max_m", 1e-6, 1e6, [](Scenario& s) -> double& { return s.cluster.r_max; });
    real("cluster.vr_lo", 0.0, 1e3, [](Scenario& s) -> double& { return s.cluster.vr_lo; });
    real("cluster.vr_hi", 0.0, 1e3, [](Scenario& s) -> double& { return s.cluster.vr_hi; });
    k.push_back({"cluster.pin_vr",
                 [](const Scenario& s) {
                   return s.cluster.pin_vr ? detail::fmt(*s.cluster.pin_vr) : std::string("none");
                 },
                 [](Scenario& s, std::string_view v) -> std::string {
                   if (v == "none") {
                     s.cluster.pin_vr.reset();
                     return {};
                   }
                   auto d = detail::to_double(v);
                   if (!d || *d < 0) return "expected 'none' or a non-negative number";
                   s.cluster.pin_vr = *d;
                   return {};
                 }});
    k.push_back({"cluster.slot_ms",
                 [](const Scenario& s) { return detail::fmt(s.cluster.slot_s * 1e3); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d || !(*d > 0)) return "must be positive";
                   s.cluster.slot_s = *d * 1e-3;
                   return {};
                 }});

    real("route.neighbor_ttl_s", 1e-3, 1e7,
         [](Scenario& s) -> double& { return s.route.neighbor_ttl_s; });
    k.push_back(int_key<int>("route.rreq_retries", 0, 100,
                             [](Scenario& s) -> int& { return s.route.rreq_retries; }));
    k.push_back({"route.rrep_window_ms",
                 [](const Scenario& s) { return detail::fmt(s.route.rrep_window_s * 1e3); },
                 [](Scenario& s, std::string_view v) -> std::string {
                   auto d = detail::to_double(v);
                   if (!d || *d < 0) return "must be a non-negative number";
                   s.route.rrep_window_s = *d * 1e-3;
                   return {};
                 }});
    k.push_back(int_key<std::size_t>(
        "route.buffer_pkts", 1, 1000000,
        [](Scenario& s) -> std::size_t& { return s.route.buffer_pkts; }));

    k.push_back(int_key<std::uint32_t>(
        "traffic.sources", 0, 1000, [](Scenario& s) -> std::uint32_t& { return s.traffic.sources; }));
    real("traffic.load_bps", 1e-6, 1e9, [](Scenario& s) -> double& { return s.traffic.load_bps; });
    real("traffic.start_s", 0.0, 1e7, [](Scenario& s) -> double& { return s.traffic.start_s; });
    real("traffic.stop_s", 0.0, 1e7, [](Scenario& s) -> double& { return s.traffic.stop_s; });
    return k;
  }();
  return keys;
}

inline const ScenarioKey* find_scenario_key(std::string_view name) {
  for (const auto& k : scenario_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

// Cross-field checks. Throws ScenarioError naming the first offending key;
// `line_of` maps keys to the line they were set on (0 for defaults).
inline void validate(const Scenario& s, const std::map<std::string, int>& line_of = {}) {
  auto fail = [&](const std::string& key, const std::string& msg) {
    auto it = line_of.find(key);
    throw ScenarioError(key, it == line_of.end() ? 0 : it->second, msg);
  };
  if (s.mobility.v_min > s.mobility.v_max) fail("mobility.v_min", "exceeds mobility.v_max");
  if (!s.region.contains(s.sink_position())) fail("sink.x", "sink lies outside the region");
  if (s.radio.cs_range_m < s.radio.range_m) fail("radio.cs_range_m", "shorter than radio.range_m");
  if (s.mac.min_be > s.mac.max_be) fail("mac.min_be", "exceeds mac.max_be");
  if (!(s.cluster.t2 < s.cluster.t1)) fail("cluster.t2_s", "must be shorter than cluster.t1_s");
  if (s.cluster.vr_lo > s.cluster.vr_hi) fail("cluster.vr_lo", "exceeds cluster.vr_hi");
  if (s.traffic.sources > s.nodes) fail("traffic.sources", "more sources than nodes");
  if (s.traffic.stop_s < s.traffic.start_s) fail("traffic.stop_s", "precedes traffic.start_s");
}

// Applies one `key = value` assignment. Throws ScenarioError on failure.
inline void apply_setting(Scenario& s, std::string_view key, std::string_view value, int line) {
  const ScenarioKey* k = find_scenario_key(key);
  if (!k) throw ScenarioError(std::string(key), line, "unknown key");
  if (auto err = k->set(s, value); !err.empty()) {
    throw ScenarioError(std::string(key), line, err + " (got '" + std::string(value) + "')");
  }
  s.overrides.emplace_back(std::string(key), std::string(value));
}

// Line-oriented `key = value` text; '#' starts a comment. Missing keys keep
// their defaults.
inline Scenario parse_scenario(std::string_view text, Scenario base = {}) {
  std::map<std::string, int> line_of;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ScenarioError(std::string(line), line_no, "expected 'key = value'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    apply_setting(base, key, value, line_no);
    line_of[key] = line_no;
  }
  validate(base, line_of);
  return base;
}

// Every key with its current value, one `key = value` per line.
inline std::string print_scenario(const Scenario& s) {
  std::string out;
  for (const auto& k : scenario_keys()) {
    out += k.name;
    out += " = ";
    out += k.get(s);
    out += '\n';
  }
  return out;
}

}  // namespace wsnsim
