// Command-line front end: single runs, multi-seed runs and sweeps over node
// count or offered load. CSV goes to --out or stdout; overrides and sweep
// summaries go to stderr.

#include <wsnsim/wsnsim.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw wsnsim::ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobile sensor network simulator"};
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string seeds_text;
  std::string sweep_text;
  std::string mode_text;
  std::string beaconing_text;
  std::string trace_path;
  std::string out_path;
  std::vector<std::string> sets;
  bool print_defaults = false;
  unsigned jobs = 1;

  app.add_option("--scenario", scenario_path, "Scenario file (key = value lines)");
  app.add_option("--seed", seed, "Seed for a single run");
  app.add_option("--seeds", seeds_text, "Seed range N..M");
  app.add_option("--sweep", sweep_text, "AXIS=v1,v2,... with AXIS nodes or offered_load");
  app.add_option("--mode", mode_text, "hybrid | aodv_only | cluster_only");
  app.add_option("--beaconing", beaconing_text, "adaptive | periodic");
  app.add_option("--set", sets, "Extra KEY=VALUE scenario override (repeatable)");
  app.add_option("--trace", trace_path, "Write the per-event log of a single run");
  app.add_option("--out", out_path, "CSV output file (default stdout)");
  app.add_option("--jobs", jobs, "Parallel instances for multi-run invocations")
      ->check(CLI::Range(1u, 256u));
  app.add_flag("--print-defaults", print_defaults, "Print every scenario key with its value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  wsnsim::Scenario sc;
  std::vector<std::uint64_t> seeds;
  std::optional<wsnsim::SweepSpec> sweep;
  try {
    if (print_defaults) {
      std::cout << wsnsim::print_scenario(wsnsim::Scenario{});
      return 0;
    }
    if (!scenario_path.empty()) sc = wsnsim::parse_scenario(read_file(scenario_path));
    if (!mode_text.empty()) wsnsim::apply_setting(sc, "mode", mode_text, 0);
    if (!beaconing_text.empty()) wsnsim::apply_setting(sc, "beaconing.mode", beaconing_text, 0);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw wsnsim::ConfigError("--set expects KEY=VALUE");
      wsnsim::apply_setting(sc, wsnsim::detail::trim(std::string_view(kv).substr(0, eq)),
                            wsnsim::detail::trim(std::string_view(kv).substr(eq + 1)), 0);
    }
    if (seed) wsnsim::apply_setting(sc, "seed", std::to_string(*seed), 0);
    wsnsim::validate(sc);

    if (!seeds_text.empty()) {
      if (seed) throw wsnsim::ConfigError("--seed and --seeds are exclusive");
      seeds = wsnsim::parse_seed_range(seeds_text);
    } else if (!sweep_text.empty() && !seed) {
      for (std::uint32_t i = 0; i < sc.replications; ++i) seeds.push_back(sc.seed + i);
    } else {
      seeds.push_back(sc.seed);
    }
    if (!sweep_text.empty()) sweep = wsnsim::parse_sweep(sweep_text);
    const std::size_t runs = seeds.size() * (sweep ? sweep->values.size() : 1);
    if (!trace_path.empty() && runs != 1) {
      throw wsnsim::ConfigError("--trace needs exactly one run");
    }
  } catch (const wsnsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& [k, v] : sc.overrides) std::cerr << "# override " << k << " = " << v << '\n';

  try {
    std::vector<wsnsim::RunResult> results;
    if (sweep) {
      results = wsnsim::run_sweep(sc, *sweep, seeds, jobs);
    } else if (!trace_path.empty()) {
      std::ofstream trace(trace_path, std::ios::binary | std::ios::trunc);
      if (!trace) throw std::runtime_error("cannot open '" + trace_path + "' for writing");
      results.push_back(wsnsim::run_one(sc, 0.0, &trace));
      if (!trace) throw std::runtime_error("write to '" + trace_path + "' failed");
    } else {
      std::vector<wsnsim::Scenario> plan;
      for (auto s : seeds) {
        wsnsim::Scenario one = sc;
        one.seed = s;
        plan.push_back(std::move(one));
      }
      results = wsnsim::run_batch(plan, {}, jobs);
    }
    write_text(out_path, wsnsim::to_csv(wsnsim::metrics_of(results)));
    if (sweep) std::cerr << wsnsim::summary_csv(sweep->axis, wsnsim::summarize(results));
  } catch (const wsnsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
