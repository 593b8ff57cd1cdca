#include <wsnsim/sweep.hpp>

#include <gtest/gtest.h>

using namespace wsnsim;

namespace {

Scenario small() {
  Scenario s;
  s.nodes = 15;
  s.sim_time_s = 20;
  s.traffic.stop_s = 20;
  s.traffic.sources = 3;
  return s;
}

}  // namespace

TEST(SweepParse, AxesAndValues) {
  const auto a = parse_sweep("nodes=20,40,60");
  EXPECT_EQ(a.axis, SweepAxis::Nodes);
  EXPECT_EQ(a.values, (std::vector<double>{20, 40, 60}));
  const auto b = parse_sweep("offered_load = 10000, 20000");
  EXPECT_EQ(b.axis, SweepAxis::OfferedLoad);
  EXPECT_EQ(b.values, (std::vector<double>{10000, 20000}));
}

TEST(SweepParse, Rejects) {
  EXPECT_THROW(parse_sweep("depth=1,2"), ConfigError);
  EXPECT_THROW(parse_sweep("nodes"), ConfigError);
  EXPECT_THROW(parse_sweep("nodes="), ConfigError);
  EXPECT_THROW(parse_sweep("nodes=20,x"), ConfigError);
  EXPECT_THROW(parse_sweep("nodes=20.5"), ConfigError);
  EXPECT_THROW(parse_sweep("offered_load=-5"), ConfigError);
}

TEST(SeedRange, Forms) {
  EXPECT_EQ(parse_seed_range("1..3"), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(parse_seed_range("7"), (std::vector<std::uint64_t>{7}));
  EXPECT_THROW(parse_seed_range("3..1"), ConfigError);
  EXPECT_THROW(parse_seed_range("a..b"), ConfigError);
}

TEST(Sweep, RowsOrderedByValueThenSeed) {
  const auto runs = run_sweep(small(), parse_sweep("nodes=10,15"), {1, 2, 3});
  ASSERT_EQ(runs.size(), 6u);
  const std::uint32_t nodes[] = {10, 10, 10, 15, 15, 15};
  const std::uint64_t seeds[] = {1, 2, 3, 1, 2, 3};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    EXPECT_EQ(runs[i].metrics.nodes, nodes[i]);
    EXPECT_EQ(runs[i].metrics.seed, seeds[i]);
  }
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  const auto spec = parse_sweep("nodes=10,15");
  const auto one = run_sweep(small(), spec, {1, 2, 3}, 1);
  const auto three = run_sweep(small(), spec, {1, 2, 3}, 3);
  EXPECT_EQ(to_csv(metrics_of(one)), to_csv(metrics_of(three)));
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].event_hash, three[i].event_hash);
}

TEST(Sweep, OfferedLoadColumnScales) {
  const auto runs = run_sweep(small(), parse_sweep("offered_load=5000,10000"), {1});
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_DOUBLE_EQ(runs[1].metrics.offered_load_bits, 2 * runs[0].metrics.offered_load_bits);
}

TEST(Sweep, SummaryAveragesAcrossSeeds) {
  std::vector<RunResult> runs(4);
  for (std::size_t i = 0; i < 4; ++i) {
    runs[i].value = i < 2 ? 10 : 20;
    runs[i].metrics.total_energy_j = static_cast<double>(i + 1);
    runs[i].metrics.generated = 10;
    runs[i].metrics.delivered = 5;
  }
  runs[0].metrics.mean_delay_s = 0.2;
  const auto rows = summarize(runs);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].runs, 2u);
  EXPECT_DOUBLE_EQ(rows[0].total_energy_j, 1.5);
  EXPECT_DOUBLE_EQ(rows[1].total_energy_j, 3.5);
  EXPECT_DOUBLE_EQ(rows[0].delivery_ratio, 0.5);
  ASSERT_TRUE(rows[0].mean_delay_s);
  EXPECT_DOUBLE_EQ(*rows[0].mean_delay_s, 0.2);
  EXPECT_FALSE(rows[1].mean_delay_s);
  const auto csv = summary_csv(SweepAxis::Nodes, rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "nodes,runs,mean_total_energy_j,mean_energy_per_node_j,mean_delay_s,"
            "mean_throughput_kbps,mean_delivery_ratio");
  EXPECT_NE(csv.find(",NA,"), std::string::npos);
}

TEST(Sweep, InvalidValueSurfacesAsError) {
  EXPECT_THROW(run_sweep(small(), SweepSpec{SweepAxis::Nodes, {2}}, {1}), ScenarioError);
}
