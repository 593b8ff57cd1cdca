#include <wsnsim/metrics.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace wsnsim;

namespace {

PacketRecord delivered(SimTime gen, SimTime at) {
  PacketRecord r;
  r.generated_at = gen;
  r.delivered_at = at;
  return r;
}

PacketRecord lost(SimTime gen) {
  PacketRecord r;
  r.generated_at = gen;
  r.dropped = DropReason::Buffer;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cbr, OnePacketPerSecondAt2048bps) {
  CbrConfig c;
  c.offered_load_bps = 2048;
  EXPECT_DOUBLE_EQ(c.interval(), 1.0);
}

TEST(Cbr, EmptyWindowGivesNothing) {
  CbrConfig c;
  c.sources = {1, 2};
  c.start_t = c.stop_t = 10;
  RngStream rng(1, "traffic");
  EXPECT_TRUE(generate_cbr(c, rng).empty());
}

TEST(Cbr, TenSourcesForOneHundredSeconds) {
  CbrConfig c;
  c.offered_load_bps = 2048;
  c.start_t = 0;
  c.stop_t = 100;
  for (NodeId i = 1; i <= 10; ++i) c.sources.push_back(i);
  RngStream rng(4, "traffic");
  const auto e = generate_cbr(c, rng);
  EXPECT_EQ(e.size(), 1000u);
  for (std::size_t i = 1; i < e.size(); ++i) ASSERT_LE(e[i - 1].at, e[i].at);
  // Each source keeps its phase: emissions are exactly one interval apart.
  std::vector<SimTime> first(11, -1);
  for (const auto& x : e) {
    if (first[x.src] < 0) {
      first[x.src] = x.at;
      EXPECT_LT(x.at, 1.0);
    }
  }
}

TEST(Cbr, RejectsZeroRate) {
  CbrConfig c;
  c.offered_load_bps = 0;
  EXPECT_THROW(c.interval(), ConfigError);
}

TEST(Delay, MeanOverDeliveredOnly) {
  const std::vector<PacketRecord> one{delivered(0, 0.010)};
  EXPECT_DOUBLE_EQ(*mean_delay(one), 0.010);
  const std::vector<PacketRecord> two{delivered(1, 1.010), delivered(2, 2.030), lost(3)};
  EXPECT_NEAR(*mean_delay(two), 0.020, 1e-12);
  const std::vector<PacketRecord> none{lost(1)};
  EXPECT_FALSE(mean_delay(none).has_value());
}

TEST(Throughput, Examples) {
  std::vector<PacketRecord> recs(1000, delivered(0, 1));
  EXPECT_NEAR(throughput_kbps(recs, 100), 20.48, 1e-12);
  const std::vector<PacketRecord> none{lost(0)};
  EXPECT_EQ(throughput_kbps(none, 100), 0.0);
  EXPECT_THROW(throughput_kbps(recs, 0), DomainError);
}

TEST(EnergyReport, IdleOnlyAndTotals) {
  std::vector<EnergyLedger> ledgers(10);
  for (auto& l : ledgers) accrue_state(l, RadioState::Idle, 100.0);
  const auto rep = energy_report(ledgers);
  for (double e : rep.per_node_j) EXPECT_NEAR(e, 0.1, 1e-12);
  double sum = 0;
  for (double e : rep.per_node_j) sum += e;
  EXPECT_EQ(rep.total_j, sum);
  EXPECT_NEAR(rep.mean_j, 0.1, 1e-12);
}

TEST(Csv, HeaderOnlyWhenEmpty) {
  EXPECT_EQ(to_csv({}), std::string(kCsvHeader) + "\n");
}

TEST(Csv, OneRowPerRunWithFixedColumns) {
  std::vector<MetricsTable> rows(6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].seed = i;
    rows[i].mean_delay_s = 0.1 / 3.0;
  }
  rows[5].mean_delay_s.reset();
  const std::string csv = to_csv(rows);
  std::istringstream in(csv);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 17);
    ++n;
  }
  EXPECT_EQ(n, 7);
  EXPECT_NE(csv.find(",0.0333333333,"), std::string::npos);  // 9 significant digits
  EXPECT_NE(csv.find(",NA,"), std::string::npos);
}

TEST(Csv, NineSignificantDigits) {
  EXPECT_EQ(format_real(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_real(20.48), "20.48");
  EXPECT_EQ(format_real(123456789.4), "123456789");
}

TEST(Csv, EmitIsByteIdenticalAndFailsOnBadPath) {
  std::vector<MetricsTable> rows(2);
  rows[0].total_energy_j = 5.123456789123;
  const auto dir = std::filesystem::temp_directory_path();
  const std::string a = (dir / "wsnsim_metrics_a.csv").string();
  const std::string b = (dir / "wsnsim_metrics_b.csv").string();
  emit_csv(rows, a);
  emit_csv(rows, b);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a), to_csv(rows));
  EXPECT_THROW(emit_csv(rows, (dir / "no_such_dir" / "x.csv").string()), std::runtime_error);
}
