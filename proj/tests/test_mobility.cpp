#include <wsnsim/mobility.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace wsnsim;

namespace {

std::vector<MepSample> samples(std::vector<double> xs, std::vector<double> ts,
                               std::vector<double> ys = {}) {
  std::vector<MepSample> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.push_back({xs[i], ys.empty() ? 0.0 : ys[i], ts[i], static_cast<double>(i)});
  }
  return out;
}

}  // namespace

TEST(Waypoint, StaticNodeStaysPut) {
  Region region;
  MobilityParams mp{0, 0};
  RngStream rng(1, "mobility");
  Position p{10, 20};
  WaypointState wp{{200, 200}, 0.0, 0.0};
  for (int i = 0; i < 100; ++i) step_waypoint(p, wp, 1.0, region, mp, rng);
  EXPECT_EQ(p, (Position{10, 20}));
}

TEST(Waypoint, ReachesDestinationExactly) {
  Region region;
  MobilityParams mp{0, 5};
  RngStream rng(1, "mobility");
  Position p{0, 0};
  WaypointState wp{{3, 4}, 5.0, 0.0};
  step_waypoint(p, wp, 1.0, region, mp, rng);
  EXPECT_EQ(p, (Position{3, 4}));
}

TEST(Waypoint, PartialStepCoversSpeedTimesDt) {
  Region region;
  MobilityParams mp{0, 5};
  RngStream rng(1, "mobility");
  Position p{0, 0};
  WaypointState wp{{30, 40}, 5.0, 0.0};
  step_waypoint(p, wp, 1.0, region, mp, rng);
  EXPECT_NEAR(p.x, 3.0, 1e-12);
  EXPECT_NEAR(p.y, 4.0, 1e-12);
}

TEST(Waypoint, RejectsNonPositiveStep) {
  Region region;
  MobilityParams mp;
  RngStream rng(1, "mobility");
  Position p;
  WaypointState wp;
  EXPECT_THROW(step_waypoint(p, wp, 0.0, region, mp, rng), DomainError);
}

TEST(Waypoint, StaysInsideRegionAndWithinSpeedBounds) {
  Region region;
  MobilityParams mp{1, 5};
  RngStream rng(11, "mobility");
  for (int node = 0; node < 50; ++node) {
    Position p{rng.uniform(0, 250), rng.uniform(0, 250)};
    WaypointState wp = draw_waypoint(region, mp, rng);
    for (int i = 0; i < 2000; ++i) {
      const Position before = p;
      const double v = wp.speed;
      ASSERT_GE(v, 1.0);
      ASSERT_LE(v, 5.0);
      step_waypoint(p, wp, 0.1, region, mp, rng);
      ASSERT_TRUE(region.contains(p));
      ASSERT_LE(distance(before, p), v * 0.1 + 1e-9);
    }
  }
}

TEST(Mep, MeanExamples) {
  EXPECT_DOUBLE_EQ(mep_mean_x(samples({5}, {1})), 5.0);
  EXPECT_DOUBLE_EQ(mep_mean_x(samples({2, 4, 6}, {1, 1, 1})), 4.0);
  EXPECT_DOUBLE_EQ(mep_mean_x(samples({2, 4}, {2, 1})), 4.0);
  EXPECT_DOUBLE_EQ(mep_mean_y(samples({0}, {1}, {7})), 7.0);
  EXPECT_DOUBLE_EQ(mep_mean_y(samples({0, 0, 0}, {1, 1, 1}, {1, 3, 5})), 3.0);
  EXPECT_DOUBLE_EQ(mep_mean_y(samples({0, 0, 0}, {3, 0.5, 9}, {0, 0, 0})), 0.0);
}

TEST(Mep, EmptyHistoryIsAPreconditionError) {
  EXPECT_THROW(mep_mean_x({}), DomainError);
  EXPECT_THROW(mep_mean_y({}), DomainError);
}

TEST(Mep, MatchesOracleAndIsLinear) {
  RngStream rng(3, "test");
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 12));
    std::vector<double> xs(k), ys(k), ts(k);
    for (std::size_t j = 0; j < k; ++j) {
      xs[j] = rng.uniform(0, 250);
      ys[j] = rng.uniform(0, 250);
      ts[j] = rng.uniform(0.1, 3);
    }
    const auto s = samples(xs, ts, ys);
    ASSERT_LT(oracle::rel_err(mep_mean_x(s), oracle::mean_weighted(xs, ts)), 1e-9);
    ASSERT_LT(oracle::rel_err(mep_mean_y(s), oracle::mean_weighted(ys, ts)), 1e-9);
    const double c = rng.uniform(0.1, 10);
    auto scaled = s;
    for (auto& e : scaled) e.x *= c;
    ASSERT_LT(oracle::rel_err(mep_mean_x(scaled), c * mep_mean_x(s)), 1e-9);
  }
}

TEST(Deviation, Examples) {
  EXPECT_DOUBLE_EQ(deviation({4, 4}, {4, 4}), 0.0);
  EXPECT_DOUBLE_EQ(deviation({10, 10}, {7, 6}), 5.0);
  EXPECT_DOUBLE_EQ(deviation({5.1, 0}, {0, 0}), 5.1);
}

TEST(Deviation, LiteralFormIsKeptForAudit) {
  // (x + px)^2 + (y + py)^2 as typeset.
  EXPECT_DOUBLE_EQ(deviation_literal({1, 2}, {3, 4}), 16.0 + 36.0);
}

TEST(BeaconTrigger, StaticNodeNeverBeaconsAgain) {
  BeaconTrigger trig;
  trig.start({50, 50}, 0.0);
  for (int t = 1; t <= 1000; ++t) ASSERT_FALSE(trig.should_beacon({50, 50}, t));
}

TEST(BeaconTrigger, ThresholdIsStrict) {
  BeaconTrigger a;
  a.start({0, 0}, 0.0);
  EXPECT_FALSE(a.should_beacon({5.0, 0}, 1.0));  // exactly 5 m

  BeaconTrigger b;
  b.start({0, 0}, 0.0);
  EXPECT_TRUE(b.should_beacon({5.1, 0}, 1.0));
  // A beacon restarts the history at the current position.
  EXPECT_EQ(b.history().k(), 1u);
  EXPECT_EQ(b.history().last_beacon_pos(), (Position{5.1, 0}));
}

TEST(BeaconTrigger, WindowBoundsHistory) {
  BeaconTrigger trig(MepParams{1e9, 1.0, 4});
  trig.start({0, 0}, 0.0);
  for (int t = 1; t <= 20; ++t) trig.should_beacon({0.1 * t, 0}, t);
  EXPECT_EQ(trig.history().k(), 4u);
}

// Along a random-waypoint track, every check that did not fire had a
// deviation within the threshold, and every firing exceeded it.
TEST(BeaconTrigger, FiresOnlyAboveThresholdAlongTracks) {
  Region region;
  MobilityParams mp{0.5, 5};
  RngStream rng(8, "mobility");
  for (int node = 0; node < 30; ++node) {
    Position p{rng.uniform(0, 250), rng.uniform(0, 250)};
    WaypointState wp = draw_waypoint(region, mp, rng);
    BeaconTrigger trig;
    trig.start(p, 0.0);
    int fired = 0;
    for (int t = 1; t <= 100; ++t) {
      for (int k = 0; k < 10; ++k) step_waypoint(p, wp, 0.1, region, mp, rng);
      const Position predicted = trig.history().predicted();
      const bool fire = trig.should_beacon(p, t);
      const double dev = oracle::displacement(p.x, p.y, predicted.x, predicted.y);
      ASSERT_EQ(fire, dev > 5.0);
      fired += fire;
    }
    EXPECT_GT(fired, 0);
  }
}
