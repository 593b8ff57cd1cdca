#include <wsnsim/routing.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

using namespace wsnsim;

TEST(Neighbors, BeaconInsertsAndTtlEvicts) {
  NeighborTable t(30.0);
  t.update(4, {1, 2}, 90.0, 5.0);
  ASSERT_NE(t.find(4), nullptr);
  EXPECT_TRUE(t.live(4, 35.0));
  EXPECT_FALSE(t.live(4, 35.1));
  EXPECT_TRUE(t.expire(35.0).empty());
  EXPECT_EQ(t.expire(35.1), std::vector<NodeId>{4});
  EXPECT_EQ(t.find(4), nullptr);
}

TEST(Neighbors, RefreshMovesEntry) {
  NeighborTable t(30.0);
  t.update(4, {1, 2}, 90.0, 5.0);
  t.update(4, {3, 3}, 80.0, 20.0);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.find(4)->pos, (Position{3, 3}));
  EXPECT_TRUE(t.live(4, 49.0));
  EXPECT_EQ(t.refreshes(), 2u);
}

TEST(SelectRoute, Examples) {
  const RouteEntry only{0, 3, 2, 40.0, 1, 0};
  EXPECT_EQ(select_route(std::vector<RouteEntry>{only}).next_hop, 3u);

  const std::vector<RouteEntry> energy{{0, 3, 2, 40.0, 1, 0}, {0, 5, 4, 90.0, 1, 0}};
  EXPECT_EQ(select_route(energy).next_hop, 5u);

  const std::vector<RouteEntry> hops{{0, 3, 3, 60.0, 1, 0}, {0, 5, 2, 60.0, 1, 0}};
  EXPECT_EQ(select_route(hops).next_hop, 5u);

  const std::vector<RouteEntry> ids{{0, 8, 2, 60.0, 1, 0}, {0, 6, 2, 60.0, 1, 0}};
  EXPECT_EQ(select_route(ids).next_hop, 6u);

  EXPECT_THROW(select_route(std::vector<RouteEntry>{}), DomainError);
}

// The chosen route depends only on the order of bottleneck energies.
TEST(SelectRoute, InvariantUnderPositiveScaling) {
  RngStream rng(31, "test");
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<RouteEntry> c;
    const auto n = rng.uniform_int(1, 8);
    for (int i = 0; i < n; ++i) {
      c.push_back({0, static_cast<NodeId>(rng.uniform_int(1, 50)),
                   static_cast<std::uint32_t>(rng.uniform_int(1, 6)),
                   static_cast<double>(rng.uniform_int(1, 5)) * 10.0, 1, 0});
    }
    const double k = rng.uniform(0.01, 100);
    auto scaled = c;
    for (auto& e : scaled) e.bottleneck_energy *= k;
    const auto a = select_route(c);
    const auto b = select_route(scaled);
    ASSERT_EQ(a.next_hop, b.next_hop);
    ASSERT_EQ(a.hop_count, b.hop_count);
    // And it matches an exhaustive lexicographic sort.
    auto sorted = c;
    std::sort(sorted.begin(), sorted.end(), [](const RouteEntry& x, const RouteEntry& y) {
      if (x.bottleneck_energy != y.bottleneck_energy) return x.bottleneck_energy > y.bottleneck_energy;
      if (x.hop_count != y.hop_count) return x.hop_count < y.hop_count;
      return x.next_hop < y.next_hop;
    });
    ASSERT_EQ(a.next_hop, sorted.front().next_hop);
    ASSERT_EQ(a.bottleneck_energy, sorted.front().bottleneck_energy);
  }
}

TEST(RouteTable, LookupHonoursExpiry) {
  RouteTable t;
  t.install({0, 3, 2, 50.0, 1, 10.0});
  EXPECT_TRUE(t.lookup(0, 10.0));
  EXPECT_FALSE(t.lookup(0, 10.5));
  t.refresh(0, 20.0);
  EXPECT_TRUE(t.lookup(0, 15.0));
}

TEST(RouteTable, OfferPrefersFresherThenBetter) {
  RouteTable t;
  EXPECT_TRUE(t.offer({0, 3, 2, 50.0, 5, 100.0}, 0.0));
  EXPECT_FALSE(t.offer({0, 4, 1, 90.0, 4, 100.0}, 0.0));  // older sequence
  EXPECT_FALSE(t.offer({0, 4, 2, 40.0, 5, 100.0}, 0.0));  // same freshness, worse
  EXPECT_TRUE(t.offer({0, 4, 2, 60.0, 5, 100.0}, 0.0));   // same freshness, better
  EXPECT_TRUE(t.offer({0, 7, 6, 10.0, 6, 100.0}, 0.0));   // fresher wins outright
  EXPECT_EQ(t.lookup(0, 0.0)->next_hop, 7u);
  // An expired entry never blocks a new one.
  RouteTable u;
  u.install({0, 3, 2, 50.0, 9, 1.0});
  EXPECT_TRUE(u.offer({0, 4, 2, 10.0, 1, 100.0}, 2.0));
}

TEST(RouteTable, BreakTouchesOnlyRoutesThroughThatHop) {
  RouteTable t;
  t.install({10, 3, 2, 50.0, 1, 100.0});
  t.install({11, 4, 3, 50.0, 1, 100.0});
  t.install({12, 3, 1, 50.0, 1, 100.0});
  const auto gone = t.invalidate_via(3);
  EXPECT_EQ(gone, (std::vector<NodeId>{10, 12}));
  ASSERT_TRUE(t.lookup(11, 0.0));
  EXPECT_EQ(t.lookup(11, 0.0)->next_hop, 4u);
  EXPECT_TRUE(t.invalidate_via(99).empty());
}

TEST(RreqCache, ForwardOncePerOriginAndId) {
  RreqCache c;
  EXPECT_TRUE(c.first_seen(1, 7));
  EXPECT_FALSE(c.first_seen(1, 7));
  EXPECT_TRUE(c.first_seen(1, 8));
  EXPECT_TRUE(c.first_seen(2, 7));
  EXPECT_TRUE(c.seen(2, 7));
  EXPECT_EQ(c.size(), 3u);
}
