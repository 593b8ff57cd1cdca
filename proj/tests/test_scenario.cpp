#include <wsnsim/scenario.hpp>

#include <gtest/gtest.h>

using namespace wsnsim;

TEST(Scenario, EmptyTextGivesDefaults) {
  const Scenario s = parse_scenario("");
  EXPECT_EQ(s.nodes, 50u);
  EXPECT_EQ(s.region.side, 250.0);
  EXPECT_EQ(s.sink_position(), (Position{125, 125}));
  EXPECT_EQ(s.sim_time_s, 100.0);
  EXPECT_EQ(s.mac.queue_len, 100u);
  EXPECT_EQ(s.energy.e0_j, 100.0);
  EXPECT_EQ(s.radio.range_m, 35.0);
  EXPECT_EQ(s.mobility.v_max, 5.0);
  EXPECT_EQ(s.mep.threshold_m, 5.0);
  EXPECT_EQ(s.beaconing, Beaconing::Adaptive);
  EXPECT_EQ(s.mode, Mode::Hybrid);
  EXPECT_EQ(s.replications, 5u);
  EXPECT_TRUE(s.overrides.empty());
}

TEST(Scenario, SingleOverrideKeepsTheRest) {
  const Scenario s = parse_scenario("nodes = 40\n");
  EXPECT_EQ(s.nodes, 40u);
  EXPECT_EQ(s.sim_time_s, 100.0);
  ASSERT_EQ(s.overrides.size(), 1u);
  EXPECT_EQ(s.overrides[0].first, "nodes");
}

TEST(Scenario, CommentsAndBlankLines) {
  const Scenario s = parse_scenario("# header\n\n  nodes = 30   # trailing\nmode=aodv_only\n");
  EXPECT_EQ(s.nodes, 30u);
  EXPECT_EQ(s.mode, Mode::AodvOnly);
}

TEST(Scenario, NegativeNodesNamesKeyAndLine) {
  try {
    parse_scenario("# c\nnodes = -3\n");
    FAIL() << "expected an error";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.key(), "nodes");
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("nodes"), std::string::npos);
  }
}

TEST(Scenario, UnknownKeyAndBadValuesRejected) {
  EXPECT_THROW(parse_scenario("colour = blue"), ScenarioError);
  EXPECT_THROW(parse_scenario("nodes = many"), ScenarioError);
  EXPECT_THROW(parse_scenario("nodes 40"), ScenarioError);
  EXPECT_THROW(parse_scenario("mode = fastest"), ScenarioError);
  EXPECT_THROW(parse_scenario("mobility.v_max = 7"), ScenarioError);
}

TEST(Scenario, CrossFieldInvariants) {
  EXPECT_THROW(parse_scenario("mobility.v_min = 4\nmobility.v_max = 2"), ScenarioError);
  EXPECT_THROW(parse_scenario("radio.cs_range_m = 20"), ScenarioError);
  EXPECT_THROW(parse_scenario("cluster.t2_s = 30"), ScenarioError);
  EXPECT_THROW(parse_scenario("nodes = 5\ntraffic.sources = 10"), ScenarioError);
  EXPECT_THROW(parse_scenario("sink.x = 400"), ScenarioError);
}

TEST(Scenario, UnitConversions) {
  const Scenario s = parse_scenario("energy.e_txn_mj = 0.5\nenergy.p_sleep_uw = 2\nroute.rrep_window_ms = 80");
  EXPECT_DOUBLE_EQ(s.energy.e_txn_j, 0.5e-3);
  EXPECT_DOUBLE_EQ(s.energy.p_sleep_w, 2e-6);
  EXPECT_DOUBLE_EQ(s.route.rrep_window_s, 0.08);
}

TEST(Scenario, PrintedScenarioParsesBackIdentically) {
  Scenario s = parse_scenario("nodes = 77\nbeaconing.mode = periodic\ncluster.pin_vr = 0.95\n");
  const std::string text = print_scenario(s);
  const Scenario back = parse_scenario(text);
  EXPECT_EQ(print_scenario(back), text);
  EXPECT_EQ(back.nodes, 77u);
  EXPECT_EQ(back.beaconing, Beaconing::Periodic);
  ASSERT_TRUE(back.cluster.pin_vr.has_value());
  EXPECT_DOUBLE_EQ(*back.cluster.pin_vr, 0.95);
}

TEST(Scenario, EveryKeyAppearsInDefaults) {
  const std::string text = print_scenario(Scenario{});
  for (const auto& k : scenario_keys()) {
    EXPECT_NE(text.find(k.name + " = "), std::string::npos) << k.name;
  }
}
