#include <wsnsim/energy.hpp>
#include <wsnsim/sim_core.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wsnsim;

TEST(Energy, OneReceive) {
  EnergyLedger l;
  ASSERT_TRUE(charge_packet(l, Direction::Rx, std::nullopt));
  EXPECT_EQ(l.n_rx, 1.0);
  EXPECT_DOUBLE_EQ(consumed(l), l.e_rxn);
}

TEST(Energy, TransmitFeedsDistanceNormalisedSum) {
  EnergyLedger l;
  l.e_txn = 0.3e-3;
  ASSERT_TRUE(charge_packet(l, Direction::Tx, 10.0));
  EXPECT_EQ(l.n_tx, 1.0);
  EXPECT_DOUBLE_EQ(l.tx_dist_sum, 3e-5);
  EXPECT_DOUBLE_EQ(remaining_distance_normalized(l), 3e-5);
  EXPECT_THROW(charge_packet(l, Direction::Tx, std::nullopt), DomainError);
  EXPECT_THROW(charge_packet(l, Direction::Tx, 0.0), DomainError);
}

TEST(Energy, IdleAndSleepAccrual) {
  EnergyLedger a;
  accrue_state(a, RadioState::Idle, 10.0);
  EXPECT_NEAR(consumed(a), 10e-3, 1e-15);
  EnergyLedger b;
  accrue_state(b, RadioState::Sleep, 50.0);
  EXPECT_NEAR(consumed(b), 0.05e-3, 1e-15);
  EnergyLedger c;
  accrue_state(c, RadioState::Idle, 0.0);
  EXPECT_EQ(consumed(c), 0.0);
  EXPECT_THROW(accrue_state(c, RadioState::Idle, -1.0), DomainError);
  EXPECT_THROW(accrue_state(c, RadioState::Tx, 1.0), DomainError);
}

TEST(Energy, ConsumedWorkedExample) {
  EnergyLedger l;
  l.e_rxn = 0.2e-3;
  l.e_txn = 0.3e-3;
  l.p_i = 1e-3;
  l.p_s = 1e-6;
  for (int i = 0; i < 10; ++i) charge_packet(l, Direction::Rx, std::nullopt);
  for (int i = 0; i < 5; ++i) charge_packet(l, Direction::Tx, 20.0);
  accrue_state(l, RadioState::Idle, 10.0);
  accrue_state(l, RadioState::Sleep, 50.0);
  EXPECT_NEAR(consumed(l), 13.55e-3, 1e-15);
  EXPECT_NEAR(remaining(l), 99.98645, 1e-12);
  // With no transmissions the normalised sum is consumption minus the tx term.
  EnergyLedger q = l;
  q.n_tx = 0;
  q.tx_dist_sum = 0;
  EXPECT_DOUBLE_EQ(remaining_distance_normalized(q), consumed(q));

  EnergyLedger d = l;
  d.n_rx *= 2;
  d.n_tx *= 2;
  d.t_i *= 2;
  d.t_s *= 2;
  EXPECT_NEAR(consumed(d), 2 * consumed(l), 1e-15);
}

TEST(Energy, FreshLedgerAndZeroActivity) {
  EnergyLedger l = EnergyLedger::from(EnergyParams{});
  EXPECT_EQ(remaining(l), 100.0);
  EXPECT_EQ(consumed(l), 0.0);
}

TEST(Energy, ExhaustionKillsAndDeadNodesIgnoreActivity) {
  EnergyLedger l;
  l.e0 = 0.01;
  const double booked = accrue_state(l, RadioState::Idle, 100.0);
  EXPECT_NEAR(booked, 10.0, 1e-9);
  EXPECT_TRUE(l.dead);
  EXPECT_LE(consumed(l), l.e0);
  EXPECT_GE(remaining(l), 0.0);
  const double before = consumed(l);
  EXPECT_FALSE(charge_packet(l, Direction::Rx, std::nullopt));
  EXPECT_EQ(l.dead_activity, 1u);
  EXPECT_EQ(consumed(l), before);
}

TEST(Energy, UnaffordableFrameKillsWithoutCharge) {
  EnergyLedger l;
  l.e0 = 0.1e-3;
  EXPECT_FALSE(charge_packet(l, Direction::Tx, 5.0));
  EXPECT_TRUE(l.dead);
  EXPECT_EQ(l.n_tx, 0.0);
}

// Random activity: conservation, monotone residual and agreement with the
// closed form at every step.
TEST(Energy, ConservationAndMonotonicityProperty) {
  RngStream rng(12, "test");
  for (int trial = 0; trial < 200; ++trial) {
    EnergyLedger l;
    l.e0 = rng.uniform(0.001, 0.05);
    double last = remaining(l);
    for (int step = 0; step < 400; ++step) {
      const auto op = rng.uniform_int(0, 3);
      switch (op) {
        case 0: charge_packet(l, Direction::Tx, rng.uniform(1, 35), rng.uniform(0.01, 1)); break;
        case 1: charge_packet(l, Direction::Rx, std::nullopt, rng.uniform(0.01, 1)); break;
        case 2: accrue_state(l, RadioState::Idle, rng.uniform(0, 2)); break;
        default: accrue_state(l, RadioState::Sleep, rng.uniform(0, 20)); break;
      }
      const double r = remaining(l);
      ASSERT_LE(r, last);
      ASSERT_EQ(r, l.e0 - consumed(l));
      ASSERT_LE(std::fabs(r + consumed(l) - l.e0), std::nextafter(l.e0, 1e300) - l.e0);
      ASSERT_LT(oracle::rel_err(consumed(l), oracle::consumed(l.e_rxn, l.n_rx, l.e_txn, l.n_tx, l.p_i,
                                                              l.t_i, l.p_s, l.t_s)),
                1e-12);
      if (l.dead) {
        ASSERT_LE(consumed(l), l.e0);
      }
      last = r;
    }
  }
}
