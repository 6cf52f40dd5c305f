#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "memsnn/device.hpp"
#include "oracles.hpp"

using namespace memsnn;

namespace {

// Frozen from oracle::brute_flux at 1 ns for the default shape and
// thresholds (0.16 V, 0.15 V): the potentiating overlap is a 1 us triangle of
// height 10 mV, the depressing one a 1 us trapezoid from 20 mV to 10 mV.
constexpr double kFluxPot1us = 5e-9;
constexpr double kFluxDep1us = 1.5e-8;

MemristorParams calibrated() {
  MemristorParams p;
  const auto k = calibrate_rates(SpikeShape{}, p.v_p, p.v_n, 0.2e-6, 1e-6);
  p.k_p = k.k_p;
  p.k_n = k.k_n;
  return p;
}

}  // namespace

TEST(StepConductance, BelowThresholdIsExactlyZero) {
  MemristorParams p;
  MemristorState s{10e-6};
  for (double dt : {1e-9, 1e-6, 1.0}) {
    EXPECT_EQ(step_conductance(s, p, 0.14, dt).g, s.g);
    EXPECT_EQ(step_conductance(s, p, -0.14, dt).g, s.g);
  }
}

TEST(StepConductance, SaturatesAtGmax) {
  MemristorParams p;
  MemristorState s{p.g_max};
  EXPECT_EQ(step_conductance(s, p, 0.2, 1e-6).g, p.g_max);
  MemristorState low{p.g_min};
  EXPECT_EQ(step_conductance(low, p, -0.5, 1.0).g, p.g_min);
}

TEST(StepConductance, OverdriveArithmetic) {
  MemristorParams p;
  p.k_p = 40.0;
  MemristorState s{10e-6};
  // 40 S/(V s) * 10 mV * 1 us = 0.4 uS
  EXPECT_NEAR(step_conductance(s, p, 0.17, 1e-6).g - s.g, 0.4e-6, 1e-15);
}

TEST(StepConductance, RejectsNonFiniteInput) {
  MemristorParams p;
  MemristorState s;
  EXPECT_THROW(step_conductance(s, p, std::nan(""), 1e-9), Error);
  EXPECT_THROW(step_conductance(s, p, 0.2, std::numeric_limits<double>::infinity()), Error);
  EXPECT_THROW(step_conductance(s, p, 0.2, 0.0), Error);
}

TEST(Calibration, OracleFluxMatchesFrozenValues) {
  const auto pos = oracle::brute_flux(0.16, 0.15, SpikeShape{}, 1e-6);
  const auto neg = oracle::brute_flux(0.16, 0.15, SpikeShape{}, -1e-6);
  EXPECT_NEAR(pos.pot, kFluxPot1us, 1e-13);
  EXPECT_NEAR(neg.dep, kFluxDep1us, 1e-13);
  EXPECT_EQ(pos.dep, 0.0);
  EXPECT_EQ(neg.pot, 0.0);
}

TEST(Calibration, ClosedFormFluxMatchesFrozenValues) {
  EXPECT_NEAR(overdrive_flux(0.16, 0.15, SpikeShape{}, 1e-6).potentiation, kFluxPot1us, 1e-18);
  EXPECT_NEAR(overdrive_flux(0.16, 0.15, SpikeShape{}, -1e-6).depression, kFluxDep1us, 1e-18);
}

TEST(Calibration, DefaultRates) {
  const auto k = calibrate_rates(SpikeShape{}, 0.16, 0.15, 0.2e-6, 1e-6);
  EXPECT_NEAR(k.k_p, 0.2e-6 / kFluxPot1us, 1e-9);  // 40
  EXPECT_NEAR(k.k_n, 0.2e-6 / kFluxDep1us, 1e-9);  // 13.33
  EXPECT_NEAR(k.k_p, 40.0, 1e-9);
  EXPECT_NEAR(k.k_n, 13.333333333, 1e-8);
}

TEST(Calibration, ImpossibleWithoutOverThresholdFlux) {
  SpikeShape weak;
  weak.va_plus = 0.10;
  weak.va_minus = 0.03;  // 0.13 < v_p
  try {
    calibrate_rates(weak, 0.16, 0.15, 0.2e-6, 1e-6);
    FAIL() << "expected calibration failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::CalibrationImpossible);
  }
}

TEST(PairDelta, AnchorsAtPlusMinusOneMicrosecond) {
  const auto p = calibrated();
  EXPECT_NEAR(pair_delta(p, SpikeShape{}, 1e-6), 0.2e-6, 0.2e-6 * 0.02);
  EXPECT_NEAR(pair_delta(p, SpikeShape{}, -1e-6), -0.2e-6, 0.2e-6 * 0.02);
}

TEST(PairDelta, DisjointSpikesDoNothing) {
  const auto p = calibrated();
  EXPECT_EQ(pair_delta(p, SpikeShape{}, 10e-6), 0.0);
  EXPECT_EQ(pair_delta(p, SpikeShape{}, -10e-6), 0.0);
}

TEST(StdpWindow, Examples) {
  const auto p = calibrated();
  const std::vector<double> grid{1e-6, -1e-6, 5e-6, -5e-6, 0.0};
  const auto w = stdp_window(p, SpikeShape{}, grid);
  ASSERT_EQ(w.size(), 5u);
  EXPECT_NEAR(w[0].delta_g, 0.2e-6, 1e-12);
  EXPECT_NEAR(w[1].delta_g, -0.2e-6, 1e-12);
  EXPECT_EQ(w[2].delta_g, 0.0);
  EXPECT_EQ(w[3].delta_g, 0.0);
  EXPECT_EQ(w[4].delta_g, 0.0);
  EXPECT_THROW(stdp_window(p, SpikeShape{}, std::vector<double>{}), Error);
}

TEST(StdpWindow, CsvFormat) {
  const auto p = calibrated();
  std::vector<double> grid{-1e-6, 1e-6};
  std::ostringstream os;
  write_window_csv(os, stdp_window(p, SpikeShape{}, grid));
  EXPECT_EQ(os.str(), "delta_t_s,delta_g_s\n-1.000000000e-06,-2.000000000e-07\n1.000000000e-06,2.000000000e-07\n");
}

// Random feasible shapes: closed form agrees with the 1 ns oracle everywhere,
// and the window has the expected support and sign structure.
TEST(PairDeltaProperty, ClosedFormMatchesQuadratureOnRandomShapes) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    SpikeShape s;
    s.tail_plus = (0.5 + 1.5 * u(rng)) * 1e-6;
    s.tail_minus = (1.0 + 3.0 * u(rng)) * 1e-6;
    const double v_n = 0.10 + 0.10 * u(rng);
    const double v_p = v_n * (1.0 + 0.3 * u(rng));
    s.va_plus = std::min(v_p, v_n) * (0.6 + 0.35 * u(rng));
    s.va_minus = std::min(v_p, v_n) * 0.9 * u(rng) + 1e-3;
    if (!stdp_feasible(v_p, v_n, s).feasible) continue;
    MemristorParams p;
    p.v_p = v_p;
    p.v_n = v_n;
    p.k_p = 10.0 + 50.0 * u(rng);
    p.k_n = 10.0 + 50.0 * u(rng);
    for (double dt_us = -6.0; dt_us <= 6.0; dt_us += 0.37) {
      const double dt = dt_us * 1e-6;
      const double closed = pair_delta(p, s, dt);
      const double brute = oracle::brute_pair_delta(p, s, dt);
      EXPECT_NEAR(closed, brute, 0.01 * std::abs(brute) + 1e-15) << "trial " << trial << " dt " << dt;
      if (std::abs(dt) >= s.duration()) {
        EXPECT_EQ(closed, 0.0);
      }
      if (closed != 0.0) {
        EXPECT_EQ(closed > 0.0, dt > 0.0);
      }
    }
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(PairDeltaProperty, SingleSpikeNeverDisturbs) {
  // A lone spike against a resting far node, integrated step by step.
  const auto p = calibrated();
  const SpikeShape s;
  for (double sign : {1.0, -1.0}) {
    MemristorState g{10e-6};
    for (int k = 0; k < 5000; ++k) {
      const double t = (k + 0.5) * 1e-9;
      g = step_conductance(g, p, sign * spike_value(s, t), 1e-9);
    }
    EXPECT_EQ(g.g, 10e-6);
  }
}

TEST(PairDeltaProperty, ClampingHoldsForRandomDrive) {
  const auto p = calibrated();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  MemristorState g{50e-6};
  for (int k = 0; k < 20000; ++k) {
    g = step_conductance(g, p, v(rng), 1e-6);
    ASSERT_GE(g.g, p.g_min);
    ASSERT_LE(g.g, p.g_max);
  }
}

TEST(BehavioralDelta, LimitsAndDecay) {
  BehavioralStdpParams bp{0.5, -0.4, 3e-6, 2e-6};
  EXPECT_NEAR(behavioral_delta(bp, 1e-15), 0.5, 1e-9);
  EXPECT_NEAR(behavioral_delta(bp, 3e-6), 0.5 / std::exp(1.0), 1e-15);
  EXPECT_NEAR(behavioral_delta(bp, -2e-6), -0.4 / std::exp(1.0), 1e-15);
  EXPECT_EQ(behavioral_delta(bp, 0.0), 0.0);
}

TEST(BehavioralDelta, MagnitudeStrictlyDecreasesAwayFromZero) {
  BehavioralStdpParams bp{1.0, -1.2, 3e-6, 3e-6};
  double prev_pos = 2.0, prev_neg = 2.0;
  for (int k = 1; k < 100; ++k) {
    const double dt = k * 0.1e-6;
    EXPECT_LT(std::abs(behavioral_delta(bp, dt)), prev_pos);
    EXPECT_LT(std::abs(behavioral_delta(bp, -dt)), prev_neg);
    prev_pos = std::abs(behavioral_delta(bp, dt));
    prev_neg = std::abs(behavioral_delta(bp, -dt));
  }
}

TEST(BehavioralCalibration, MatchesDeviceAtAnchor) {
  const auto p = calibrated();
  const auto c = calibrate_behavioral(p, SpikeShape{}, 1e-6);
  EXPECT_NEAR(c.siemens_per_unit * behavioral_delta(c.params, 1e-6), pair_delta(p, SpikeShape{}, 1e-6), 1e-18);
  EXPECT_NEAR(c.siemens_per_unit * behavioral_delta(c.params, -1e-6), pair_delta(p, SpikeShape{}, -1e-6), 1e-18);
  EXPECT_EQ(c.params.tau_plus, 3e-6);
}

TEST(Feasibility, PublishedParameterSet) {
  const auto v = stdp_feasible(0.16, 0.15, SpikeShape{});
  EXPECT_TRUE(v.feasible);
  EXPECT_TRUE(v.reasons.empty());
}

TEST(Feasibility, UnbalancedThresholds) {
  const auto v = stdp_feasible(1.5, 0.5, SpikeShape{});
  EXPECT_FALSE(v.feasible);
  EXPECT_FALSE(v.thresholds_balanced);
  ASSERT_FALSE(v.reasons.empty());
  EXPECT_EQ(v.reasons.front().substr(0, 3), "(a)");
}

TEST(Feasibility, EqualThresholds) {
  SpikeShape s;
  s.va_plus = 0.14;
  s.va_minus = 0.03;
  // (a) 0 < 0.15, (b) 0.14 < 0.15, (c) 0.17 > 0.15
  EXPECT_TRUE(stdp_feasible(0.15, 0.15, s).feasible);
}
