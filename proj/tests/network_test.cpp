#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "memsnn/network.hpp"

using namespace memsnn;

namespace {

MemristorParams calibrated() {
  MemristorParams p;
  const auto k = calibrate_rates(SpikeShape{}, p.v_p, p.v_n, 0.2e-6, 1e-6);
  p.k_p = k.k_p;
  p.k_n = k.k_n;
  return p;
}

}  // namespace

TEST(InitWeights, GaussianStatistics) {
  const MemristorParams p;
  const auto xb = init_weights(64, 4, 1, 8.5e-9, 4e-9, p);
  double sum = 0.0;
  for (const auto& c : xb.cells()) {
    EXPECT_GE(c.g, p.g_min);
    EXPECT_LE(c.g, p.g_max);
    sum += c.g;
  }
  const double mean = sum / 256.0;
  EXPECT_NEAR(mean, 8.5e-9, 3.0 * 4e-9 / 16.0);
}

TEST(InitWeights, DegenerateAndDeterministic) {
  const MemristorParams p;
  const auto flat = init_weights(8, 3, 5, 8.5e-9, 0.0, p);
  for (const auto& c : flat.cells()) EXPECT_EQ(c.g, 8.5e-9);
  EXPECT_TRUE(init_weights(64, 4, 42, 8.5e-9, 4e-9, p) == init_weights(64, 4, 42, 8.5e-9, 4e-9, p));
  EXPECT_FALSE(init_weights(64, 4, 42, 8.5e-9, 4e-9, p) == init_weights(64, 4, 43, 8.5e-9, 4e-9, p));
  EXPECT_THROW(init_weights(2, 2, 1, 0.0, 1e-9, p), Error);
}

TEST(SummedCurrent, OhmsLaw) {
  Crossbar xb(4, 2, MemristorParams{}, 50e-6);
  std::vector<double> v(4, 0.0);
  EXPECT_EQ(summed_current(xb, v, 0), 0.0);
  v[2] = 0.14;
  EXPECT_NEAR(summed_current(xb, v, 1), 7e-6, 1e-18);
  EXPECT_THROW(summed_current(xb, std::vector<double>(3, 0.0), 0), Error);
}

TEST(SummedCurrent, Superposition) {
  auto xb = init_weights(16, 3, 9, 20e-6, 5e-6, MemristorParams{});
  std::vector<double> a(16, 0.0), b(16, 0.0), ab(16, 0.0);
  for (std::size_t i = 0; i < 16; ++i) {
    a[i] = (i % 3 == 0) ? 0.14 : 0.0;
    b[i] = (i % 5 == 1) ? -0.02 : 0.0;
    ab[i] = a[i] + b[i];
  }
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_NEAR(summed_current(xb, ab, n), summed_current(xb, a, n) + summed_current(xb, b, n), 1e-18);
  }
}

TEST(Plasticity, SilenceAndSingleSpikeLeaveWeightsUntouched) {
  const auto p = calibrated();
  auto xb = init_weights(4, 2, 3, 10e-6, 1e-6, p);
  const auto before = xb;
  apply_plasticity(xb, std::vector<double>(4, 0.0), std::vector<double>(2, 0.0), 1e-6);
  EXPECT_TRUE(xb == before);
  apply_plasticity(xb, std::vector<double>(4, 0.14), std::vector<double>(2, 0.0), 1e-6);
  EXPECT_TRUE(xb == before);
}

TEST(Plasticity, OverlapPotentiatesAtKpRate) {
  const auto p = calibrated();
  Crossbar xb(2, 2, p, 10e-6);
  std::vector<double> pre{-0.03, 0.0};
  std::vector<double> post{0.14, 0.0};
  apply_plasticity(xb, pre, post, 1e-6);
  EXPECT_NEAR(xb.g(0, 0) - 10e-6, p.k_p * 0.01 * 1e-6, 1e-15);
  EXPECT_EQ(xb.g(1, 0), 10e-6 + 0.0);  // v_net = 0.14, below v_p
  EXPECT_EQ(xb.g(0, 1), 10e-6);        // v_net = +0.03
  EXPECT_EQ(xb.g(1, 1), 10e-6);
}

TEST(WtaBus, GrantSuppressAndBypass) {
  WtaBus bus;
  EXPECT_EQ(request_fire(bus, 2, 1e-6, true), FireDecision::Granted);
  EXPECT_TRUE(bus.asserted());
  EXPECT_EQ(bus.owner, 2u);
  EXPECT_EQ(bus.since, 1e-6);
  EXPECT_EQ(request_fire(bus, 0, 1.1e-6, true), FireDecision::Suppressed);
  EXPECT_EQ(bus.owner, 2u);
  EXPECT_EQ(request_fire(bus, 0, 1.1e-6, false), FireDecision::Granted);
  EXPECT_EQ(bus.owner, 2u);
}

TEST(WtaBus, SameStepArbitration) {
  std::vector<FireCandidate> c{{0, 0.001}, {3, 0.004}, {1, 0.002}};
  EXPECT_EQ(arbitrate(c), std::optional<std::size_t>(3));
  std::vector<FireCandidate> tie{{2, 0.004}, {1, 0.004}, {3, 0.004}};
  EXPECT_EQ(arbitrate(tie), std::optional<std::size_t>(1));
  EXPECT_EQ(arbitrate(std::vector<FireCandidate>{}), std::nullopt);
}

TEST(WtaBus, BroadcastResetAfterDelay) {
  WtaBus bus;
  std::vector<NeuronState> n(4);
  for (auto& s : n) s.v_mem = 0.2;
  request_fire(bus, 1, 10e-6, true);
  n[1] = begin_fire(n[1], 10e-6);
  EXPECT_EQ(broadcast_reset(bus, n, 10e-6 + 40e-9), 0u);
  EXPECT_EQ(n[0].v_mem, 0.2);
  EXPECT_EQ(broadcast_reset(bus, n, 10e-6 + 50e-9), 3u);
  EXPECT_EQ(n[0].v_mem, 0.0);
  EXPECT_EQ(n[2].v_mem, 0.0);
  EXPECT_EQ(n[3].v_mem, 0.0);
  EXPECT_EQ(n[1].mode, NeuronMode::Fire);
}

TEST(WtaBus, ZeroDelayResetsImmediately) {
  WtaBus bus;
  bus.delay = 0.0;
  std::vector<NeuronState> n(2);
  n[0].v_mem = 0.1;
  request_fire(bus, 1, 3e-6, true);
  EXPECT_EQ(broadcast_reset(bus, n, 3e-6), 1u);
  EXPECT_EQ(n[0].v_mem, 0.0);
}

TEST(WtaBus, ResetOnIdleBusIsAContractViolation) {
  WtaBus bus;
  std::vector<NeuronState> n(2);
  EXPECT_THROW(broadcast_reset(bus, n, 0.0), Error);
}

TEST(WtaBus, Release) {
  const SpikeShape shape;
  WtaBus bus;
  release_bus(bus, 0.0, shape);
  EXPECT_FALSE(bus.asserted());
  request_fire(bus, 0, 1e-6, true);
  EXPECT_THROW(release_bus(bus, 4e-6, shape), Error);
  release_bus(bus, 5e-6, shape);
  EXPECT_FALSE(bus.asserted());
}

TEST(WeightsIo, RoundTripIsExact) {
  const auto xb = init_weights(64, 4, 11, 8.5e-9, 4e-9, MemristorParams{});
  std::istringstream is(weights_to_string(xb));
  const auto back = read_weights(is, MemristorParams{});
  EXPECT_TRUE(back == xb);
  EXPECT_EQ(weights_to_string(back), weights_to_string(xb));
}

TEST(WeightsIo, ParseErrors) {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return read_weights(is, MemristorParams{});
  };
  auto category = [&](const std::string& text) {
    try {
      parse(text);
    } catch (const Error& e) {
      return e.category();
    }
    return ErrorCategory::Config;
  };
  EXPECT_EQ(category("x y\n"), ErrorCategory::Parse);
  EXPECT_EQ(category("2 1\n1e-9\n"), ErrorCategory::Parse);
  EXPECT_EQ(category("1 2\n1e-9 abc\n"), ErrorCategory::Parse);
  EXPECT_EQ(category("1 1\n-1e-9\n"), ErrorCategory::Parse);
  EXPECT_EQ(category("1 1\n1e-9 2e-9\n"), ErrorCategory::Parse);
  EXPECT_EQ(parse("1 2\n1e-9 2e-9\n").g(0, 1), 2e-9);
}
