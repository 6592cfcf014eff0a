#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pma/controller.hpp"

using namespace pma;

namespace {

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

std::vector<double> run_outputs(const PmaGains &g, double dt, const std::vector<double> &y,
                                const std::vector<double> &yref) {
  PmaState s = reset(g);
  std::vector<double> u;
  for (std::size_t k = 0; k < y.size(); ++k) {
    auto r = pma_step(s, g, y[k], yref[k], dt);
    u.push_back(r.u);
    s = r.next;
  }
  return u;
}

} // namespace

TEST(InitFunction, Examples) {
  EXPECT_EQ(init_function({1, 1, 0.0, 0.7}, 3), 0.0);
  EXPECT_EQ(init_function({1, 1, 5.0, 0.0}, 100), 5.0);
  const double expected = static_cast<double>(2.0L * oracle::exp_series(-1.0L));
  EXPECT_NEAR(init_function({1, 1, 2.0, 0.1}, 10), expected, 1e-15);
  EXPECT_NEAR(expected, 0.73576, 5e-6);
}

TEST(Reset, ZeroMemory) {
  const PmaGains g{3, 4, 5, 6};
  const PmaState s = reset(g);
  EXPECT_EQ(s.integral_acc, 0.0);
  EXPECT_EQ(s.u_internal, 0.0);
  EXPECT_EQ(s.step_index, 1u);
  EXPECT_EQ(reset(g), reset(g));
  EXPECT_EQ(pma_step(s, g, 0.3, 1.7, 0.01).u, 0.0);
}

TEST(PmaStep, ZeroInitializationKeepsOutputZero) {
  const PmaGains g{1, 1, 0, 0};
  PmaState s = reset(g);
  const double expected_acc[] = {1, 2, 3};
  for (int k = 0; k < 3; ++k) {
    auto r = pma_step(s, g, 0.0, 1.0, 1.0);
    EXPECT_EQ(r.u, 0.0);
    EXPECT_EQ(r.next.u_internal, 0.0);
    EXPECT_EQ(r.next.integral_acc, expected_acc[k]);
    s = r.next;
  }
}

TEST(PmaStep, HandRecursion) {
  const PmaGains g{1, 1, 1, 0};
  PmaState s = reset(g);
  const double expected_u[] = {0, 2, 6};
  const double expected_ui[] = {1, 2, 3};
  for (int k = 0; k < 3; ++k) {
    auto r = pma_step(s, g, 0.0, 1.0, 1.0);
    EXPECT_EQ(r.u, expected_u[k]);
    EXPECT_EQ(r.next.u_internal, expected_ui[k]);
    EXPECT_EQ(r.next.step_index, static_cast<std::uint64_t>(k + 2));
    s = r.next;
  }
}

TEST(PmaStep, MatchesScriptedOracleOnRandomSequences) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const PmaGains g{0.1 + std::abs(u(rng)), 0.1 + std::abs(u(rng)), u(rng), std::abs(u(rng)) / 4};
    std::vector<double> y(50), yref(50);
    for (auto &v : y) v = u(rng);
    for (auto &v : yref) v = u(rng);
    const auto got = run_outputs(g, 0.01, y, yref);
    const auto want = oracle::scripted_outputs({g.kp, g.ki, g.k_alpha, g.k_beta}, 0.01, y, yref);
    for (std::size_t k = 0; k < got.size(); ++k)
      EXPECT_LT(std::abs(got[k] - want[k]), 1e-10 * (1.0 + std::abs(want[k]))) << "step " << k + 1;
  }
}

TEST(PmaStep, FaultsOnNonFinite) {
  const PmaGains g{1, 1, 1, 0};
  EXPECT_THROW(pma_step(reset(g), g, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.01), FaultError);
  PmaState s = reset(g);
  s.integral_acc = 1e300;
  s.u_internal = 1e300;
  EXPECT_THROW(pma_step(s, g, -1e300, 0.0, 0.01), FaultError);
  EXPECT_THROW(pma_step(reset(g), g, 0.0, 0.0, 0.0), ConfigError);
}

TEST(PmaStep, ZeroErrorHistoryGivesZeroOutput) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const PmaGains g{2.5, 0.7, 3.0, 0.05};
  PmaState s = reset(g);
  for (int k = 0; k < 200; ++k) {
    const double y = u(rng);
    auto r = pma_step(s, g, y, y, 0.01);
    EXPECT_EQ(r.u, 0.0);
    s = r.next;
  }
}

TEST(PmaStep, AccumulatorMatchesCompensatedSum) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PmaGains g{1.0, 0.8, 0.0, 0.0};
  const double dt = 0.01;
  const std::size_t n = 100000;
  PmaState s = reset(g);
  std::vector<double> eps;
  eps.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double y = 0.0, yref = u(rng);
    eps.push_back(yref - y);
    s = pma_step(s, g, y, yref, dt).next;
  }
  const double want = g.ki * dt * oracle::compensated_sum(eps);
  EXPECT_LT(rel_err(s.integral_acc, want), 1e-10);
}

TEST(PmaStep, InternalRecursionMatchesDirectSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PmaGains g{1.3, 0.4, 2.0, 0.01};
  PmaState s = reset(g);
  long double direct = 0.0L;
  for (std::size_t k = 1; k <= 1000; ++k) {
    const double y = u(rng);
    s = pma_step(s, g, y, 0.0, 0.01).next;
    direct += (long double)g.kp * ((long double)g.k_alpha * oracle::exp_series(-(long double)g.k_beta * k) - y);
    ASSERT_LT(rel_err(s.u_internal, static_cast<double>(direct)), 1e-12) << "step " << k;
  }
}

TEST(PmaStep, AccumulatorLinearInKi) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PmaGains g1{1.0, 0.3, 1.0, 0.1}, g2{1.0, 0.6, 1.0, 0.1};
  PmaState s1 = reset(g1), s2 = reset(g2);
  for (int k = 0; k < 500; ++k) {
    const double y = u(rng), yr = u(rng);
    s1 = pma_step(s1, g1, y, yr, 0.01).next;
    s2 = pma_step(s2, g2, y, yr, 0.01).next;
    EXPECT_EQ(s2.integral_acc, 2.0 * s1.integral_acc);
  }
}

TEST(PmaStep, AdditiveCompositionHook) {
  const PmaGains g{1, 1, 1, 0};
  auto r1 = pma_step(reset(g), g, 0.0, 1.0, 1.0, Composition::Additive);
  EXPECT_EQ(r1.u, 1.0); // 0 + 1
  auto r2 = pma_step(r1.next, g, 0.0, 1.0, 1.0, Composition::Additive);
  EXPECT_EQ(r2.u, 3.0); // 1 + 2
}

TEST(PmaStepVector, ReducesToScalar) {
  const PmaGains g{1.5, 0.5, 1.0, 0.2};
  std::vector<PmaState> states{reset(g)};
  PmaState s = reset(g);
  for (int k = 0; k < 20; ++k) {
    const double y = 0.1 * k, yr = 1.0;
    auto v = pma_step_vector(states, g, StateVector{y}, StateVector{yr}, 0.01);
    auto r = pma_step(s, g, y, yr, 0.01);
    EXPECT_EQ(v.u[0], r.u);
    EXPECT_EQ(v.next[0], r.next);
    states = v.next;
    s = r.next;
  }
}

TEST(PmaStepVector, SymmetryAndPermutation) {
  const PmaGains g{1.5, 0.5, 1.0, 0.2};
  std::vector<PmaState> states(2, reset(g));
  std::vector<PmaState> swapped(2, reset(g));
  std::vector<PmaState> mirrored(2, reset(g));
  for (int k = 0; k < 30; ++k) {
    const double a = std::sin(0.3 * k), b = std::cos(0.2 * k);
    auto same = pma_step_vector(mirrored, g, StateVector{a, a}, StateVector{1.0, 1.0}, 0.01);
    EXPECT_EQ(same.u[0], same.u[1]);
    mirrored = same.next;

    auto fwd = pma_step_vector(states, g, StateVector{a, b}, StateVector{1.0, -1.0}, 0.01);
    auto rev = pma_step_vector(swapped, g, StateVector{b, a}, StateVector{-1.0, 1.0}, 0.01);
    EXPECT_EQ(fwd.u[0], rev.u[1]);
    EXPECT_EQ(fwd.u[1], rev.u[0]);
    states = fwd.next;
    swapped = rev.next;
  }
}

TEST(PmaStepVector, PerChannelGainsAndErrors) {
  const std::vector<PmaGains> gains{{1, 1, 1, 0}, {2, 1, 1, 0}};
  std::vector<PmaState> states(2);
  auto r1 = pma_step_vector(states, gains, StateVector{0.0, 0.0}, StateVector{1.0, 1.0}, 1.0);
  auto r2 = pma_step_vector(r1.next, gains, StateVector{0.0, 0.0}, StateVector{1.0, 1.0}, 1.0);
  EXPECT_EQ(r2.u[0], 2.0);
  EXPECT_EQ(r2.u[1], 4.0);

  EXPECT_THROW(pma_step_vector(states, gains[0], StateVector{0.0}, StateVector{0.0}, 1.0), ConfigError);
  std::vector<PmaState> bad(2);
  bad[1].integral_acc = std::numeric_limits<double>::infinity();
  bad[1].u_internal = 1.0;
  try {
    pma_step_vector(bad, gains[0], StateVector{0.0, 0.0}, StateVector{0.0, 0.0}, 1.0);
    FAIL() << "expected a fault";
  } catch (const FaultError &e) {
    ASSERT_TRUE(e.channel().has_value());
    EXPECT_EQ(*e.channel(), 1u);
  }
}

TEST(PmaGains, Validation) {
  EXPECT_NO_THROW((PmaGains{1, 1, -3, -0.5}).validate());
  EXPECT_THROW((PmaGains{0, 1, 0, 0}).validate(), ConfigError);
  EXPECT_THROW((PmaGains{1, -1, 0, 0}).validate(), ConfigError);
}
