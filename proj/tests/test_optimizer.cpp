#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "pma/optimizer.hpp"

using namespace pma;

namespace {

constexpr std::array<double, 4> kCenter{0.37, -1.2, 2.5, 0.05};

double quadratic(const std::array<double, 4> &x) {
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += (x[i] - kCenter[i]) * (x[i] - kCenter[i]);
  return s;
}

std::array<ParameterRange, 4> quadratic_box() {
  return {ParameterRange{-2, 2, 1.5, 0.5}, ParameterRange{-3, 3, 0.0, 1.0},
          ParameterRange{0, 5, 0.1, 1.0}, ParameterRange{-1, 1, -0.9, 0.25}};
}

} // namespace

TEST(PatternSearch, ConvergesOnSeparableQuadratic) {
  const double tol = 1e-4;
  const auto r = pattern_search<4>(quadratic_box(), quadratic, 100000, tol);
  EXPECT_EQ(r.termination, Termination::MeshTolerance);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(std::abs(r.best[i] - kCenter[i]), 2 * tol);
}

TEST(PatternSearch, HistoryInvariants) {
  const auto box = quadratic_box();
  const auto r = pattern_search<4>(box, quadratic, 300, 1e-6);
  ASSERT_EQ(r.history.size(), r.evaluations);
  EXPECT_LE(r.evaluations, 300u);
  double best = r.history.front().value;
  double min_seen = best;
  for (std::size_t k = 0; k < r.history.size(); ++k) {
    const auto &h = r.history[k];
    EXPECT_EQ(h.index, k);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_GE(h.x[i], box[i].lower);
      EXPECT_LE(h.x[i], box[i].upper);
    }
    min_seen = std::min(min_seen, h.value);
    EXPECT_LE(min_seen, best);
    best = min_seen;
  }
  EXPECT_EQ(r.best_value, min_seen);
}

TEST(PatternSearch, BudgetOfOneReturnsInitialPoint) {
  const auto r = pattern_search<4>(quadratic_box(), quadratic, 1, 1e-3);
  EXPECT_EQ(r.evaluations, 1u);
  EXPECT_EQ(r.termination, Termination::Budget);
  const std::array<double, 4> start{1.5, 0.0, 0.1, -0.9};
  EXPECT_EQ(r.best, start);
  EXPECT_EQ(r.best_value, quadratic(start));
}

TEST(PatternSearch, MoreBudgetNeverWorse) {
  for (std::size_t n : {1u, 5u, 17u, 40u, 100u}) {
    const auto a = pattern_search<4>(quadratic_box(), quadratic, n, 1e-6);
    const auto b = pattern_search<4>(quadratic_box(), quadratic, 2 * n, 1e-6);
    EXPECT_GE(a.best_value, b.best_value);
  }
}

TEST(PatternSearch, ClampsToBounds) {
  // optimum outside the box: the search must stop on the boundary
  std::array<ParameterRange, 1> box{ParameterRange{0, 1, 0.5, 0.4}};
  const auto r = pattern_search<1>(box, [](const std::array<double, 1> &x) { return (x[0] - 3) * (x[0] - 3); },
                                   1000, 1e-6);
  EXPECT_EQ(r.best[0], 1.0);
  for (const auto &h : r.history) EXPECT_LE(h.x[0], 1.0);
}

TEST(PatternSearch, LogScaledPolling) {
  std::array<ParameterRange, 1> box{ParameterRange{1e-3, 1e2, 1.0, 1.0, true}};
  const auto r = pattern_search<1>(
      box, [](const std::array<double, 1> &x) { return std::pow(std::log10(x[0]) - 1.3, 2); }, 1000, 1e-5);
  EXPECT_NEAR(std::log10(r.best[0]), 1.3, 2e-5);
  EXPECT_DOUBLE_EQ(r.history[1].x[0], 10.0);
}

TEST(PatternSearch, InvalidSpaceRejected) {
  auto box = quadratic_box();
  box[0].initial = 7.0;
  EXPECT_THROW(pattern_search<4>(box, quadratic, 10, 1e-3), ConfigError);
  box = quadratic_box();
  box[1].mesh = 100.0;
  EXPECT_THROW(pattern_search<4>(box, quadratic, 10, 1e-3), ConfigError);
  EXPECT_THROW(pattern_search<4>(quadratic_box(), quadratic, 0, 1e-3), ConfigError);
  EXPECT_THROW(pattern_search<4>(quadratic_box(), quadratic, 10, 0.0), ConfigError);

  SearchSpace space;
  space.kp.lower = 0.0;
  EXPECT_THROW(space.validate(), ConfigError);
}

TEST(PatternSearch, DeterministicReport) {
  auto run = [] {
    std::ostringstream os;
    write_search_csv<4>(os, pattern_search<4>(quadratic_box(), quadratic, 500, 1e-5),
                        {"a", "b", "c", "d"});
    return os.str();
  };
  const std::string first = run();
  EXPECT_EQ(first, run());
  EXPECT_EQ(first.rfind("# best a=", 0), 0u);
}

TEST(EvaluateObjective, AtRestScenarioNearZero) {
  Scenario s;
  s.model = linear_sink({0.5, -0.5}, 1.0);
  s.reference = {ReferenceKind::Hold, {0.5, -0.5}, 1.0};
  s.integrator = {0.01, 1.0, 4.0};
  s.xi0 = {0.5, -0.5};
  for (const PmaGains &g : {PmaGains{1, 1, 1, 0}, PmaGains{50, 0.01, -3, 0.5}, PmaGains{0.01, 80, 9, 1}})
    EXPECT_LT(evaluate_objective(g, s), 1e-12);
}

TEST(EvaluateObjective, DivergentCornerPenalized) {
  const Scenario s = default_scenario();
  EXPECT_EQ(evaluate_objective({100, 100, 10, 0}, s), kFaultPenalty);
  EXPECT_EQ(evaluate_objective({100, 100, -10, 1}, s), kFaultPenalty);
}

TEST(EvaluateObjective, Deterministic) {
  const Scenario s = default_scenario();
  const PmaGains g{1.7, 0.9, 0.8, 0.02};
  EXPECT_EQ(evaluate_objective(g, s), evaluate_objective(g, s));
}

TEST(DirectSearch, ImprovesDefaultScenario) {
  const Scenario s = default_scenario();
  const SearchSpace space;
  const auto report = direct_search(space, s, 400, 1e-3);
  EXPECT_EQ(report.history.size(), report.evaluations);
  EXPECT_LT(report.best_ise, report.history.front().value);
  double min_seen = report.history.front().value;
  for (const auto &h : report.history) min_seen = std::min(min_seen, h.value);
  EXPECT_EQ(report.best_ise, min_seen);
  EXPECT_EQ(report.best_ise, evaluate_objective(report.best_params, s));
}
