#pragma once

// Coordinate pattern search (compass search) for bound-constrained,
// derivative-free minimization, and its use for tuning the controller gains
// against the closed-loop ISE.
//
// Each iteration polls incumbent +/- mesh along every coordinate in a fixed
// order (coordinate 0 first, + before -) and moves to the first strictly
// improving point. When no poll point improves, every mesh is halved. The
// search stops once all meshes are below the tolerance or the evaluation
// budget is spent.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pma/controller.hpp"
#include "pma/simulation.hpp"
#include "pma/state.hpp"
#include "pma/trajectory.hpp"

namespace pma {

/// Bounds, start point and initial mesh for one decision variable. With
/// `log_scale` the mesh is measured in decades: a poll multiplies or divides
/// the value by 10^mesh.
struct ParameterRange {
  double lower = 0.0;
  double upper = 1.0;
  double initial = 0.5;
  double mesh = 0.1;
  bool log_scale = false;

  double span() const { return log_scale ? std::log10(upper / lower) : upper - lower; }

  void validate(std::string_view name) const {
    const std::string n(name);
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
      throw ConfigError(n + ": bounds must be finite with lower < upper");
    if (log_scale && !(lower > 0.0)) throw ConfigError(n + ": log-scaled range needs lower > 0");
    if (!(initial >= lower && initial <= upper))
      throw ConfigError(n + ": initial value outside bounds");
    if (!(mesh > 0.0) || !(mesh <= span()))
      throw ConfigError(n + ": mesh must be positive and no larger than the range");
  }

  double poll(double x, double direction, double m) const {
    const double v = log_scale ? x * std::pow(10.0, direction * m) : x + direction * m;
    return std::clamp(v, lower, upper);
  }
};

enum class Termination { MeshTolerance, Budget };

inline std::string_view to_string(Termination t) {
  return t == Termination::MeshTolerance ? "mesh-tolerance" : "budget";
}

template <std::size_t N> struct SearchRecord {
  std::size_t index;
  std::array<double, N> x;
  double value;
};

template <std::size_t N> struct SearchResult {
  std::array<double, N> best{};
  double best_value = 0.0;
  std::size_t evaluations = 0;
  std::vector<SearchRecord<N>> history;
  Termination termination = Termination::Budget;
};

template <std::size_t N, class Objective>
SearchResult<N> pattern_search(const std::array<ParameterRange, N> &ranges, Objective &&objective,
                               std::size_t budget, double mesh_tol) {
  if (budget < 1) throw ConfigError("pattern_search: budget must be >= 1");
  if (!(mesh_tol > 0.0)) throw ConfigError("pattern_search: mesh_tol must be > 0");
  for (std::size_t i = 0; i < N; ++i) ranges[i].validate("parameter " + std::to_string(i));

  SearchResult<N> r;
  std::array<double, N> mesh{};
  for (std::size_t i = 0; i < N; ++i) {
    r.best[i] = ranges[i].initial;
    mesh[i] = ranges[i].mesh;
  }
  auto evaluate = [&](const std::array<double, N> &x) {
    const double v = objective(x);
    r.history.push_back({r.evaluations++, x, v});
    return v;
  };
  r.best_value = evaluate(r.best);

  for (;;) {
    bool small = true;
    for (double m : mesh) small = small && m < mesh_tol;
    if (small) {
      r.termination = Termination::MeshTolerance;
      break;
    }

    bool improved = false;
    bool exhausted = false;
    for (std::size_t i = 0; i < N && !improved && !exhausted; ++i) {
      for (double dir : {+1.0, -1.0}) {
        std::array<double, N> cand = r.best;
        cand[i] = ranges[i].poll(r.best[i], dir, mesh[i]);
        if (cand[i] == r.best[i]) continue;
        if (r.evaluations >= budget) {
          exhausted = true;
          break;
        }
        const double v = evaluate(cand);
        if (v < r.best_value) {
          r.best = cand;
          r.best_value = v;
          improved = true;
          break;
        }
      }
    }
    if (exhausted) {
      r.termination = Termination::Budget;
      break;
    }
    if (!improved)
      for (double &m : mesh) m *= 0.5;
  }
  return r;
}

/// Writes the history as CSV (`evaluation,<names...>,value`) preceded by a
/// `#` summary line.
template <std::size_t N>
void write_search_csv(std::ostream &os, const SearchResult<N> &r,
                      const std::array<std::string_view, N> &names,
                      std::string_view value_name = "value") {
  os << "# best";
  for (std::size_t i = 0; i < N; ++i) os << ' ' << names[i] << '=' << format_number(r.best[i]);
  os << ' ' << value_name << '=' << format_number(r.best_value)
     << " evaluations=" << r.evaluations << " termination=" << to_string(r.termination) << '\n';
  os << "evaluation";
  for (auto n : names) os << ',' << n;
  os << ',' << value_name << '\n';
  for (const auto &h : r.history) {
    os << h.index;
    for (double x : h.x) os << ',' << format_number(x);
    os << ',' << format_number(h.value) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Gain tuning

struct SearchSpace {
  ParameterRange kp{1e-3, 1e2, 1.0, 0.5, true};
  ParameterRange ki{1e-3, 1e2, 1.0, 0.5, true};
  ParameterRange k_alpha{-10.0, 10.0, 1.0, 2.0, false};
  ParameterRange k_beta{0.0, 1.0, 0.1, 0.2, false};

  std::array<ParameterRange, 4> ranges() const { return {kp, ki, k_alpha, k_beta}; }

  void validate() const {
    kp.validate("kp");
    ki.validate("ki");
    k_alpha.validate("k_alpha");
    k_beta.validate("k_beta");
    if (!(kp.lower > 0.0) || !(ki.lower > 0.0))
      throw ConfigError("search space: kp and ki lower bounds must be > 0");
  }
};

inline constexpr std::array<std::string_view, 4> kGainNames{"kp", "ki", "k_alpha", "k_beta"};

inline PmaGains gains_from(const std::array<double, 4> &x) { return {x[0], x[1], x[2], x[3]}; }

/// Objective value assigned to runs that end in a numeric fault.
inline constexpr double kFaultPenalty = 1e12;

inline double evaluate_objective(const PmaGains &gains, const Scenario &scenario,
                                 const RunOptions &options = {}) {
  const TrajectoryLog log = run_closed_loop(scenario, gains, options);
  if (log.fault) return kFaultPenalty;
  const double v = ise(log);
  return std::isfinite(v) ? v : kFaultPenalty;
}

struct OptimizerReport {
  PmaGains best_params;
  double best_ise = 0.0;
  std::size_t evaluations = 0;
  std::vector<SearchRecord<4>> history;
  Termination termination = Termination::Budget;

  SearchResult<4> as_search_result() const {
    return {{best_params.kp, best_params.ki, best_params.k_alpha, best_params.k_beta},
            best_ise, evaluations, history, termination};
  }
};

inline OptimizerReport direct_search(const SearchSpace &space, const Scenario &scenario,
                                     std::size_t budget, double mesh_tol,
                                     const RunOptions &options = {}) {
  space.validate();
  scenario.validate();
  auto r = pattern_search<4>(
      space.ranges(),
      [&](const std::array<double, 4> &x) {
        return evaluate_objective(gains_from(x), scenario, options);
      },
      budget, mesh_tol);
  return {gains_from(r.best), r.best_value, r.evaluations, std::move(r.history), r.termination};
}

inline void write_report_csv(std::ostream &os, const OptimizerReport &report) {
  write_search_csv<4>(os, report.as_search_result(), kGainNames, "ise");
}

} // namespace pma
