#pragma once

// Closed-loop orchestration: reference, controller, disturbance and
// integrator, plus the ISE metric and disturbance-rejection metrics.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pma/controller.hpp"
#include "pma/disturbance.hpp"
#include "pma/dynamics.hpp"
#include "pma/reference.hpp"
#include "pma/state.hpp"
#include "pma/trajectory.hpp"

namespace pma {

/// Everything a closed-loop run needs apart from the gains.
struct Scenario {
  VectorFieldModel model;
  ReferenceSpec reference;
  DisturbanceProfile disturbance;
  IntegratorConfig integrator;
  StateVector xi0;

  void validate() const {
    model.validate();
    reference.validate();
    integrator.validate();
    require_same_dim(model.attractor, xi0, "scenario: xi0");
    require_same_dim(model.attractor, reference.target, "scenario: reference target");
    if (!xi0.all_finite()) throw ConfigError("scenario: xi0 must be finite");
    disturbance.validate(xi0.dim());
  }
};

/// Default 2-D scenario: a biased sink whose open-loop endpoint misses the
/// target, tracked along an exponential approach from the origin.
inline Scenario default_scenario() {
  Scenario s;
  s.model = biased_linear_sink({1.0, 0.8}, 1.0, {-0.5, 0.3});
  s.reference = {ReferenceKind::ExpApproach, {1.0, 0.8}, 0.5};
  s.integrator = {};
  s.xi0 = StateVector(2, 0.0);
  return s;
}

struct RunOptions {
  bool controller_enabled = true;
  Composition composition = Composition::Product;
};

namespace detail {

inline TrajectoryRow initial_row(const Scenario &s) {
  TrajectoryRow row;
  row.t = 0.0;
  row.xi = s.xi0;
  row.ref = reference_at(s.reference, 0.0, s.xi0);
  row.u = StateVector(s.xi0.dim());
  row.eps = row.ref - row.xi;
  return row;
}

} // namespace detail

/// Runs the closed loop for k = 1..K. On a numeric fault the log keeps every
/// row computed so far and `fault` records the failing step.
inline TrajectoryLog run_closed_loop(const Scenario &scenario, std::span<const PmaGains> gains,
                                     const RunOptions &options = {}) {
  scenario.validate();
  if (gains.size() != 1 && gains.size() != scenario.xi0.dim())
    throw ConfigError("run_closed_loop: gains must be shared or per channel");
  for (const auto &g : gains) g.validate();

  const IntegratorConfig &cfg = scenario.integrator;
  const std::size_t d = scenario.xi0.dim();
  const std::size_t steps = cfg.step_count();
  const StateVector mask = scenario.disturbance.mask(d);

  TrajectoryLog log;
  log.meta = {options.controller_enabled ? "closed-loop" : "closed-loop-uncontrolled",
              std::vector<PmaGains>(gains.begin(), gains.end()),
              options.composition,
              scenario.model,
              cfg,
              scenario.reference,
              scenario.disturbance,
              scenario.xi0};
  log.rows.reserve(steps + 1);
  log.rows.push_back(detail::initial_row(scenario));

  std::vector<PmaState> ctrl(d, reset(gains[0]));
  DisturbanceState dist_state;

  for (std::size_t k = 1; k <= steps; ++k) {
    const TrajectoryRow &prev = log.rows.back();
    const double t_k = cfg.time_at(k);
    try {
      StateVector u(d);
      if (options.controller_enabled) {
        auto c = pma_step_vector(ctrl, gains, prev.xi, prev.ref, cfg.h, options.composition);
        u = std::move(c.u);
        ctrl = std::move(c.next);
      }

      const auto dist = disturbance_step(scenario.disturbance, t_k, dist_state);
      dist_state = dist.next;
      if (dist.guarded)
        log.warnings.push_back({k, "log-recursive disturbance guard: previous value <= 0, emitted 0"});

      const StateVector f = eval_field(scenario.model, prev.xi);
      StateVector xi_dot(d);
      for (std::size_t i = 0; i < d; ++i) xi_dot[i] = f[i] + u[i] + mask[i] * dist.value;

      TrajectoryRow row;
      row.t = t_k;
      row.xi = euler_step(prev.xi, xi_dot, cfg, k);
      row.ref = reference_at(scenario.reference, t_k, scenario.xi0);
      row.u = std::move(u);
      row.udist = dist.value;
      row.eps = row.ref - row.xi;
      log.rows.push_back(std::move(row));
    } catch (const FaultError &e) {
      log.fault = RunFault{k, e.channel(), e.what()};
      break;
    }
  }
  return log;
}

inline TrajectoryLog run_closed_loop(const Scenario &scenario, const PmaGains &gains,
                                     const RunOptions &options = {}) {
  return run_closed_loop(scenario, std::span<const PmaGains>(&gains, 1), options);
}

/// Uncontrolled run (u = 0). The reference defaults to holding the model
/// attractor and only feeds the ref/eps columns of the log.
inline TrajectoryLog run_open_loop(const VectorFieldModel &model, const StateVector &xi0,
                                   const IntegratorConfig &cfg,
                                   std::optional<ReferenceSpec> reference = std::nullopt) {
  Scenario s;
  s.model = model;
  s.reference = reference.value_or(ReferenceSpec{ReferenceKind::Hold, model.attractor, 1.0});
  s.integrator = cfg;
  s.xi0 = xi0;
  s.validate();

  const std::size_t d = xi0.dim();
  const std::size_t steps = cfg.step_count();
  TrajectoryLog log;
  log.meta = {"open-loop", {}, Composition::Product, model, cfg, s.reference, {}, xi0};
  log.rows.reserve(steps + 1);
  log.rows.push_back(detail::initial_row(s));

  for (std::size_t k = 1; k <= steps; ++k) {
    const TrajectoryRow &prev = log.rows.back();
    try {
      TrajectoryRow row;
      row.t = cfg.time_at(k);
      row.xi = euler_step(prev.xi, eval_field(model, prev.xi), cfg, k);
      row.ref = reference_at(s.reference, row.t, xi0);
      row.u = StateVector(d);
      row.eps = row.ref - row.xi;
      log.rows.push_back(std::move(row));
    } catch (const FaultError &e) {
      log.fault = RunFault{k, e.channel(), e.what()};
      break;
    }
  }
  return log;
}

/// Integral square error, left Riemann sum h * sum_{k<K} |xi_k - xi*_k|^2.
inline double ise(const TrajectoryLog &log) {
  if (log.fault) throw ConfigError("ise: log ended in a fault");
  if (log.rows.size() < 2) throw ConfigError("ise: log needs at least two rows");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) sum += squared_norm(log.rows[k].eps);
  return log.meta.integrator.h * sum;
}

struct RejectionMetrics {
  double peak_error = 0.0;
  /// Absolute time at which the error is back inside the pre-disturbance
  /// band for good; t_beta if it never left, +inf if it never returns.
  double recovery_time = 0.0;
  double band = 0.0;
};

/// Length of the pre-disturbance window used to measure the error band.
inline constexpr double kBaselineWindow = 0.5;

inline RejectionMetrics rejection_metrics(const TrajectoryLog &log,
                                          const DisturbanceProfile &profile) {
  if (log.rows.empty()) throw ConfigError("rejection_metrics: empty log");
  const double t_end = log.rows.back().t;
  if (!(profile.t_alpha >= 0.0) || !(profile.t_beta <= t_end) ||
      !(profile.t_alpha < profile.t_beta))
    throw ConfigError("rejection_metrics: disturbance window outside the logged range");

  constexpr double slack = 1e-12;
  RejectionMetrics m;
  for (const auto &r : log.rows) {
    const double e = norm(r.eps);
    if (r.t >= profile.t_alpha - kBaselineWindow - slack && r.t <= profile.t_alpha + slack)
      m.band = std::max(m.band, e);
    if (r.t > profile.t_alpha) m.peak_error = std::max(m.peak_error, e);
  }

  std::optional<std::size_t> last_out;
  for (std::size_t k = 0; k < log.rows.size(); ++k)
    if (log.rows[k].t > profile.t_beta && norm(log.rows[k].eps) > m.band) last_out = k;

  if (!last_out)
    m.recovery_time = profile.t_beta;
  else if (*last_out + 1 < log.rows.size())
    m.recovery_time = log.rows[*last_out + 1].t;
  else
    m.recovery_time = std::numeric_limits<double>::infinity();
  return m;
}

} // namespace pma
