#pragma once

// Autonomous vector fields standing in for the estimated robot-motion
// function, and the fixed-step damped Euler integrator
//
//   xi_{k+1} = mu * xi_k + h * xi_dot
//
// which reduces to plain forward Euler for mu = 1.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "pma/state.hpp"

namespace pma {

enum class FieldKind { LinearSink, BiasedLinearSink, NonlinearSwirl };

inline std::string_view to_string(FieldKind k) {
  switch (k) {
  case FieldKind::LinearSink: return "linear-sink";
  case FieldKind::BiasedLinearSink: return "biased-linear-sink";
  case FieldKind::NonlinearSwirl: return "nonlinear-swirl";
  }
  return "?";
}

/// f(xi) = rate * (attractor - xi) [+ bias] [+ swirl * R(xi - attractor)]
///
/// R rotates the first two coordinates by -90 degrees, (x, y) -> (y, -x), and
/// is the identity on any further coordinates. `bias` is only read for
/// BiasedLinearSink and `swirl` only for NonlinearSwirl.
struct VectorFieldModel {
  FieldKind kind = FieldKind::LinearSink;
  StateVector attractor;
  double rate = 1.0;
  StateVector bias;
  double swirl = 0.0;

  std::size_t dim() const noexcept { return attractor.dim(); }

  void validate() const {
    if (attractor.dim() == 0) throw ConfigError("model: attractor must have dimension >= 1");
    if (!attractor.all_finite()) throw ConfigError("model: attractor must be finite");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("model: rate must be > 0");
    if (kind == FieldKind::BiasedLinearSink) {
      require_same_dim(attractor, bias, "model: bias");
      if (!bias.all_finite()) throw ConfigError("model: bias must be finite");
    }
    if (kind == FieldKind::NonlinearSwirl) {
      if (attractor.dim() < 2) throw ConfigError("model: nonlinear-swirl needs dimension >= 2");
      if (!std::isfinite(swirl)) throw ConfigError("model: swirl must be finite");
    }
  }
};

inline VectorFieldModel linear_sink(StateVector attractor, double rate) {
  return {FieldKind::LinearSink, std::move(attractor), rate, {}, 0.0};
}

inline VectorFieldModel biased_linear_sink(StateVector attractor, double rate,
                                           StateVector bias) {
  return {FieldKind::BiasedLinearSink, std::move(attractor), rate,
          std::move(bias), 0.0};
}

inline VectorFieldModel nonlinear_swirl(StateVector attractor, double rate,
                                        double swirl) {
  return {FieldKind::NonlinearSwirl, std::move(attractor), rate, {}, swirl};
}

inline StateVector eval_field(const VectorFieldModel &model,
                              const StateVector &xi) {
  require_same_dim(model.attractor, xi, "eval_field");
  if (!xi.all_finite()) throw FaultError("eval_field: non-finite state", 0);

  const std::size_t d = xi.dim();
  StateVector out(d);
  for (std::size_t i = 0; i < d; ++i)
    out[i] = model.rate * (model.attractor[i] - xi[i]);

  switch (model.kind) {
  case FieldKind::LinearSink:
    break;
  case FieldKind::BiasedLinearSink:
    for (std::size_t i = 0; i < d; ++i) out[i] += model.bias[i];
    break;
  case FieldKind::NonlinearSwirl: {
    const StateVector r = xi - model.attractor;
    out[0] += model.swirl * r[1];
    out[1] += model.swirl * -r[0];
    for (std::size_t i = 2; i < d; ++i) out[i] += model.swirl * r[i];
    break;
  }
  }
  return out;
}

/// Step size h, damping factor mu and horizon t_final (seconds).
struct IntegratorConfig {
  double h = 0.01;
  double mu = 0.99;
  double t_final = 4.0;

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("integrator: h must be > 0");
    if (!(t_final > 0.0) || !std::isfinite(t_final))
      throw ConfigError("integrator: t_final must be > 0");
    if (h > t_final) throw ConfigError("integrator: h must not exceed t_final");
    if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("integrator: mu must lie in [0, 1]");
  }

  /// K = floor(t_final / h). The quotient is nudged by a relative 1e-9 so
  /// that e.g. 0.3 / 0.1 yields 3 steps rather than 2.
  std::size_t step_count() const {
    const double q = t_final / h;
    return static_cast<std::size_t>(std::floor(q * (1.0 + 1e-9)));
  }

  /// t_k = k * h, never accumulated.
  double time_at(std::size_t k) const { return static_cast<double>(k) * h; }
};

inline StateVector euler_step(const StateVector &xi_k, const StateVector &xi_dot,
                              const IntegratorConfig &cfg, std::size_t step = 0) {
  require_same_dim(xi_k, xi_dot, "euler_step");
  StateVector next(xi_k.dim());
  for (std::size_t i = 0; i < xi_k.dim(); ++i) {
    next[i] = cfg.mu * xi_k[i] + cfg.h * xi_dot[i];
    if (!std::isfinite(next[i]))
      throw FaultError("euler_step: non-finite state at step " + std::to_string(step),
                       step, i);
  }
  return next;
}

} // namespace pma
