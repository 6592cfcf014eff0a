#pragma once

// Discrete para-model controller.
//
// For step k >= 1, with tracking error eps_{k-1} = y*_{k-1} - y_{k-1}:
//
//   u^i_k = u^i_{k-1} + kp * (k_alpha * exp(-k_beta * k) - y_{k-1})
//   u_k   = I_{k-1} * u^i_k
//   I_k   = I_{k-1} + ki * eps_{k-1} * dt          (left Riemann sum)
//
// The integral factor used at step k never contains the error read at step k,
// so the first output after a reset is always zero.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pma/state.hpp"

namespace pma {

struct PmaGains {
  double kp = 1.0;
  double ki = 1.0;
  double k_alpha = 1.0;
  double k_beta = 0.1;

  void validate() const {
    if (!(kp > 0.0) || !std::isfinite(kp)) throw ConfigError("gains: kp must be > 0");
    if (!(ki > 0.0) || !std::isfinite(ki)) throw ConfigError("gains: ki must be > 0");
    if (!std::isfinite(k_alpha)) throw ConfigError("gains: k_alpha must be finite");
    if (!std::isfinite(k_beta)) throw ConfigError("gains: k_beta must be finite");
  }

  friend bool operator==(const PmaGains &, const PmaGains &) = default;
};

/// How the integral factor and the internal recursion are combined.
/// Product is the controller law; Additive (u = I + u^i) is an experiment
/// hook and never selected implicitly.
enum class Composition { Product, Additive };

struct PmaState {
  double integral_acc = 0.0;
  double u_internal = 0.0;
  std::uint64_t step_index = 1;

  friend bool operator==(const PmaState &, const PmaState &) = default;
};

inline PmaState reset(const PmaGains & /*gains*/) { return PmaState{}; }

/// k_alpha * exp(-k_beta * k)
inline double init_function(const PmaGains &gains, std::uint64_t k) {
  return gains.k_alpha * std::exp(-gains.k_beta * static_cast<double>(k));
}

struct PmaStepResult {
  double u;
  PmaState next;
};

inline PmaStepResult pma_step(const PmaState &state, const PmaGains &gains,
                              double y_prev, double y_ref_prev, double dt,
                              Composition composition = Composition::Product) {
  if (!(dt > 0.0)) throw ConfigError("pma_step: dt must be > 0");
  if (!std::isfinite(y_prev) || !std::isfinite(y_ref_prev))
    throw FaultError("pma_step: non-finite measurement", state.step_index);

  const double eps = y_ref_prev - y_prev;
  const double u_internal =
      state.u_internal + gains.kp * (init_function(gains, state.step_index) - y_prev);
  const double u = composition == Composition::Product
                       ? state.integral_acc * u_internal
                       : state.integral_acc + u_internal;
  if (!std::isfinite(u) || !std::isfinite(u_internal))
    throw FaultError("pma_step: non-finite controller output at step " +
                         std::to_string(state.step_index),
                     state.step_index);

  PmaState next;
  next.integral_acc = state.integral_acc + gains.ki * eps * dt;
  next.u_internal = u_internal;
  next.step_index = state.step_index + 1;
  return {u, next};
}

struct PmaVectorResult {
  StateVector u;
  std::vector<PmaState> next;
};

/// Applies pma_step independently per channel. `gains` holds either one
/// entry shared by every channel or one entry per channel.
inline PmaVectorResult pma_step_vector(std::span<const PmaState> states,
                                       std::span<const PmaGains> gains,
                                       const StateVector &xi_prev,
                                       const StateVector &xi_ref_prev, double dt,
                                       Composition composition = Composition::Product) {
  const std::size_t d = xi_prev.dim();
  require_same_dim(xi_prev, xi_ref_prev, "pma_step_vector");
  if (states.size() != d)
    throw ConfigError("pma_step_vector: expected " + std::to_string(d) +
                      " controller states, got " + std::to_string(states.size()));
  if (gains.size() != 1 && gains.size() != d)
    throw ConfigError("pma_step_vector: gains must be shared or per channel");

  PmaVectorResult out{StateVector(d), std::vector<PmaState>(d)};
  for (std::size_t i = 0; i < d; ++i) {
    const PmaGains &g = gains.size() == 1 ? gains[0] : gains[i];
    try {
      auto r = pma_step(states[i], g, xi_prev[i], xi_ref_prev[i], dt, composition);
      out.u[i] = r.u;
      out.next[i] = r.next;
    } catch (const FaultError &e) {
      throw FaultError(std::string(e.what()) + " (channel " + std::to_string(i) + ")",
                       e.step(), i);
    }
  }
  return out;
}

inline PmaVectorResult pma_step_vector(std::span<const PmaState> states,
                                       const PmaGains &gains,
                                       const StateVector &xi_prev,
                                       const StateVector &xi_ref_prev, double dt,
                                       Composition composition = Composition::Product) {
  return pma_step_vector(states, std::span<const PmaGains>(&gains, 1), xi_prev,
                         xi_ref_prev, dt, composition);
}

} // namespace pma
