#pragma once

// Windowed recursive disturbance injected into the state derivative.
//
// Inside the open window (t_alpha, t_beta) the emitted value follows
//   LinearRecursive: u_k = increment + u_{k-1}
//   LogRecursive:    u_k = ln(u_{k-1})
// where u_{k-1} is the seed on the first in-window step. Outside the window
// the emission is exactly 0.

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "pma/state.hpp"

namespace pma {

enum class DisturbanceKind { None, LinearRecursive, LogRecursive };

inline std::string_view to_string(DisturbanceKind k) {
  switch (k) {
  case DisturbanceKind::None: return "none";
  case DisturbanceKind::LinearRecursive: return "linear";
  case DisturbanceKind::LogRecursive: return "log";
  }
  return "?";
}

inline double default_seed(DisturbanceKind k) {
  return k == DisturbanceKind::LogRecursive ? 1.1 : 0.1;
}

struct DisturbanceProfile {
  DisturbanceKind kind = DisturbanceKind::None;
  double t_alpha = 1.74;
  double t_beta = 1.81;
  double seed = 0.1;
  double increment = 0.1;
  /// Components receiving the disturbance; empty means all of them.
  std::vector<std::size_t> components;

  bool in_window(double t) const noexcept { return t_alpha < t && t < t_beta; }

  void validate(std::size_t dim) const {
    if (!std::isfinite(t_alpha) || !std::isfinite(t_beta) || !(t_alpha < t_beta))
      throw ConfigError("disturbance: window requires t_alpha < t_beta");
    if (!std::isfinite(seed) || !std::isfinite(increment))
      throw ConfigError("disturbance: seed and increment must be finite");
    for (std::size_t c : components)
      if (c >= dim) throw ConfigError("disturbance: component index out of range");
  }

  /// 1.0 for disturbed components, 0.0 otherwise.
  StateVector mask(std::size_t dim) const {
    if (components.empty()) return StateVector(dim, 1.0);
    StateVector m(dim, 0.0);
    for (std::size_t c : components) m[c] = 1.0;
    return m;
  }
};

struct DisturbanceState {
  double prev = 0.0;
  bool entered = false;
};

struct DisturbanceSample {
  double value = 0.0;
  /// Set when LogRecursive met a non-positive previous value and emitted 0.
  bool guarded = false;
  DisturbanceState next;
};

inline DisturbanceSample disturbance_step(const DisturbanceProfile &profile, double t_k,
                                          DisturbanceState state) {
  if (profile.kind == DisturbanceKind::None || !profile.in_window(t_k))
    return {0.0, false, {0.0, state.entered}};

  const double prev = state.entered ? state.prev : profile.seed;
  DisturbanceSample out;
  if (profile.kind == DisturbanceKind::LinearRecursive) {
    out.value = profile.increment + prev;
  } else if (prev > 0.0) {
    out.value = std::log(prev);
  } else {
    out.guarded = true;
  }
  out.next = {out.value, true};
  return out;
}

} // namespace pma
