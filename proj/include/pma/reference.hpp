#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

#include "pma/state.hpp"

namespace pma {

enum class ReferenceKind { ExpApproach, LineRamp, Hold };

inline std::string_view to_string(ReferenceKind k) {
  switch (k) {
  case ReferenceKind::ExpApproach: return "exp-approach";
  case ReferenceKind::LineRamp: return "line-ramp";
  case ReferenceKind::Hold: return "hold";
  }
  return "?";
}

/// Reference trajectory xi*(t) from the start xi0 towards `target`.
/// `rate` is the time constant for ExpApproach and the ramp duration for
/// LineRamp; Hold ignores it.
struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::ExpApproach;
  StateVector target;
  double rate = 0.5;

  void validate() const {
    if (target.dim() == 0) throw ConfigError("reference: target must have dimension >= 1");
    if (!target.all_finite()) throw ConfigError("reference: target must be finite");
    if (kind != ReferenceKind::Hold && (!(rate > 0.0) || !std::isfinite(rate)))
      throw ConfigError("reference: rate must be > 0");
  }
};

inline StateVector reference_at(const ReferenceSpec &spec, double t,
                                const StateVector &xi0) {
  require_same_dim(spec.target, xi0, "reference_at");
  const std::size_t d = xi0.dim();
  StateVector out(d);
  switch (spec.kind) {
  case ReferenceKind::ExpApproach: {
    const double decay = std::exp(-t / spec.rate);
    for (std::size_t i = 0; i < d; ++i)
      out[i] = spec.target[i] + (xi0[i] - spec.target[i]) * decay;
    break;
  }
  case ReferenceKind::LineRamp: {
    const double s = std::clamp(t / spec.rate, 0.0, 1.0);
    for (std::size_t i = 0; i < d; ++i)
      out[i] = xi0[i] + (spec.target[i] - xi0[i]) * s;
    break;
  }
  case ReferenceKind::Hold:
    out = spec.target;
    break;
  }
  return out;
}

} // namespace pma
