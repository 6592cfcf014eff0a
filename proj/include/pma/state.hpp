#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pma {

/// Raised for invalid inputs or configurations (dimension mismatch, bad
/// bounds, malformed config files).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a quantity in a run becomes NaN or infinite.
///
/// `step` is the control step at which the fault was detected (0 when the
/// caller did not supply one) and `channel` the offending component, if known.
class FaultError : public std::runtime_error {
public:
  FaultError(const std::string &what, std::size_t step,
             std::optional<std::size_t> channel = std::nullopt)
      : std::runtime_error(what), step_(step), channel_(channel) {}

  std::size_t step() const noexcept { return step_; }
  std::optional<std::size_t> channel() const noexcept { return channel_; }

private:
  std::size_t step_;
  std::optional<std::size_t> channel_;
};

/// Robot configuration xi in R^d. The dimension is fixed at construction.
class StateVector {
public:
  StateVector() = default;
  explicit StateVector(std::size_t dim, double fill = 0.0) : c_(dim, fill) {}
  StateVector(std::initializer_list<double> values) : c_(values) {}
  explicit StateVector(std::vector<double> values) : c_(std::move(values)) {}

  std::size_t dim() const noexcept { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  double &operator[](std::size_t i) { return c_[i]; }

  auto begin() const noexcept { return c_.begin(); }
  auto end() const noexcept { return c_.end(); }
  auto begin() noexcept { return c_.begin(); }
  auto end() noexcept { return c_.end(); }

  const std::vector<double> &components() const noexcept { return c_; }

  bool all_finite() const noexcept {
    return std::all_of(c_.begin(), c_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const StateVector &, const StateVector &) = default;

private:
  std::vector<double> c_;
};

inline void require_same_dim(const StateVector &a, const StateVector &b,
                             const char *what) {
  if (a.dim() != b.dim()) {
    throw ConfigError(std::string(what) + ": dimension mismatch (" +
                      std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()) + ")");
  }
}

inline StateVector operator-(const StateVector &a, const StateVector &b) {
  require_same_dim(a, b, "subtract");
  StateVector r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline StateVector operator+(const StateVector &a, const StateVector &b) {
  require_same_dim(a, b, "add");
  StateVector r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline StateVector operator*(double s, const StateVector &a) {
  StateVector r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = s * a[i];
  return r;
}

inline double squared_norm(const StateVector &a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm(const StateVector &a) { return std::sqrt(squared_norm(a)); }

} // namespace pma
