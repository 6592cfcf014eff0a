#pragma once

// Per-step trajectory record and its CSV form.
//
// CSV layout: `#`-prefixed metadata lines, then the header
//   t,xi_0..xi_{d-1},ref_0..ref_{d-1},u_0..u_{d-1},udist,eps_0..eps_{d-1}
// and one row per step, numbers printed with 9 significant digits.

#include <cstddef>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pma/controller.hpp"
#include "pma/disturbance.hpp"
#include "pma/dynamics.hpp"
#include "pma/reference.hpp"
#include "pma/state.hpp"

namespace pma {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string format_vector(const StateVector &v, char sep = ';') {
  std::string s;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (i) s += sep;
    s += format_number(v[i]);
  }
  return s;
}

struct TrajectoryRow {
  double t = 0.0;
  StateVector xi;
  StateVector ref;
  StateVector u;
  /// Scalar disturbance emitted at this step, before the component mask.
  double udist = 0.0;
  StateVector eps;
};

struct LogWarning {
  std::size_t step;
  std::string message;
};

struct RunFault {
  std::size_t step;
  std::optional<std::size_t> channel;
  std::string message;
};

struct RunMetadata {
  std::string run_kind;
  std::vector<PmaGains> gains; // empty for open-loop runs
  Composition composition = Composition::Product;
  VectorFieldModel model;
  IntegratorConfig integrator;
  ReferenceSpec reference;
  DisturbanceProfile disturbance;
  StateVector xi0;
};

struct TrajectoryLog {
  RunMetadata meta;
  std::vector<TrajectoryRow> rows;
  std::vector<LogWarning> warnings;
  std::optional<RunFault> fault;

  std::size_t dim() const noexcept { return meta.xi0.dim(); }
  bool complete() const noexcept {
    return !fault && rows.size() == meta.integrator.step_count() + 1;
  }
};

inline std::string trajectory_header(std::size_t d) {
  std::string h = "t";
  for (const char *prefix : {"xi_", "ref_", "u_"})
    for (std::size_t i = 0; i < d; ++i) h += "," + std::string(prefix) + std::to_string(i);
  h += ",udist";
  for (std::size_t i = 0; i < d; ++i) h += ",eps_" + std::to_string(i);
  return h;
}

inline void write_metadata(std::ostream &os, const RunMetadata &m) {
  os << "# run_kind=" << m.run_kind << '\n';
  os << "# model kind=" << to_string(m.model.kind) << " rate=" << format_number(m.model.rate)
     << " attractor=" << format_vector(m.model.attractor);
  if (m.model.kind == FieldKind::BiasedLinearSink) os << " bias=" << format_vector(m.model.bias);
  if (m.model.kind == FieldKind::NonlinearSwirl) os << " swirl=" << format_number(m.model.swirl);
  os << '\n';
  for (std::size_t i = 0; i < m.gains.size(); ++i) {
    const auto &g = m.gains[i];
    os << "# gains";
    if (m.gains.size() > 1) os << " channel=" << i;
    os << " kp=" << format_number(g.kp) << " ki=" << format_number(g.ki)
       << " k_alpha=" << format_number(g.k_alpha) << " k_beta=" << format_number(g.k_beta)
       << '\n';
  }
  if (!m.gains.empty() && m.composition == Composition::Additive)
    os << "# composition=additive\n";
  os << "# integrator h=" << format_number(m.integrator.h)
     << " mu=" << format_number(m.integrator.mu)
     << " t_final=" << format_number(m.integrator.t_final) << '\n';
  os << "# reference kind=" << to_string(m.reference.kind)
     << " rate=" << format_number(m.reference.rate)
     << " target=" << format_vector(m.reference.target) << '\n';
  os << "# xi0=" << format_vector(m.xi0) << '\n';
  os << "# disturbance kind=" << to_string(m.disturbance.kind);
  if (m.disturbance.kind != DisturbanceKind::None) {
    os << " t_alpha=" << format_number(m.disturbance.t_alpha)
       << " t_beta=" << format_number(m.disturbance.t_beta)
       << " seed=" << format_number(m.disturbance.seed);
    if (m.disturbance.kind == DisturbanceKind::LinearRecursive)
      os << " increment=" << format_number(m.disturbance.increment);
    os << " components=";
    if (m.disturbance.components.empty()) {
      os << "all";
    } else {
      for (std::size_t i = 0; i < m.disturbance.components.size(); ++i)
        os << (i ? ";" : "") << m.disturbance.components[i];
    }
  }
  os << '\n';
}

inline void write_trajectory_csv(std::ostream &os, const TrajectoryLog &log) {
  write_metadata(os, log.meta);
  for (const auto &w : log.warnings) os << "# warning step=" << w.step << ' ' << w.message << '\n';
  if (log.fault) {
    os << "# fault step=" << log.fault->step;
    if (log.fault->channel) os << " channel=" << *log.fault->channel;
    os << ' ' << log.fault->message << '\n';
  }
  const std::size_t d = log.dim();
  os << trajectory_header(d) << '\n';
  for (const auto &r : log.rows) {
    os << format_number(r.t);
    for (const StateVector *v : {&r.xi, &r.ref, &r.u})
      for (double x : *v) os << ',' << format_number(x);
    os << ',' << format_number(r.udist);
    for (double x : r.eps) os << ',' << format_number(x);
    os << '\n';
  }
}

/// Result of re-reading a trajectory CSV. Each row holds the numeric fields
/// in header order.
struct ParsedTrajectory {
  std::vector<std::string> comments;
  std::size_t dim = 0;
  std::vector<std::vector<double>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Parses a trajectory CSV, enforcing the documented header and column count.
inline ParsedTrajectory read_trajectory_csv(std::istream &is) {
  ParsedTrajectory out;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!have_header && !line.empty() && line[0] == '#') {
      out.comments.push_back(line.substr(1));
      continue;
    }
    if (!have_header) {
      const auto cols = split_csv_line(line);
      if (cols.size() < 6 || (cols.size() - 2) % 4 != 0)
        throw ConfigError("trajectory csv: malformed header");
      out.dim = (cols.size() - 2) / 4;
      if (line != trajectory_header(out.dim))
        throw ConfigError("trajectory csv: header does not match schema");
      have_header = true;
      continue;
    }
    const auto cols = split_csv_line(line);
    if (cols.size() != 4 * out.dim + 2)
      throw ConfigError("trajectory csv: wrong column count on line " + std::to_string(line_no));
    std::vector<double> row;
    row.reserve(cols.size());
    for (const auto &c : cols) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != c.size() || c.empty())
        throw ConfigError("trajectory csv: bad number '" + c + "' on line " +
                          std::to_string(line_no));
      row.push_back(v);
    }
    out.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError("trajectory csv: missing header");
  return out;
}

} // namespace pma
