#pragma once

// Mode dispatch behind the `pma-reach` executable. Kept in the library so
// tests can drive it without spawning processes.

#include <cstddef>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>

#include "pma/config.hpp"
#include "pma/optimizer.hpp"
#include "pma/simulation.hpp"
#include "pma/trajectory.hpp"

namespace pma::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitFault = 2;

struct Streams {
  std::ostream &out = std::cout;
  std::ostream &err = std::cerr;
};

namespace detail {

inline void write_file(const std::string &path, const auto &writer) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  writer(f);
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

/// Per-axis time series (t, xi_i, ref_i) and, for d >= 2, the phase-plane
/// pairs of the first two coordinates.
inline void write_plot_data(const std::string &prefix, const TrajectoryLog &log) {
  const std::size_t d = log.dim();
  for (std::size_t i = 0; i < d; ++i) {
    write_file(prefix + "_axis" + std::to_string(i) + ".csv", [&](std::ostream &os) {
      os << "t,xi,ref\n";
      for (const auto &r : log.rows)
        os << format_number(r.t) << ',' << format_number(r.xi[i]) << ','
           << format_number(r.ref[i]) << '\n';
    });
  }
  if (d >= 2) {
    write_file(prefix + "_phase.csv", [&](std::ostream &os) {
      os << "xi_0,xi_1,ref_0,ref_1\n";
      for (const auto &r : log.rows)
        os << format_number(r.xi[0]) << ',' << format_number(r.xi[1]) << ','
           << format_number(r.ref[0]) << ',' << format_number(r.ref[1]) << '\n';
    });
  }
}

} // namespace detail

/// Executes the configured mode and writes `<prefix>_trajectory.csv`
/// (plus `<prefix>_history.csv` when optimizing). Returns 0 on success,
/// 1 on a configuration or I/O error and 2 on a numeric fault.
inline int run(const RunConfig &config, bool plot_data = false, Streams io = {}) {
  try {
    validate_config(config);
    const Scenario &s = config.scenario;
    const std::string &prefix = config.output_prefix;
    const RunOptions options{true, config.composition};

    TrajectoryLog log;
    std::string extra;
    if (config.mode == Mode::OpenLoop) {
      log = run_open_loop(s.model, s.xi0, s.integrator, s.reference);
    } else if (config.mode == Mode::Optimize) {
      const auto &opt = *config.optimizer;
      const OptimizerReport report = direct_search(opt.space, s, opt.budget, opt.mesh_tol, options);
      detail::write_file(prefix + "_history.csv",
                         [&](std::ostream &os) { write_report_csv(os, report); });
      log = run_closed_loop(s, report.best_params, options);
      log.meta.run_kind = "optimize";
      extra = " evaluations=" + std::to_string(report.evaluations) +
              " termination=" + std::string(to_string(report.termination)) +
              " kp=" + format_number(report.best_params.kp) +
              " ki=" + format_number(report.best_params.ki) +
              " k_alpha=" + format_number(report.best_params.k_alpha) +
              " k_beta=" + format_number(report.best_params.k_beta);
    } else {
      log = run_closed_loop(s, config.gains, options);
      if (config.mode == Mode::Disturb) log.meta.run_kind = "disturb";
    }

    detail::write_file(prefix + "_trajectory.csv",
                       [&](std::ostream &os) { write_trajectory_csv(os, log); });
    if (plot_data) detail::write_plot_data(prefix, log);

    for (const auto &w : log.warnings) io.err << "warning: step " << w.step << ": " << w.message << '\n';
    if (log.fault) {
      io.err << "fault at step " << log.fault->step << ": " << log.fault->message << '\n';
      io.out << "mode=" << to_string(config.mode) << " status=fault step=" << log.fault->step
             << " rows=" << log.rows.size() << '\n';
      return kExitFault;
    }

    io.out << "mode=" << to_string(config.mode)
           << " final_error=" << format_number(norm(log.rows.back().eps))
           << " ise=" << format_number(ise(log));
    if (config.mode == Mode::Disturb) {
      const auto m = rejection_metrics(log, s.disturbance);
      io.out << " peak_error=" << format_number(m.peak_error)
             << " recovery_time=" << format_number(m.recovery_time);
    }
    io.out << extra << '\n';
    return kExitOk;
  } catch (const ConfigError &e) {
    io.err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FaultError &e) {
    io.err << "fault at step " << e.step() << ": " << e.what() << '\n';
    return kExitFault;
  }
}

} // namespace pma::cli
