#pragma once

// Run configuration: a flat, sectioned key-value text format.
//
//   mode = "closed-loop"          # open-loop | closed-loop | disturb | optimize
//   output = "run"
//   xi0 = [0, 0]
//
//   [model]        kind, rate, attractor, bias, swirl
//   [gains]        kp, ki, k_alpha, k_beta, per_channel, composition
//   [integrator]   h, mu, t_final
//   [reference]    kind, target, rate
//   [disturbance]  kind, t_alpha, t_beta, seed, increment, components
//   [optimizer]    budget, mesh_tol, <gain>_lower, <gain>_upper, <gain>_mesh
//
// Values are numbers, quoted or bare strings, true/false, or [a, b, ...]
// number arrays. `#` starts a comment.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pma/controller.hpp"
#include "pma/disturbance.hpp"
#include "pma/dynamics.hpp"
#include "pma/optimizer.hpp"
#include "pma/reference.hpp"
#include "pma/simulation.hpp"
#include "pma/state.hpp"

namespace pma {

enum class Mode { OpenLoop, ClosedLoop, Disturb, Optimize };

inline std::string_view to_string(Mode m) {
  switch (m) {
  case Mode::OpenLoop: return "open-loop";
  case Mode::ClosedLoop: return "closed-loop";
  case Mode::Disturb: return "disturb";
  case Mode::Optimize: return "optimize";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "open-loop") return Mode::OpenLoop;
  if (s == "closed-loop") return Mode::ClosedLoop;
  if (s == "disturb") return Mode::Disturb;
  if (s == "optimize") return Mode::Optimize;
  return std::nullopt;
}

struct OptimizerSettings {
  SearchSpace space;
  std::size_t budget = 2000;
  double mesh_tol = 1e-3;
};

struct RunConfig {
  Mode mode = Mode::ClosedLoop;
  Scenario scenario = default_scenario();
  std::vector<PmaGains> gains{PmaGains{}};
  Composition composition = Composition::Product;
  std::string output_prefix = "pma";
  std::optional<OptimizerSettings> optimizer;
  /// "section.key" -> source line, used to point errors at the input.
  std::map<std::string, std::size_t> key_lines;
};

namespace detail {

using ConfigValue = std::variant<double, std::string, bool, std::vector<double>>;

struct Entry {
  ConfigValue value;
  std::size_t line;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string located(std::size_t line, const std::string &key, const std::string &msg) {
  return "line " + std::to_string(line) + ": key '" + key + "': " + msg;
}

inline std::optional<double> parse_double(const std::string &s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception &) {
  }
  return std::nullopt;
}

inline ConfigValue parse_value(const std::string &raw, std::size_t line, const std::string &key) {
  if (raw.empty()) throw ConfigError(located(line, key, "missing value"));
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ConfigError(located(line, key, "unterminated string"));
    return raw.substr(1, raw.size() - 2);
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError(located(line, key, "unterminated array"));
    std::vector<double> values;
    const std::string body = trim(std::string_view(raw).substr(1, raw.size() - 2));
    if (!body.empty()) {
      std::stringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto v = parse_double(trim(item));
        if (!v) throw ConfigError(located(line, key, "array element '" + trim(item) + "' is not a number"));
        values.push_back(*v);
      }
    }
    return values;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (auto v = parse_double(raw)) return *v;
  return raw;
}

inline std::string strip_comment(const std::string &line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline const std::map<std::string, std::set<std::string>> &known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"", {"mode", "output", "xi0"}},
      {"model", {"kind", "rate", "attractor", "bias", "swirl"}},
      {"gains", {"kp", "ki", "k_alpha", "k_beta", "per_channel", "composition"}},
      {"integrator", {"h", "mu", "t_final"}},
      {"reference", {"kind", "target", "rate"}},
      {"disturbance", {"kind", "t_alpha", "t_beta", "seed", "increment", "components"}},
      {"optimizer",
       {"budget", "mesh_tol", "kp_lower", "kp_upper", "kp_mesh", "ki_lower", "ki_upper",
        "ki_mesh", "k_alpha_lower", "k_alpha_upper", "k_alpha_mesh", "k_beta_lower",
        "k_beta_upper", "k_beta_mesh"}},
  };
  return keys;
}

class Document {
public:
  std::map<std::string, Entry> entries;
  std::set<std::string> sections;

  bool has(const std::string &k) const { return entries.count(k) != 0; }
  std::size_t line(const std::string &k) const { return entries.at(k).line; }

  double number(const std::string &k, double fallback) const {
    auto it = entries.find(k);
    if (it == entries.end()) return fallback;
    if (auto *d = std::get_if<double>(&it->second.value)) return *d;
    throw ConfigError(located(it->second.line, k, "expected a number"));
  }

  bool boolean(const std::string &k, bool fallback) const {
    auto it = entries.find(k);
    if (it == entries.end()) return fallback;
    if (auto *b = std::get_if<bool>(&it->second.value)) return *b;
    throw ConfigError(located(it->second.line, k, "expected true or false"));
  }

  std::string text(const std::string &k, std::string fallback) const {
    auto it = entries.find(k);
    if (it == entries.end()) return fallback;
    if (auto *s = std::get_if<std::string>(&it->second.value)) return *s;
    throw ConfigError(located(it->second.line, k, "expected a string"));
  }

  std::optional<std::vector<double>> array(const std::string &k) const {
    auto it = entries.find(k);
    if (it == entries.end()) return std::nullopt;
    if (auto *v = std::get_if<std::vector<double>>(&it->second.value)) return *v;
    throw ConfigError(located(it->second.line, k, "expected an array of numbers"));
  }

  /// Scalar or per-channel array, depending on `allow_array`.
  std::vector<double> scalar_or_array(const std::string &k, double fallback, bool allow_array,
                                      std::size_t dim) const {
    auto it = entries.find(k);
    if (it == entries.end()) return {fallback};
    if (auto *d = std::get_if<double>(&it->second.value)) return {*d};
    if (auto *v = std::get_if<std::vector<double>>(&it->second.value)) {
      if (!allow_array)
        throw ConfigError(located(it->second.line, k, "arrays require per_channel = true"));
      if (v->size() != dim)
        throw ConfigError(located(it->second.line, k, "expected " + std::to_string(dim) + " values"));
      return *v;
    }
    throw ConfigError(located(it->second.line, k, "expected a number"));
  }

  [[noreturn]] void fail(const std::string &k, const std::string &msg) const {
    auto it = entries.find(k);
    if (it == entries.end()) throw ConfigError("key '" + k + "': " + msg);
    throw ConfigError(located(it->second.line, k, msg));
  }
};

inline Document tokenize(std::string_view text) {
  Document doc;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_keys().count(section) || section.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      doc.sections.insert(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    if (!known_keys().at(section).count(key))
      throw ConfigError(located(line_no, full, "unknown key"));
    if (doc.entries.count(full)) throw ConfigError(located(line_no, full, "duplicate key"));
    doc.entries.emplace(full, Entry{parse_value(trim(std::string_view(line).substr(eq + 1)),
                                                line_no, full),
                                    line_no});
  }
  return doc;
}

inline StateVector vector_or(const Document &doc, const std::string &key,
                             std::optional<StateVector> fallback, std::size_t dim) {
  if (auto v = doc.array(key)) {
    if (v->size() != dim)
      doc.fail(key, "expected " + std::to_string(dim) + " components, got " +
                        std::to_string(v->size()));
    return StateVector(*v);
  }
  if (!fallback) doc.fail(key, "required when the dimension is not 2");
  return *fallback;
}

inline ParameterRange range_from(const Document &doc, const std::string &name,
                                 ParameterRange base, double initial) {
  base.lower = doc.number("optimizer." + name + "_lower", base.lower);
  base.upper = doc.number("optimizer." + name + "_upper", base.upper);
  base.mesh = doc.number("optimizer." + name + "_mesh", base.mesh);
  base.initial = initial;
  return base;
}

} // namespace detail

/// Cross-checks a configuration; also used after command-line overrides.
inline void validate_config(const RunConfig &cfg) {
  auto at = [&](const std::string &key, const std::string &msg) -> ConfigError {
    auto it = cfg.key_lines.find(key);
    if (it == cfg.key_lines.end()) return ConfigError("key '" + key + "': " + msg);
    return ConfigError(detail::located(it->second, key, msg));
  };
  const Scenario &s = cfg.scenario;
  const auto &d = s.disturbance;
  if (!(d.t_alpha < d.t_beta)) throw at("disturbance.t_alpha", "window requires t_alpha < t_beta");
  if (d.kind != DisturbanceKind::None) {
    if (d.t_alpha < 0.0) throw at("disturbance.t_alpha", "window starts before t = 0");
    if (d.t_beta > s.integrator.t_final)
      throw at("disturbance.t_beta", "window ends after the horizon t_final");
  }
  try {
    s.validate();
  } catch (const ConfigError &e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  if (cfg.mode == Mode::Disturb && d.kind == DisturbanceKind::None)
    throw at("disturbance.kind", "disturb mode needs a disturbance kind other than none");
  if (cfg.gains.size() != 1 && cfg.gains.size() != s.xi0.dim())
    throw at("gains.kp", "per-channel gains must match the dimension");
  for (const auto &g : cfg.gains) {
    try {
      g.validate();
    } catch (const ConfigError &e) {
      throw at("gains.kp", e.what());
    }
  }
  if (cfg.mode == Mode::Optimize) {
    if (!cfg.optimizer) throw at("optimizer", "optimize mode needs an [optimizer] section");
    if (cfg.gains.size() != 1) throw at("gains.per_channel", "optimize mode tunes shared gains only");
    if (cfg.optimizer->budget < 1) throw at("optimizer.budget", "budget must be >= 1");
    if (!(cfg.optimizer->mesh_tol > 0.0)) throw at("optimizer.mesh_tol", "mesh_tol must be > 0");
    try {
      cfg.optimizer->space.validate();
    } catch (const ConfigError &e) {
      throw at("optimizer", e.what());
    }
  }
}

/// Parses and validates `text`. A mode override replaces the file's `mode`
/// before validation.
inline RunConfig parse_config(std::string_view text, std::optional<Mode> mode_override = {}) {
  using namespace detail;
  const Document doc = tokenize(text);
  RunConfig cfg;
  for (const auto &[k, e] : doc.entries) cfg.key_lines[k] = e.line;

  const std::string mode = doc.text("mode", "closed-loop");
  if (auto m = parse_mode(mode)) cfg.mode = *m;
  else doc.fail("mode", "unknown mode '" + mode + "'");
  if (mode_override) cfg.mode = *mode_override;
  cfg.output_prefix = doc.text("output", "pma");

  std::size_t dim = 2;
  if (auto v = doc.array("xi0")) dim = v->size();
  else if (auto a = doc.array("model.attractor")) dim = a->size();
  if (dim == 0) doc.fail(doc.has("xi0") ? "xi0" : "model.attractor", "dimension must be >= 1");
  const bool d2 = dim == 2;
  const Scenario defaults = default_scenario();
  auto fallback = [&](const StateVector &v) { return d2 ? std::optional(v) : std::nullopt; };

  Scenario &s = cfg.scenario;
  s.xi0 = vector_or(doc, "xi0", StateVector(dim, 0.0), dim);

  // [model]
  const std::string mkind = doc.text("model.kind", "biased-linear-sink");
  if (mkind == "linear-sink") s.model.kind = FieldKind::LinearSink;
  else if (mkind == "biased-linear-sink") s.model.kind = FieldKind::BiasedLinearSink;
  else if (mkind == "nonlinear-swirl") s.model.kind = FieldKind::NonlinearSwirl;
  else doc.fail("model.kind", "unknown model kind '" + mkind + "'");
  s.model.rate = doc.number("model.rate", 1.0);
  s.model.attractor = vector_or(doc, "model.attractor", fallback(defaults.model.attractor), dim);
  s.model.bias = s.model.kind == FieldKind::BiasedLinearSink
                     ? vector_or(doc, "model.bias", fallback(defaults.model.bias), dim)
                     : vector_or(doc, "model.bias", StateVector(dim, 0.0), dim);
  s.model.swirl = doc.number("model.swirl", 1.0);
  if (!(s.model.rate > 0.0)) doc.fail("model.rate", "rate must be > 0");
  if (s.model.kind == FieldKind::NonlinearSwirl && dim < 2)
    doc.fail("model.kind", "nonlinear-swirl needs dimension >= 2");

  // [integrator]
  s.integrator.h = doc.number("integrator.h", 0.01);
  s.integrator.mu = doc.number("integrator.mu", 0.99);
  s.integrator.t_final = doc.number("integrator.t_final", 4.0);
  if (!(s.integrator.h > 0.0)) doc.fail("integrator.h", "h must be > 0");
  if (!(s.integrator.t_final > 0.0)) doc.fail("integrator.t_final", "t_final must be > 0");
  if (s.integrator.h > s.integrator.t_final) doc.fail("integrator.h", "h must not exceed t_final");
  if (!(s.integrator.mu >= 0.0 && s.integrator.mu <= 1.0))
    doc.fail("integrator.mu", "mu must lie in [0, 1]");

  // [reference]
  const std::string rkind = doc.text("reference.kind", "exp-approach");
  if (rkind == "exp-approach") s.reference.kind = ReferenceKind::ExpApproach;
  else if (rkind == "line-ramp") s.reference.kind = ReferenceKind::LineRamp;
  else if (rkind == "hold") s.reference.kind = ReferenceKind::Hold;
  else doc.fail("reference.kind", "unknown reference kind '" + rkind + "'");
  s.reference.target = vector_or(doc, "reference.target", s.model.attractor, dim);
  s.reference.rate = doc.number("reference.rate", 0.5);
  if (s.reference.kind != ReferenceKind::Hold && !(s.reference.rate > 0.0))
    doc.fail("reference.rate", "rate must be > 0");

  // [disturbance]
  const std::string dkind = doc.text("disturbance.kind", "none");
  if (dkind == "none") s.disturbance.kind = DisturbanceKind::None;
  else if (dkind == "linear") s.disturbance.kind = DisturbanceKind::LinearRecursive;
  else if (dkind == "log") s.disturbance.kind = DisturbanceKind::LogRecursive;
  else doc.fail("disturbance.kind", "unknown disturbance kind '" + dkind + "'");
  s.disturbance.t_alpha = doc.number("disturbance.t_alpha", 1.74);
  s.disturbance.t_beta = doc.number("disturbance.t_beta", 1.81);
  s.disturbance.seed = doc.number("disturbance.seed", default_seed(s.disturbance.kind));
  s.disturbance.increment = doc.number("disturbance.increment", 0.1);
  if (auto comps = doc.array("disturbance.components")) {
    for (double c : *comps) {
      if (c < 0 || c != std::floor(c) || c >= static_cast<double>(dim))
        doc.fail("disturbance.components", "component indices must be integers in [0, d)");
      s.disturbance.components.push_back(static_cast<std::size_t>(c));
    }
  }

  // [gains]
  const bool per_channel = doc.boolean("gains.per_channel", false);
  const PmaGains g0{};
  const auto kp = doc.scalar_or_array("gains.kp", g0.kp, per_channel, dim);
  const auto ki = doc.scalar_or_array("gains.ki", g0.ki, per_channel, dim);
  const auto ka = doc.scalar_or_array("gains.k_alpha", g0.k_alpha, per_channel, dim);
  const auto kb = doc.scalar_or_array("gains.k_beta", g0.k_beta, per_channel, dim);
  const std::size_t channels = per_channel ? dim : 1;
  auto pick = [](const std::vector<double> &v, std::size_t i) { return v.size() == 1 ? v[0] : v[i]; };
  cfg.gains.clear();
  for (std::size_t i = 0; i < channels; ++i)
    cfg.gains.push_back({pick(kp, i), pick(ki, i), pick(ka, i), pick(kb, i)});
  for (const auto &g : cfg.gains) {
    if (!(g.kp > 0.0)) doc.fail("gains.kp", "kp must be > 0");
    if (!(g.ki > 0.0)) doc.fail("gains.ki", "ki must be > 0");
  }
  const std::string comp = doc.text("gains.composition", "product");
  if (comp == "product") cfg.composition = Composition::Product;
  else if (comp == "additive") cfg.composition = Composition::Additive;
  else doc.fail("gains.composition", "unknown composition '" + comp + "'");

  // [optimizer]
  if (doc.sections.count("optimizer")) {
    OptimizerSettings opt;
    const double budget = doc.number("optimizer.budget", 2000.0);
    if (budget < 1 || budget != std::floor(budget))
      doc.fail("optimizer.budget", "budget must be a positive integer");
    opt.budget = static_cast<std::size_t>(budget);
    opt.mesh_tol = doc.number("optimizer.mesh_tol", 1e-3);
    const PmaGains &g = cfg.gains.front();
    opt.space.kp = range_from(doc, "kp", opt.space.kp, g.kp);
    opt.space.ki = range_from(doc, "ki", opt.space.ki, g.ki);
    opt.space.k_alpha = range_from(doc, "k_alpha", opt.space.k_alpha, g.k_alpha);
    opt.space.k_beta = range_from(doc, "k_beta", opt.space.k_beta, g.k_beta);
    cfg.optimizer = opt;
  }

  validate_config(cfg);
  return cfg;
}

} // namespace pma
