#pragma once

// INI experiment configuration.
//
//   [grid]      dim, n
//   [variant]   kind = unified | classical | sensitivity | damped | transformed
//               lambda, sign_convention = derived | printed
//   [alpha] [beta] [gamma] [xi] [rho]
//               kind = constant | exp_decay | rational | tabulated
//               value, amplitude, rate, a, b, table = "t:v, t:v, ..."
//   [initial]   preset, offset, amplitude, wavenumber, shape, amplitude2,
//               wavenumber2, width, modes, seed, path
//   [solver]    dt, dt_min, t_end, cfl, grad_blowup_threshold, record_every
//   [theory]    C, s, p, r, strict_lower_bound
//   [monitors]  besov_s, besov_p, besov_r
//   [friedrichs] iters
//   [output]    dir

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hks/dynamics.hpp"
#include "hks/errors.hpp"
#include "hks/integrator.hpp"
#include "hks/oracles.hpp"
#include "hks/schedule.hpp"

namespace hks::harness {

using boost::property_tree::ptree;

struct InitialSpec {
  std::string preset = "constant";
  double offset = 0.0;
  double amplitude = 0.0;
  int wavenumber = 1;
  std::string shape = "sin";
  double amplitude2 = 0.0;
  int wavenumber2 = 2;
  double width = 0.5;
  int modes = 16;
  std::uint64_t seed = 0;
  std::filesystem::path path;
};

struct ExperimentConfig {
  std::filesystem::path source;
  int dim = 1;
  int n = 128;
  std::string variant_kind = "classical";
  EquationVariant variant = variant::Classical{};
  InitialSpec initial;
  SolverConfig solver;
  TheoryConfig theory;
  MonitorSet monitors = MonitorSet::standard(1);
  int friedrichs_iters = 6;
  std::optional<std::filesystem::path> output_dir;

  TorusGrid grid() const { return TorusGrid(dim, n); }
};

/// Reads an INI file; syntax errors name the file and line.
inline ptree read_ini(const std::filesystem::path& path) {
  ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    std::ostringstream msg;
    msg << (e.filename().empty() ? path.string() : e.filename());
    if (e.line() > 0) msg << ':' << e.line();
    msg << ": " << e.message();
    throw ConfigError(msg.str());
  }
  return pt;
}

namespace detail {

/// Typed access to one INI section that remembers which keys were read.
class Section {
 public:
  Section(const ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(ptree::path_type(name_, '/'))) node_ = &*child;
  }

  bool present() const { return node_ != nullptr; }
  const std::string& name() const { return name_; }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!node_) return std::nullopt;
    auto v = node_->get_optional<std::string>(ptree::path_type(key, '/'));
    if (!v) return std::nullopt;
    return *v;
  }

  std::string text(const std::string& key, std::string fallback) {
    auto v = raw(key);
    return v ? *v : std::move(fallback);
  }

  double number(const std::string& key, double fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    return parse_double(key, *v);
  }

  long long integer(const std::string& key, long long fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    std::size_t pos = 0;
    long long out = 0;
    try {
      out = std::stoll(*v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v->size()) throw ConfigError(field(key) + ": expected an integer, got '" + *v + "'");
    return out;
  }

  bool boolean(const std::string& key, bool fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(field(key) + ": expected true or false, got '" + *v + "'");
  }

  double parse_double(const std::string& key, const std::string& v) const {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw ConfigError(field(key) + ": expected a number, got '" + v + "'");
    return out;
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

  /// Rejects keys that were never read (typos).
  void finish() const {
    if (!node_) return;
    for (const auto& [key, _] : *node_) {
      if (!used_.count(key)) throw ConfigError(field(key) + ": unknown key");
    }
  }

 private:
  std::string name_;
  const ptree* node_ = nullptr;
  std::set<std::string> used_;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(s);
  while (std::getline(is, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

inline ParameterSchedule parse_schedule(const ptree& root, const std::string& name, double default_value) {
  Section sec(root, name);
  const std::string kind = sec.text("kind", "constant");
  ParameterSchedule out = ParameterSchedule::constant(default_value);
  if (kind == "constant") {
    out = ParameterSchedule::constant(sec.number("value", default_value));
  } else if (kind == "exp_decay") {
    const double rate = sec.number("rate", 1.0);
    if (!(rate >= 0.0)) throw ConfigError(sec.field("rate") + ": must be >= 0");
    out = ParameterSchedule::exp_decay(sec.number("amplitude", 1.0), rate);
  } else if (kind == "rational") {
    const double a = sec.number("a", 1.0), b = sec.number("b", 1.0);
    if (!(a > 0.0)) throw ConfigError(sec.field("a") + ": must be > 0");
    if (!(b > 0.0)) throw ConfigError(sec.field("b") + ": must be > 0");
    out = ParameterSchedule::rational(a, b, sec.number("amplitude", 1.0));
  } else if (kind == "tabulated") {
    const auto table = sec.raw("table");
    if (!table) throw ConfigError(sec.field("table") + ": required for tabulated schedules");
    std::vector<std::pair<double, double>> knots;
    for (const auto& item : split_list(*table)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError(sec.field("table") + ": entries must be t:value");
      knots.emplace_back(sec.parse_double("table", trim(item.substr(0, colon))),
                         sec.parse_double("table", trim(item.substr(colon + 1))));
    }
    try {
      out = ParameterSchedule::tabulated(std::move(knots));
    } catch (const Error& e) {
      throw ConfigError(sec.field("table") + ": " + e.what());
    }
  } else {
    throw ConfigError(sec.field("kind") + ": unknown schedule kind '" + kind + "'");
  }
  sec.finish();
  return out;
}

inline SignConvention parse_convention(Section& sec) {
  const std::string c = sec.text("sign_convention", "derived");
  if (c == "derived") return SignConvention::derived;
  if (c == "printed") return SignConvention::printed;
  throw ConfigError(sec.field("sign_convention") + ": expected derived or printed, got '" + c + "'");
}

}  // namespace detail

/// Builds an ExperimentConfig from a parsed INI tree. Relative snapshot paths
/// resolve against the directory of `source`.
inline ExperimentConfig parse_config(const ptree& root, const std::filesystem::path& source = {}) {
  static const std::set<std::string> known = {"grid",   "variant", "alpha",    "beta",     "gamma",
                                              "xi",     "rho",     "initial",  "solver",   "theory",
                                              "monitors", "friedrichs", "output"};
  for (const auto& [name, _] : root) {
    if (!known.count(name)) throw ConfigError(name + ": unknown section");
  }

  ExperimentConfig cfg;
  cfg.source = source;

  detail::Section grid(root, "grid");
  cfg.dim = static_cast<int>(grid.integer("dim", 1));
  cfg.n = static_cast<int>(grid.integer("n", 128));
  grid.finish();
  if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("grid.dim: must be 1 or 2");
  if (cfg.n < 8 || (cfg.n & (cfg.n - 1)) != 0) throw ConfigError("grid.n: must be a power of two >= 8");

  detail::Section var(root, "variant");
  cfg.variant_kind = var.text("kind", "classical");
  const auto& kind = cfg.variant_kind;
  if (kind == "unified") {
    var.finish();
    cfg.variant = variant::Unified{{detail::parse_schedule(root, "alpha", 0.0), detail::parse_schedule(root, "beta", 0.0),
                                    detail::parse_schedule(root, "gamma", 0.0), detail::parse_schedule(root, "xi", 0.0)}};
  } else if (kind == "classical") {
    cfg.variant = variant::Classical{detail::parse_convention(var)};
    var.finish();
  } else if (kind == "sensitivity") {
    var.finish();
    cfg.variant = variant::SensitivityAdjusted{detail::parse_schedule(root, "rho", 1.0)};
  } else if (kind == "damped" || kind == "transformed") {
    const double lambda = var.number("lambda", 1.0);
    if (kind == "damped") {
      if (!(lambda >= 0.0)) throw ConfigError("variant.lambda: must be >= 0");
      cfg.variant = variant::Damped{lambda};
    } else {
      if (!(lambda > 0.0)) throw ConfigError("variant.lambda: must be > 0");
      cfg.variant = variant::Transformed{lambda, detail::parse_convention(var)};
    }
    var.finish();
  } else {
    throw ConfigError("variant.kind: unknown variant '" + kind + "'");
  }
  const bool uses_abgx = kind == "unified";
  const bool uses_rho = kind == "sensitivity";
  for (const char* s : {"alpha", "beta", "gamma", "xi"}) {
    if (!uses_abgx && root.get_child_optional(s)) throw ConfigError(std::string(s) + ": not used by variant '" + kind + "'");
  }
  if (!uses_rho && root.get_child_optional("rho")) throw ConfigError("rho: not used by variant '" + kind + "'");

  detail::Section init(root, "initial");
  auto& in = cfg.initial;
  in.preset = init.text("preset", "constant");
  in.offset = init.number("offset", 0.0);
  in.amplitude = init.number("amplitude", 0.0);
  in.wavenumber = static_cast<int>(init.integer("wavenumber", 1));
  in.shape = init.text("shape", "sin");
  in.amplitude2 = init.number("amplitude2", 0.0);
  in.wavenumber2 = static_cast<int>(init.integer("wavenumber2", 2));
  in.width = init.number("width", 0.5);
  in.modes = static_cast<int>(init.integer("modes", 16));
  in.seed = static_cast<std::uint64_t>(init.integer("seed", 0));
  if (auto p = init.raw("path")) {
    in.path = *p;
    if (in.path.is_relative() && !source.empty()) in.path = source.parent_path() / in.path;
  }
  init.finish();
  static const std::set<std::string> presets = {"constant", "single_mode", "two_mode", "gaussian", "random", "snapshot"};
  if (!presets.count(in.preset)) throw ConfigError("initial.preset: unknown preset '" + in.preset + "'");
  if (in.shape != "sin" && in.shape != "cos") throw ConfigError("initial.shape: expected sin or cos");
  if (!(in.width > 0.0)) throw ConfigError("initial.width: must be > 0");
  if (in.modes < 1) throw ConfigError("initial.modes: must be >= 1");
  if (in.preset == "snapshot" && in.path.empty()) throw ConfigError("initial.path: required for the snapshot preset");

  detail::Section sol(root, "solver");
  auto& s = cfg.solver;
  s.dt = sol.number("dt", s.dt);
  s.dt_min = sol.number("dt_min", s.dt_min);
  s.t_end = sol.number("t_end", s.t_end);
  s.cfl = sol.number("cfl", s.cfl);
  s.grad_blowup_threshold = sol.number("grad_blowup_threshold", s.grad_blowup_threshold);
  s.record_every = static_cast<int>(sol.integer("record_every", s.record_every));
  sol.finish();
  s.validate();

  detail::Section th(root, "theory");
  cfg.theory.C = th.number("C", 1.0);
  cfg.theory.besov_index = {th.number("s", 2.0), th.number("p", 2.0), th.number("r", 1.0)};
  cfg.theory.strict_lower_bound = th.boolean("strict_lower_bound", false);
  th.finish();
  if (!(cfg.theory.C > 0.0)) throw ConfigError("theory.C: must be > 0");
  if (!(cfg.theory.besov_index.p >= 1.0)) throw ConfigError("theory.p: must be >= 1");
  if (!(cfg.theory.besov_index.r >= 1.0)) throw ConfigError("theory.r: must be >= 1");

  detail::Section mon(root, "monitors");
  const auto crit = BesovIndex::critical(cfg.dim);
  cfg.monitors = MonitorSet{{mon.number("besov_s", crit.s), mon.number("besov_p", crit.p), mon.number("besov_r", crit.r)}, {}};
  mon.finish();
  if (!(cfg.monitors.besov.p >= 1.0)) throw ConfigError("monitors.besov_p: must be >= 1");
  if (!(cfg.monitors.besov.r >= 1.0)) throw ConfigError("monitors.besov_r: must be >= 1");

  detail::Section fr(root, "friedrichs");
  cfg.friedrichs_iters = static_cast<int>(fr.integer("iters", 6));
  fr.finish();

  detail::Section out(root, "output");
  if (auto d = out.raw("dir")) cfg.output_dir = *d;
  out.finish();
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": no such file");
  return parse_config(read_ini(path), path);
}

/// Overrides one "section.key" entry of an INI tree.
inline void set_path(ptree& root, const std::string& dotted, const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size()) {
    throw ConfigError("sweep axis '" + dotted + "': expected section.key");
  }
  root.put(ptree::path_type(dotted.substr(0, dot) + "/" + dotted.substr(dot + 1), '/'), value);
}

}  // namespace hks::harness
