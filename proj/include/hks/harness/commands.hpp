#pragma once

// The run / sweep / check / friedrichs subcommands. Each returns a process
// exit code and writes its files under the resolved output directory.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hks/besov.hpp"
#include "hks/dynamics.hpp"
#include "hks/friedrichs.hpp"
#include "hks/harness/config.hpp"
#include "hks/harness/presets.hpp"
#include "hks/integrator.hpp"
#include "hks/oracles.hpp"
#include "hks/record_io.hpp"
#include "hks/snapshot.hpp"
#include "json.hpp"

namespace hks::harness {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int blow_up = 2;
inline constexpr int step_underflow = 3;
}  // namespace exit_code

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<int> parallel;
  std::optional<std::uint64_t> seed;
  std::optional<double> constant_C;
  std::optional<int> iters;
};

inline constexpr const char* kOutDirEnv = "HKS_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "hks_out";

/// --out, then [output] dir, then $HKS_OUT_DIR, then ./hks_out.
inline std::filesystem::path resolve_out_dir(const CommandOptions& opt, const ExperimentConfig& cfg) {
  if (opt.out) return *opt.out;
  if (cfg.output_dir) return *cfg.output_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return kDefaultOutDir;
}

inline void apply_overrides(ExperimentConfig& cfg, const CommandOptions& opt) {
  if (opt.seed) cfg.initial.seed = *opt.seed;
  if (opt.constant_C) {
    if (!(*opt.constant_C > 0.0)) throw ConfigError("--constant-C: must be > 0");
    cfg.theory.C = *opt.constant_C;
  }
  if (opt.iters) cfg.friedrichs_iters = *opt.iters;
}

/// Coefficients the theory oracles see: the damped equation is assessed
/// through its transformed form.
inline HksParams theory_params(const EquationVariant& v) {
  if (const auto* d = std::get_if<variant::Damped>(&v); d && d->lambda > 0.0) {
    return specialize_parameters(variant::Transformed{d->lambda, SignConvention::derived});
  }
  return params_of(v);
}

inline std::optional<double> dissipation_lambda(const EquationVariant& v) {
  if (const auto* d = std::get_if<variant::Damped>(&v); d && d->lambda > 0.0) return d->lambda;
  if (const auto* t = std::get_if<variant::Transformed>(&v)) return t->lambda;
  return std::nullopt;
}

struct TheorySummary {
  double norm_critical = 0.0;
  double norm_theory = 0.0;
  IntegralBundle bundle;
  OracleReport global_critical;
  OracleReport global_noncritical;
  double uniform_bound = 0.0;
  double t_critical = 0.0;
  double t_noncritical = 0.0;
  nlohmann::json json;
};

inline TheorySummary evaluate_theory(const ExperimentConfig& cfg, const RealField& u0) {
  TheorySummary s;
  const auto crit = BesovIndex::critical(cfg.dim);
  s.norm_critical = besov_norm(u0, crit);
  s.norm_theory = besov_norm(u0, cfg.theory.besov_index);
  const HksParams params = theory_params(cfg.variant);
  s.bundle = IntegralBundle::from_params(params);
  s.global_critical = global_threshold_ok(s.norm_critical, s.bundle, cfg.theory);
  s.global_noncritical = global_threshold_ok(s.norm_theory, s.bundle, cfg.theory);
  s.uniform_bound = uniform_bound_value(s.norm_critical, s.bundle, cfg.theory);
  s.t_critical = blowup_lower_bound_critical(s.norm_critical, params, cfg.theory);
  s.t_noncritical = blowup_lower_bound_noncritical(s.norm_theory, params, cfg.theory);

  auto& j = s.json;
  j["C"] = cfg.theory.C;
  j["variant"] = cfg.variant_kind;
  j["u0"] = {{"norm_critical", json_number(s.norm_critical)},
             {"norm_theory", json_number(s.norm_theory)},
             {"critical_index", {{"s", crit.s}, {"p", crit.p}, {"r", crit.r}}},
             {"theory_index",
              {{"s", cfg.theory.besov_index.s}, {"p", cfg.theory.besov_index.p}, {"r", cfg.theory.besov_index.r}}}};
  j["integrals"] = {{"I_ab", json_number(s.bundle.ab)}, {"I_total", json_number(s.bundle.total)}};
  j["global_existence_critical"] = s.global_critical.to_json();
  j["global_existence_noncritical"] = s.global_noncritical.to_json();
  j["uniform_bound"] = json_number(s.uniform_bound);
  j["blowup_lower_bound_critical"] = json_number(s.t_critical);
  j["blowup_lower_bound_noncritical"] = json_number(s.t_noncritical);
  j["binding_threshold"] = binding_condition(s.norm_critical, s.bundle, cfg.theory);
  j["lambda_star"] = json_number(lambda_star(s.norm_critical, cfg.theory));
  if (auto lambda = dissipation_lambda(cfg.variant)) {
    j["dissipation"] = corollary_lambda_ok(s.norm_critical, *lambda, cfg.theory).to_json();
    j["dissipation"]["lambda"] = *lambda;
  }
  return s;
}

struct RunOutcome {
  RunRecord record;
  TheorySummary theory;
  double observed_sup = 0.0;
  bool lower_bound_violated = false;
  bool bound_ok = false;
  nlohmann::json report;

  int exit_code() const {
    switch (record.status.kind) {
      case RunStatus::Kind::completed:
        return exit_code::ok;
      case RunStatus::Kind::blow_up:
        return exit_code::blow_up;
      case RunStatus::Kind::step_underflow:
        return exit_code::step_underflow;
    }
    return exit_code::config_error;
  }
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

/// Integrates one configuration and writes record.csv, final.hks and report.json into `dir`.
inline RunOutcome execute_run(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const RealField u0 = make_initial(cfg);
  RunOutcome out;
  out.theory = evaluate_theory(cfg, u0);
  out.record = integrate(u0, cfg.variant, cfg.solver, cfg.monitors);

  const auto& norms = out.record.series(column::besov);
  for (double v : norms) out.observed_sup = std::max(out.observed_sup, v);
  const auto& st = out.record.status;
  out.lower_bound_violated = st.kind == RunStatus::Kind::blow_up && st.time < out.theory.t_critical;
  out.bound_ok = out.observed_sup <= out.theory.uniform_bound;

  out.report = out.theory.json;
  out.report["run"] = {
      {"status", st.label()},
      {"time", json_number(st.time)},
      {"observed_sup_besov", json_number(out.observed_sup)},
      {"bound_ok", out.bound_ok},
      {"minimal_C_for_bound", json_number(minimal_constant_for_bound(out.observed_sup, out.theory.norm_critical,
                                                                     out.theory.bundle))},
      {"criterion_integral_critical", json_number(criterion_integral(out.record, Criterion::critical_b0_inf1))},
      {"criterion_integral_noncritical", json_number(criterion_integral(out.record, Criterion::noncritical_b0_inf2))},
      {"lower_bound_violated", out.lower_bound_violated},
      {"hard_failure", out.lower_bound_violated && cfg.theory.strict_lower_bound},
  };
  if (auto lambda = dissipation_lambda(cfg.variant)) {
    out.report["run"]["maximal_C_for_dissipation"] = json_number(maximal_constant_for_lambda(out.theory.norm_critical, *lambda));
  }

  std::filesystem::create_directories(dir);
  write_run_record_csv(dir / "record.csv", out.record);
  write_snapshot(dir / "final.hks", *out.record.final_state);
  write_json(dir / "report.json", out.report);
  return out;
}

inline ExperimentConfig load_with_overrides(const CommandOptions& opt) {
  auto cfg = load_config(opt.config);
  apply_overrides(cfg, opt);
  return cfg;
}

inline int cli_run(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  ExperimentConfig cfg;
  try {
    cfg = load_with_overrides(opt);
    const auto dir = resolve_out_dir(opt, cfg);
    const auto res = execute_run(cfg, dir);
    out << "status=" << res.record.status.label() << " time=" << format_double(res.record.status.time)
        << " out=" << dir.string() << '\n';
    return res.exit_code();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config_error;
  } catch (const SnapshotError& e) {
    err << "config error: initial.path: " << e.what() << '\n';
    return exit_code::config_error;
  }
}

inline int cli_check(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const auto cfg = load_with_overrides(opt);
    const auto theory = evaluate_theory(cfg, make_initial(cfg));
    const auto dir = resolve_out_dir(opt, cfg);
    std::filesystem::create_directories(dir);
    write_json(dir / "check.json", theory.json);
    out << theory.json.dump(2) << '\n';
    return exit_code::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config_error;
  } catch (const SnapshotError& e) {
    err << "config error: initial.path: " << e.what() << '\n';
    return exit_code::config_error;
  }
}

struct FriedrichsRow {
  int iterate = 0;
  double l2_error = 0.0;
  double besov_error = 0.0;
  std::string status = "ok";
};

/// Runs the iteration and a direct solve on the same step grid; one row per iterate.
inline std::vector<FriedrichsRow> friedrichs_table(const ExperimentConfig& cfg, const RealField& u0, int n_iters) {
  if (std::holds_alternative<variant::Damped>(cfg.variant)) {
    throw ConfigError("variant.kind: friedrichs needs a variant inside the unified form");
  }
  const HksParams p = params_of(cfg.variant);
  const double T = cfg.solver.t_end, dt = cfg.solver.dt;
  const BesovIndex lower{cfg.theory.besov_index.s - 1.0, cfg.theory.besov_index.p, cfg.theory.besov_index.r};

  std::vector<FriedrichsRow> rows;
  std::optional<RealField> reference;
  try {
    const auto states = integrate_fixed(u0, [&p](const RealField& u, double t) { return rhs_unified(u, t, p); }, T, dt);
    reference = states.back();
  } catch (const DivergenceError&) {
  }
  auto observer = [&](int n, const Trajectory& traj) {
    FriedrichsRow row{n, kInf, kInf, "ok"};
    if (reference) {
      const RealField diff = traj.final_state() - *reference;
      row.l2_error = lp_norm(diff, 2.0);
      row.besov_error = besov_norm(diff, lower);
    } else {
      row.status = "reference_diverged";
    }
    rows.push_back(row);
  };
  try {
    friedrichs_iterate(u0, p, T, dt, n_iters, observer);
  } catch (const DivergenceError& e) {
    for (int n = e.iterate(); n <= n_iters; ++n) rows.push_back({n, kInf, kInf, "diverged"});
  }
  return rows;
}

inline int cli_friedrichs(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const auto cfg = load_with_overrides(opt);
    if (cfg.friedrichs_iters < 1) throw ConfigError("friedrichs.iters: must be >= 1");
    const auto rows = friedrichs_table(cfg, make_initial(cfg), cfg.friedrichs_iters);
    const auto dir = resolve_out_dir(opt, cfg);
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / "friedrichs.csv");
    os << "iterate,l2_error,besov_error,status\n";
    bool diverged = false;
    for (const auto& r : rows) {
      os << r.iterate << ',' << format_double(r.l2_error) << ',' << format_double(r.besov_error) << ',' << r.status << '\n';
      out << "iterate " << r.iterate << ": l2=" << format_double(r.l2_error) << " besov=" << format_double(r.besov_error)
          << ' ' << r.status << '\n';
      diverged = diverged || r.status != "ok";
    }
    return diverged ? exit_code::blow_up : exit_code::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config_error;
  } catch (const SnapshotError& e) {
    err << "config error: initial.path: " << e.what() << '\n';
    return exit_code::config_error;
  }
}

struct SweepAxis {
  std::string path;
  std::vector<std::string> values;
};

struct SweepSpec {
  std::filesystem::path base;
  ptree base_tree;
  std::vector<SweepAxis> axes;
  int parallel = 1;

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }
  /// Axis values of combination i; the last axis varies fastest.
  std::vector<std::string> combination(std::size_t i) const {
    std::vector<std::string> out(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      out[k] = axes[k].values[i % axes[k].values.size()];
      i /= axes[k].values.size();
    }
    return out;
  }
};

/// [sweep] base = path, parallel = N;  [axes] section.key = v1, v2, ...
inline SweepSpec load_sweep(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": no such file");
  const ptree root = read_ini(path);
  for (const auto& [name, _] : root) {
    if (name != "sweep" && name != "axes") throw ConfigError(name + ": unknown section");
  }
  detail::Section sw(root, "sweep");
  SweepSpec spec;
  const auto base = sw.raw("base");
  if (!base) throw ConfigError("sweep.base: required");
  spec.base = *base;
  if (spec.base.is_relative()) spec.base = path.parent_path() / spec.base;
  spec.parallel = static_cast<int>(sw.integer("parallel", 1));
  sw.finish();
  if (spec.parallel < 1) throw ConfigError("sweep.parallel: must be >= 1");
  if (!std::filesystem::exists(spec.base)) throw ConfigError("sweep.base: no such file " + spec.base.string());
  spec.base_tree = read_ini(spec.base);
  if (auto axes = root.get_child_optional("axes")) {
    for (const auto& [key, node] : *axes) {
      SweepAxis axis{key, detail::split_list(node.data())};
      if (axis.values.empty()) throw ConfigError("axes." + key + ": empty value list");
      spec.axes.push_back(std::move(axis));
    }
  }
  if (spec.axes.empty()) throw ConfigError("axes: at least one axis is required");
  return spec;
}

struct SweepRow {
  std::size_t index = 0;
  std::vector<std::string> values;
  std::string status = "error";
  double time = kInf;
  double blowup_time = kInf;
  bool global_flag = false;
  double t_critical = kInf;
  double t_noncritical = kInf;
  double observed_sup = kInf;
  double uniform_bound = kInf;
  bool bound_ok = false;
  bool lower_bound_violated = false;
  bool hard_failure = false;
  std::string message;
};

inline std::string sweep_dir_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%03zu", i);
  return buf;
}

inline SweepRow run_sweep_point(const SweepSpec& spec, std::size_t i, const CommandOptions& opt,
                                const std::filesystem::path& root) {
  SweepRow row;
  row.index = i;
  row.values = spec.combination(i);
  try {
    ptree tree = spec.base_tree;
    for (std::size_t k = 0; k < spec.axes.size(); ++k) set_path(tree, spec.axes[k].path, row.values[k]);
    auto cfg = parse_config(tree, spec.base);
    apply_overrides(cfg, opt);
    const auto res = execute_run(cfg, root / sweep_dir_name(i));
    const auto& st = res.record.status;
    row.status = st.label();
    row.time = st.time;
    row.blowup_time = st.kind == RunStatus::Kind::blow_up ? st.time : kInf;
    row.global_flag = res.theory.global_critical.satisfied;
    row.t_critical = res.theory.t_critical;
    row.t_noncritical = res.theory.t_noncritical;
    row.observed_sup = res.observed_sup;
    row.uniform_bound = res.theory.uniform_bound;
    row.bound_ok = res.bound_ok;
    row.lower_bound_violated = res.lower_bound_violated;
    row.hard_failure = res.lower_bound_violated && cfg.theory.strict_lower_bound;
  } catch (const ConfigError& e) {
    row.status = "config_error";
    row.message = e.what();
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  for (auto& c : row.message) {
    if (c == ',' || c == '\n') c = ';';
  }
  return row;
}

inline void write_sweep_index(const std::filesystem::path& path, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "run,dir";
  for (const auto& a : spec.axes) os << ',' << a.path;
  os << ",status,time,blowup_time,global_existence,T_critical,T_noncritical,observed_sup,uniform_bound,bound_ok,"
        "lower_bound_violated,hard_failure,message\n";
  for (const auto& r : rows) {
    os << r.index << ',' << sweep_dir_name(r.index);
    for (const auto& v : r.values) os << ',' << v;
    os << ',' << r.status << ',' << format_double(r.time) << ',' << format_double(r.blowup_time) << ','
       << (r.global_flag ? "true" : "false") << ',' << format_double(r.t_critical) << ','
       << format_double(r.t_noncritical) << ',' << format_double(r.observed_sup) << ','
       << format_double(r.uniform_bound) << ',' << (r.bound_ok ? "true" : "false") << ','
       << (r.lower_bound_violated ? "true" : "false") << ',' << (r.hard_failure ? "true" : "false") << ','
       << r.message << '\n';
  }
}

inline int cli_sweep(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  SweepSpec spec;
  std::filesystem::path root;
  try {
    spec = load_sweep(opt.config);
    ExperimentConfig probe;
    try {
      probe = parse_config(spec.base_tree, spec.base);
    } catch (const ConfigError&) {
      // Axis overrides may repair the base; errors surface per row.
    }
    root = resolve_out_dir(opt, probe);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config_error;
  }
  const std::size_t total = spec.size();
  const int workers = std::max(1, std::min<int>(opt.parallel.value_or(spec.parallel), static_cast<int>(total)));
  out << "sweep: " << total << " runs, " << workers << " parallel\n";

  std::filesystem::create_directories(root);
  std::vector<SweepRow> rows(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) rows[i] = run_sweep_point(spec, i, opt, root);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  write_sweep_index(root / "sweep_index.csv", spec, rows);
  for (const auto& r : rows) {
    out << sweep_dir_name(r.index) << ' ' << r.status << " time=" << format_double(r.time) << '\n';
  }
  return exit_code::ok;
}

}  // namespace hks::harness
