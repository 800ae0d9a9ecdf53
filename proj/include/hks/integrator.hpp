#pragma once

// Classical RK4 with CFL-limited steps, gradient blow-up detection and
// sampled norm monitors.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hks/besov.hpp"
#include "hks/dynamics.hpp"
#include "hks/errors.hpp"
#include "hks/spectral.hpp"

namespace hks {

struct SolverConfig {
  double dt = 1e-2;      ///< initial / maximal step
  double dt_min = 1e-9;  ///< smallest step before StepUnderflow
  double t_end = 1.0;
  double cfl = 0.4;
  double grad_blowup_threshold = 1e4;
  int record_every = 10;
  bool keep_trajectory = false;  ///< store the field at every recorded time

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("solver.dt: must be > 0");
    if (!(dt_min > 0.0)) throw ConfigError("solver.dt_min: must be > 0");
    if (!(dt_min <= dt)) throw ConfigError("solver.dt_min: must be <= solver.dt");
    if (!(t_end > 0.0)) throw ConfigError("solver.t_end: must be > 0");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("solver.cfl: must lie in (0, 1]");
    if (!(grad_blowup_threshold > 0.0)) throw ConfigError("solver.grad_blowup_threshold: must be > 0");
    if (record_every < 1) throw ConfigError("solver.record_every: must be >= 1");
  }
};

struct RunStatus {
  enum class Kind { completed, blow_up, step_underflow };
  Kind kind = Kind::completed;
  double time = 0.0;

  std::string label() const {
    switch (kind) {
      case Kind::completed:
        return "completed";
      case Kind::blow_up:
        return "blowup";
      case Kind::step_underflow:
        return "step_underflow";
    }
    return "unknown";
  }
};

namespace column {
inline constexpr const char* mass = "mass";
inline constexpr const char* linf_u = "linf_u";
inline constexpr const char* linf_grad_u = "linf_grad_u";
inline constexpr const char* besov = "besov_s_p_r";
inline constexpr const char* hb0_inf1_u = "hb0_inf1_u";
inline constexpr const char* hb0_inf1_gu = "hb0_inf1_gu";
inline constexpr const char* hb0_inf2_u = "hb0_inf2_u";
inline constexpr const char* hb0_inf2_gu = "hb0_inf2_gu";
inline constexpr const char* crit_acc_1 = "crit_acc_1";
inline constexpr const char* crit_acc_2 = "crit_acc_2";
/// |alpha| + |beta| + |gamma| + |xi| at the sample time.
inline constexpr const char* sched_abs = "sched_abs";
}  // namespace column

/// Standard CSV column order after "t".
inline const std::vector<std::string>& standard_columns() {
  static const std::vector<std::string> cols = {
      column::mass,       column::linf_u,      column::linf_grad_u, column::besov,
      column::hb0_inf1_u, column::hb0_inf1_gu, column::hb0_inf2_u,  column::hb0_inf2_gu,
      column::crit_acc_1, column::crit_acc_2,  column::sched_abs};
  return cols;
}

struct Monitor {
  std::string name;
  std::function<double(const RealField&, double)> eval;
};

struct MonitorSet {
  BesovIndex besov{1.5, 2.0, 1.0};
  std::vector<Monitor> extra;

  static MonitorSet standard(int dim) { return {BesovIndex::critical(dim), {}}; }
};

struct RunRecord {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> monitored;
  RunStatus status;
  std::vector<RealField> trajectory;  ///< filled when keep_trajectory is set
  std::optional<RealField> final_state;

  const std::vector<double>& series(const std::string& name) const {
    auto it = monitored.find(name);
    if (it == monitored.end()) throw MissingSeriesError("RunRecord: no series '" + name + "'");
    return it->second;
  }
  bool has(const std::string& name) const { return monitored.count(name) != 0; }
};

/// One classical Runge-Kutta step; stages see t, t+dt/2, t+dt/2, t+dt.
inline RealField rk4_step(const RealField& u, double t, double dt, const RhsFunction& rhs) {
  if (!(dt > 0.0)) throw DomainError("rk4_step: dt must be > 0");
  auto check = [t](const RealField& f) {
    if (!f.all_finite()) throw DivergenceError("rk4_step: non-finite stage", t);
  };
  const RealField k1 = rhs(u, t);
  check(k1);
  RealField stage = u;
  stage.axpy(0.5 * dt, k1);
  const RealField k2 = rhs(stage, t + 0.5 * dt);
  check(k2);
  stage = u;
  stage.axpy(0.5 * dt, k2);
  const RealField k3 = rhs(stage, t + 0.5 * dt);
  check(k3);
  stage = u;
  stage.axpy(dt, k3);
  const RealField k4 = rhs(stage, t + dt);
  check(k4);
  RealField out = u;
  const double w = dt / 6.0;
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  check(out);
  return out;
}

/// Fixed-step RK4 over [0, t_end] with ceil(t_end / dt) uniform steps;
/// returns the state at every step (index 0 is u0).
inline std::vector<RealField> integrate_fixed(const RealField& u0, const RhsFunction& rhs, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw DomainError("integrate_fixed: dt and t_end must be > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);
  std::vector<RealField> out;
  out.reserve(steps + 1);
  out.push_back(u0);
  for (std::size_t i = 0; i < steps; ++i) out.push_back(rk4_step(out.back(), i * h, h, rhs));
  return out;
}

inline constexpr double kSpeedFloor = 1e-12;

/// min(cfg.dt, cfl h / max(eps, |(alpha + beta u) grad S|_inf)).
inline double adaptive_dt(const RealField& u, double t, const HksParams& p, const SolverConfig& cfg) {
  if (!u.all_finite()) throw DivergedInputError("adaptive_dt: non-finite field");
  const double speed = std::max(kSpeedFloor, advective_speed(u, t, p));
  const double dt = std::min(cfg.dt, cfg.cfl * u.grid().spacing() / speed);
  if (dt < cfg.dt_min) throw StepUnderflowError("adaptive_dt: step below dt_min", t, dt);
  return dt;
}

namespace detail {

inline double sup_gradient(const RealField& u) {
  const auto g = gradient_of(forward_unchecked(u));
  return max_magnitude(g);
}

class Recorder {
 public:
  Recorder(RunRecord& rec, const HksParams& params, const MonitorSet& monitors, bool keep)
      : rec_(rec), params_(params), monitors_(monitors), keep_(keep) {}

  void sample(const RealField& u, double t) {
    const double a = params_.abs_sum(t);
    const double grad = sup_gradient(u);
    const auto hb_u = homogeneous_block_sup_norms(u);
    const auto hb_g = homogeneous_gradient_block_sup_norms(u);
    const double u1 = detail::sequence_norm(hb_u, 1.0), g1 = detail::sequence_norm(hb_g, 1.0);
    const double u2 = detail::sequence_norm(hb_u, 2.0), g2 = detail::sequence_norm(hb_g, 2.0);
    const double integrand1 = a * (u1 * u1 + g1 * g1);
    const double integrand2 = a * (u2 * u2 + g2 * g2);
    if (!rec_.times.empty()) {
      const double h = t - rec_.times.back();
      acc1_ += 0.5 * h * (last1_ + integrand1);
      acc2_ += 0.5 * h * (last2_ + integrand2);
    }
    last1_ = integrand1;
    last2_ = integrand2;

    rec_.times.push_back(t);
    auto& m = rec_.monitored;
    m[column::mass].push_back(mass(u));
    m[column::linf_u].push_back(lp_norm(u, std::numeric_limits<double>::infinity()));
    m[column::linf_grad_u].push_back(grad);
    m[column::besov].push_back(besov_norm(u, monitors_.besov));
    m[column::hb0_inf1_u].push_back(u1);
    m[column::hb0_inf1_gu].push_back(g1);
    m[column::hb0_inf2_u].push_back(u2);
    m[column::hb0_inf2_gu].push_back(g2);
    m[column::crit_acc_1].push_back(acc1_);
    m[column::crit_acc_2].push_back(acc2_);
    m[column::sched_abs].push_back(a);
    for (const auto& extra : monitors_.extra) m[extra.name].push_back(extra.eval(u, t));
    if (keep_) rec_.trajectory.push_back(u);
  }

 private:
  RunRecord& rec_;
  const HksParams& params_;
  const MonitorSet& monitors_;
  bool keep_;
  double acc1_ = 0.0, acc2_ = 0.0, last1_ = 0.0, last2_ = 0.0;
};

}  // namespace detail

/// Integrates a variant from u0 until t_end, blow-up, or step underflow.
///
/// Monitors are sampled at t = 0, every `record_every` accepted steps, and at
/// the final accepted state. Blow-up means ||grad u||_inf above the configured
/// threshold or a non-finite stage; the reported time is the last accepted t.
inline RunRecord integrate(const RealField& u0, const EquationVariant& variant, const SolverConfig& cfg,
                           const MonitorSet& monitors) {
  cfg.validate();
  if (!u0.all_finite()) throw DivergedInputError("integrate: non-finite initial data");
  const HksParams params = params_of(variant);
  const RhsFunction rhs = make_rhs(variant);

  RunRecord rec;
  detail::Recorder recorder(rec, params, monitors, cfg.keep_trajectory);
  RealField u = u0;
  double t = 0.0;
  long long steps = 0;
  recorder.sample(u, t);
  bool sampled_last = true;
  rec.status = {RunStatus::Kind::completed, 0.0};

  while (t < cfg.t_end) {
    double dt = 0.0;
    try {
      dt = adaptive_dt(u, t, params, cfg);
    } catch (const StepUnderflowError& e) {
      rec.status = {RunStatus::Kind::step_underflow, t};
      break;
    }
    const double remaining = cfg.t_end - t;
    const bool last = dt >= remaining * (1.0 - 1e-12);
    if (last) dt = remaining;
    RealField next(u.grid());
    try {
      next = rk4_step(u, t, dt, rhs);
    } catch (const DivergenceError&) {
      rec.status = {RunStatus::Kind::blow_up, t};
      break;
    }
    u = std::move(next);
    t = last ? cfg.t_end : t + dt;
    ++steps;
    sampled_last = false;

    const double grad = detail::sup_gradient(u);
    if (!std::isfinite(grad) || grad > cfg.grad_blowup_threshold) {
      recorder.sample(u, t);
      sampled_last = true;
      rec.status = {RunStatus::Kind::blow_up, t};
      break;
    }
    if (steps % cfg.record_every == 0 || last) {
      recorder.sample(u, t);
      sampled_last = true;
    }
  }
  if (!sampled_last) recorder.sample(u, t);
  if (rec.status.kind == RunStatus::Kind::completed) rec.status.time = t;
  rec.final_state = std::move(u);
  return rec;
}

}  // namespace hks
