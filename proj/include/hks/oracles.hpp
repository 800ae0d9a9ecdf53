#pragma once

// Closed-form global-existence conditions, blow-up time lower bounds and
// empirical checks of the iterative and stability estimates.
//
// C is the single unnamed constant of the theory; every oracle takes it from
// TheoryConfig and all empirical checks report the smallest C consistent with
// the observation rather than assuming C = 1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "hks/besov.hpp"
#include "hks/dynamics.hpp"
#include "hks/errors.hpp"
#include "hks/integrator.hpp"
#include "hks/schedule.hpp"
#include "json.hpp"

namespace hks {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct TheoryConfig {
  double C = 1.0;
  BesovIndex besov_index{2.0, 2.0, 1.0};  ///< index measuring ||u0|| in the non-critical theory
  /// Treat an observed blow-up before T(u0) as a hard failure (the lower
  /// bound is only meaningful for the true, unknown C).
  bool strict_lower_bound = false;

  void validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("theory.C: must be > 0");
    besov_index.validate();
  }
};

/// Integrals of the coefficient magnitudes over [0, infinity).
struct IntegralBundle {
  double ab = 0.0;     ///< int |alpha| + |beta|
  double total = 0.0;  ///< int |alpha| + |beta| + |gamma| + |xi|
  std::optional<HksParams> params;

  static IntegralBundle from_params(const HksParams& p) {
    const double a = p.alpha.integral_abs(0.0, kInf);
    const double b = p.beta.integral_abs(0.0, kInf);
    const double g = p.gamma.integral_abs(0.0, kInf);
    const double x = p.xi.integral_abs(0.0, kInf);
    return {a + b, a + b + g + x, p};
  }
  static IntegralBundle from_totals(double ab, double total) {
    if (!(ab >= 0.0) || !(total >= ab)) throw DomainError("IntegralBundle: require 0 <= I_ab <= I_total");
    return {ab, total, std::nullopt};
  }

  /// int_0^t (|alpha| + |beta| + |gamma| + |xi|).
  double partial(double t) const {
    if (!params) throw DomainError("IntegralBundle: partial() needs the schedules");
    const auto& p = *params;
    return p.alpha.integral_abs(0.0, t) + p.beta.integral_abs(0.0, t) + p.gamma.integral_abs(0.0, t) +
           p.xi.integral_abs(0.0, t);
  }
};

/// JSON value for a double; non-finite values become "inf", "-inf", "nan".
inline nlohmann::json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

struct OracleReport {
  std::string condition;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool satisfied = false;
  double C = 1.0;

  nlohmann::json to_json() const {
    return {{"condition", condition}, {"lhs", json_number(lhs)},     {"rhs", json_number(rhs)},
            {"ratio", json_number(ratio)}, {"satisfied", satisfied}, {"C", json_number(C)}};
  }
};

struct HValue {
  double value = 0.0;
  bool overflow = false;
};

/// h(x) = exp(4 C^3 x^2 I_ab) (x + 8 C^3 x^3 I_total).
inline HValue h_function(double x, const IntegralBundle& b, const TheoryConfig& cfg) {
  if (!(x >= 0.0)) throw DomainError("h_function: x must be >= 0");
  const double c3 = cfg.C * cfg.C * cfg.C;
  const double exponent = 4.0 * c3 * x * x * b.ab;
  const double poly = x + 8.0 * c3 * x * x * x * b.total;
  if (x == 0.0) return {0.0, false};
  const double v = std::exp(exponent) * poly;
  if (!std::isfinite(v)) return {kInf, true};
  return {v, false};
}

/// int (|alpha|+|beta|+|gamma|+|xi|) <= ln 2 / (12 C^3 h^2(1 + ||u0||)).
inline OracleReport global_threshold_ok(double u0_norm, const IntegralBundle& b, const TheoryConfig& cfg) {
  if (!(u0_norm >= 0.0)) throw DomainError("global_threshold_ok: norm must be >= 0");
  const double c3 = cfg.C * cfg.C * cfg.C;
  const auto h = h_function(1.0 + u0_norm, b, cfg);
  const double rhs = h.overflow ? 0.0 : std::numbers::ln2 / (12.0 * c3 * h.value * h.value);
  const double lhs = b.total;
  double ratio = 0.0;
  if (lhs > 0.0) ratio = h.overflow ? kInf : lhs * 12.0 * c3 * h.value * h.value / std::numbers::ln2;
  return {"global_existence", lhs, rhs, ratio, ratio <= 1.0, cfg.C};
}

/// exp((16C^3/l)(1+x)^2) (1 + x + (28C^3/l)(1+x)^3)^2 <= l ln2 / (42 C^3).
inline OracleReport corollary_lambda_ok(double u0_norm, double lambda, const TheoryConfig& cfg) {
  if (!(lambda > 0.0)) throw DomainError("corollary_lambda_ok: lambda must be > 0");
  if (!(u0_norm >= 0.0)) throw DomainError("corollary_lambda_ok: norm must be >= 0");
  const double c3 = cfg.C * cfg.C * cfg.C;
  const double y = 1.0 + u0_norm;
  const double log_lhs = 16.0 * c3 / lambda * y * y + 2.0 * std::log(y + 28.0 * c3 / lambda * y * y * y);
  const double log_rhs = std::log(lambda * std::numbers::ln2 / (42.0 * c3));
  return {"dissipation_lambda", std::exp(log_lhs), std::exp(log_rhs), std::exp(log_lhs - log_rhs),
          log_lhs <= log_rhs, cfg.C};
}

/// Sufficient dissipation 120 C^3 (1 + ||u0||)^2 / ln 2.
inline double lambda_star(double u0_norm, const TheoryConfig& cfg) {
  const double y = 1.0 + u0_norm;
  return 120.0 * cfg.C * cfg.C * cfg.C * y * y / std::numbers::ln2;
}

/// 2 C h(1 + ||u0||).
inline double uniform_bound_value(double u0_norm, const IntegralBundle& b, const TheoryConfig& cfg) {
  const auto h = h_function(1.0 + u0_norm, b, cfg);
  return h.overflow ? kInf : 2.0 * cfg.C * h.value;
}

/// Which smallness requirement on I_total is tighter: the global-existence
/// threshold or the one that makes T(u0) infinite.
inline std::string binding_condition(double u0_norm, const IntegralBundle& b, const TheoryConfig& cfg) {
  const double y = 1.0 + u0_norm;
  const double global = global_threshold_ok(u0_norm, b, cfg).rhs;
  return global <= 1.0 / (cfg.C * y * y) ? "global_existence" : "blowup_lower_bound";
}

enum class RootMethod { automatic, bisection };

namespace detail {

/// Closed form of the crossing time when every nonzero schedule has the same
/// closed-form shape.
inline std::optional<double> crossing_closed_form(const HksParams& p, double threshold) {
  const std::array<const ParameterSchedule*, 4> all = {&p.alpha, &p.beta, &p.gamma, &p.xi};
  std::vector<const ParameterSchedule*> live;
  for (auto* s : all) {
    if (!s->is_zero()) live.push_back(s);
  }
  if (live.empty()) return std::nullopt;
  auto all_of_kind = [&]<class K>(std::type_identity<K>) {
    return std::all_of(live.begin(), live.end(), [](auto* s) { return std::holds_alternative<K>(s->kind()); });
  };
  if (all_of_kind(std::type_identity<schedule::Constant>{})) {
    double a = 0.0;
    for (auto* s : live) a += std::abs(std::get<schedule::Constant>(s->kind()).value);
    return threshold / a;
  }
  if (all_of_kind(std::type_identity<schedule::ExpDecay>{})) {
    const double rate = std::get<schedule::ExpDecay>(live.front()->kind()).rate;
    double amp = 0.0;
    for (auto* s : live) {
      const auto& e = std::get<schedule::ExpDecay>(s->kind());
      if (e.rate != rate) return std::nullopt;
      amp += std::abs(e.amplitude);
    }
    if (rate == 0.0) return threshold / amp;
    const double arg = threshold * rate / amp;
    if (arg >= 1.0) return kInf;
    return -std::log1p(-arg) / rate;
  }
  if (all_of_kind(std::type_identity<schedule::Rational>{})) {
    const auto& r0 = std::get<schedule::Rational>(live.front()->kind());
    double amp = 0.0;
    for (auto* s : live) {
      const auto& r = std::get<schedule::Rational>(s->kind());
      if (r.a != r0.a || r.b != r0.b) return std::nullopt;
      amp += std::abs(r.amplitude);
    }
    const double angle = threshold * std::sqrt(r0.a * r0.b) / amp;
    if (angle >= 0.5 * std::numbers::pi) return kInf;
    return std::tan(angle) / std::sqrt(r0.b / r0.a);
  }
  return std::nullopt;
}

}  // namespace detail

/// sup{t : int_0^t (|alpha|+|beta|+|gamma|+|xi|) <= threshold}.
inline double accumulator_crossing_time(const HksParams& p, double threshold, RootMethod method = RootMethod::automatic) {
  if (!(threshold >= 0.0)) throw DomainError("accumulator_crossing_time: threshold must be >= 0");
  const auto bundle = IntegralBundle::from_params(p);
  if (bundle.total <= threshold) return kInf;
  if (method == RootMethod::automatic) {
    if (auto t = detail::crossing_closed_form(p, threshold)) return *t;
  }
  double lo = 0.0, hi = 1.0;
  while (bundle.partial(hi) <= threshold) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bundle.partial(mid) <= threshold) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// T(u0) with threshold 1 / (C (1 + ||u0||_{B^{1+d/2}_{2,1}})^2).
inline double blowup_lower_bound_critical(double u0_norm, const HksParams& p, const TheoryConfig& cfg,
                                          RootMethod method = RootMethod::automatic) {
  const double y = 1.0 + u0_norm;
  return accumulator_crossing_time(p, 1.0 / (cfg.C * y * y), method);
}

/// T'(u0) with threshold 1 / (C (e + ||u0||_{B^s_{p,r}})^6).
inline double blowup_lower_bound_noncritical(double u0_norm, const HksParams& p, const TheoryConfig& cfg,
                                             RootMethod method = RootMethod::automatic) {
  const double y = std::numbers::e + u0_norm;
  return accumulator_crossing_time(p, 1.0 / (cfg.C * std::pow(y, 6)), method);
}

enum class Criterion { critical_b0_inf1, noncritical_b0_inf2 };

/// Trapezoid integral of (|alpha|+...+|xi|)(||u||^2 + ||grad u||^2) over the
/// recorded times, in B-dot^0_{inf,1} or B-dot^0_{inf,2}.
inline double criterion_integral(const RunRecord& rec, Criterion which) {
  const bool first = which == Criterion::critical_b0_inf1;
  const auto& a = rec.series(column::sched_abs);
  const auto& u = rec.series(first ? column::hb0_inf1_u : column::hb0_inf2_u);
  const auto& g = rec.series(first ? column::hb0_inf1_gu : column::hb0_inf2_gu);
  double total = 0.0;
  for (std::size_t i = 1; i < rec.times.size(); ++i) {
    const double f0 = a[i - 1] * (u[i - 1] * u[i - 1] + g[i - 1] * g[i - 1]);
    const double f1 = a[i] * (u[i] * u[i] + g[i] * g[i]);
    total += 0.5 * (rec.times[i] - rec.times[i - 1]) * (f0 + f1);
  }
  return total;
}

struct Lemma31Report {
  double numeric_sup = 0.0;  ///< sup_t g_{n+1}(t) of the worst-case recursion
  double bound = 0.0;
  double slack = 0.0;        ///< bound - numeric_sup
  double mu_l1 = 0.0;
};

namespace detail {

/// Cumulative integral of f dm on increasing nodes m; each interval is
/// integrated exactly for the quintic through the six nearest nodes.
inline std::vector<double> cumulative_integral(std::span<const double> m, std::span<const double> f) {
  std::vector<double> out(m.size(), 0.0);
  static constexpr std::array<double, 3> gx = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  constexpr std::size_t width = 6;
  const std::size_t n = m.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dm = m[i + 1] - m[i];
    double piece = 0.0;
    if (dm > 0.0) {
      const std::size_t w = std::min(width, n);
      std::size_t lo = i + 1 >= w / 2 ? i + 1 - w / 2 : 0;
      lo = std::min(lo, n - w);
      auto interp = [&](double x) {
        double v = 0.0;
        for (std::size_t a = lo; a < lo + w; ++a) {
          double l = 1.0;
          for (std::size_t b = lo; b < lo + w; ++b) {
            if (a != b) l *= (x - m[b]) / (m[a] - m[b]);
          }
          v += l * f[a];
        }
        return v;
      };
      const double mid = 0.5 * (m[i] + m[i + 1]);
      for (std::size_t q = 0; q < 3; ++q) piece += gw[q] * interp(mid + 0.5 * dm * gx[q]);
      piece *= 0.5 * dm;
    }
    out[i + 1] = out[i] + piece;
  }
  return out;
}

}  // namespace detail

inline constexpr double kLemmaSlackTolerance = 1e-8;

/// Runs g_{k+1}(t) = a_k + int_0^t mu g_k (g_0 = const) on a fine grid over
/// [0, horizon] and compares sup_t g_{n+1} with
/// sum_{k<=n} a_{n-k} M^k / k! + g0 M^{n+1} / (n+1)!,  M = int_0^horizon mu.
inline Lemma31Report lemma31_check(std::span<const double> a, const ParameterSchedule& mu, double g0, int n,
                                   double horizon, int intervals = 10000) {
  if (n < 0) throw DomainError("lemma31_check: n must be >= 0");
  if (a.size() < static_cast<std::size_t>(n) + 1) throw DomainError("lemma31_check: need a_0..a_n");
  if (!mu.is_nonnegative()) throw DomainError("lemma31_check: mu must be nonnegative");
  if (!(g0 >= 0.0)) throw DomainError("lemma31_check: g0 must be >= 0");
  if (!(horizon > 0.0)) throw DomainError("lemma31_check: horizon must be > 0");
  for (std::size_t k = 0; k <= static_cast<std::size_t>(n); ++k) {
    if (!(a[k] >= 0.0)) throw DomainError("lemma31_check: a_k must be nonnegative");
  }

  // The recursion sees t only through m(t) = int_0^t mu, so it is run on a
  // uniform grid in m over [0, M].
  const double M_total = mu.integral_abs(0.0, horizon);
  const auto nodes = static_cast<std::size_t>(intervals) + 1;
  std::vector<double> m(nodes);
  for (std::size_t i = 0; i < nodes; ++i) m[i] = M_total * static_cast<double>(i) / intervals;
  m.back() = M_total;
  std::vector<double> g(nodes, g0);
  for (int k = 0; k <= n; ++k) {
    const auto cum = detail::cumulative_integral(m, g);
    for (std::size_t i = 0; i < nodes; ++i) g[i] = a[static_cast<std::size_t>(k)] + cum[i];
  }
  const double sup = *std::max_element(g.begin(), g.end());

  const double M = m.back();
  double bound = 0.0;
  double term = 1.0;  // M^k / k!
  for (int k = 0; k <= n; ++k) {
    if (k > 0) term *= M / k;
    bound += a[static_cast<std::size_t>(n - k)] * term;
  }
  bound += g0 * term * M / (n + 1);

  Lemma31Report rep{sup, bound, bound - sup, M};
  if (rep.slack < -kLemmaSlackTolerance) {
    throw LemmaViolationError("lemma31_check: numeric recursion exceeds bound by " + std::to_string(-rep.slack));
  }
  return rep;
}

struct StabilityReport {
  std::vector<double> times;
  std::vector<double> difference;  ///< ||u1(t) - u2(t)||_{B^{s-1}}
  std::vector<double> exponent;    ///< int_0^t A (1 + ||u1|| + ||u2||)^2
  std::vector<double> c_min;       ///< smallest C making the estimate hold at t
  double c_max = 0.0;              ///< max over t of c_min
};

/// Smallest C per recorded time with
/// ||u1(t)-u2(t)||_{B^{s-1}} <= ||u1(0)-u2(0)||_{B^{s-1}} exp(C int_0^t A (1+||u1||_{B^s}+||u2||_{B^s})^2).
inline StabilityReport stability_check(const RunRecord& run1, const RunRecord& run2, double s, const TheoryConfig& cfg) {
  if (run1.trajectory.empty() || run2.trajectory.empty()) {
    throw MissingSeriesError("stability_check: runs must keep their trajectories");
  }
  if (run1.trajectory.size() != run2.trajectory.size() || run1.times != run2.times) {
    throw GridMismatchError("stability_check: runs recorded at different times");
  }
  const auto& grid = run1.trajectory.front().grid();
  if (!(grid == run2.trajectory.front().grid())) throw GridMismatchError("stability_check: grid mismatch");
  const BesovIndex idx{s, cfg.besov_index.p, cfg.besov_index.r};
  idx.validate();
  if (std::abs(s - (2.0 + grid.dim() / idx.p)) < 1e-12) {
    throw DomainError("stability_check: s = 2 + d/p is the interpolated case");
  }
  const BesovIndex lower{s - 1.0, idx.p, idx.r};
  const auto& a = run1.series(column::sched_abs);

  StabilityReport rep;
  rep.times = run1.times;
  double J = 0.0, last = 0.0;
  for (std::size_t i = 0; i < run1.times.size(); ++i) {
    const auto& u1 = run1.trajectory[i];
    const auto& u2 = run2.trajectory[i];
    const double diff = besov_norm(u1 - u2, lower);
    const double w = 1.0 + besov_norm(u1, idx) + besov_norm(u2, idx);
    const double integrand = a[i] * w * w;
    if (i > 0) J += 0.5 * (run1.times[i] - run1.times[i - 1]) * (last + integrand);
    last = integrand;
    rep.difference.push_back(diff);
    rep.exponent.push_back(J);
    const double d0 = rep.difference.front();
    double c = 0.0;
    if (d0 == 0.0) {
      c = diff == 0.0 ? 0.0 : kInf;
    } else if (diff > d0) {
      c = J > 0.0 ? std::log(diff / d0) / J : kInf;
    }
    rep.c_min.push_back(c);
    rep.c_max = std::max(rep.c_max, c);
  }
  return rep;
}

/// Smallest C with observed_sup <= 2 C h_C(1 + ||u0||), by bisection.
inline double minimal_constant_for_bound(double observed_sup, double u0_norm, const IntegralBundle& b) {
  if (!(observed_sup >= 0.0)) throw DomainError("minimal_constant_for_bound: negative observation");
  if (observed_sup == 0.0) return 0.0;
  // With a divergent coefficient integral the bound is infinite for every C > 0.
  if (!std::isfinite(b.total)) return std::numeric_limits<double>::quiet_NaN();
  auto bound_at = [&](double C) { return uniform_bound_value(u0_norm, b, TheoryConfig{C}); };
  double lo = 0.0, hi = 1.0;
  while (bound_at(hi) < observed_sup) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bound_at(mid) >= observed_sup) hi = mid;
    else lo = mid;
  }
  return hi;
}

/// Largest C for which the dissipation condition holds at this lambda.
inline double maximal_constant_for_lambda(double u0_norm, double lambda) {
  auto ok = [&](double C) { return corollary_lambda_ok(u0_norm, lambda, TheoryConfig{C}).satisfied; };
  double lo = 0.0, hi = 1.0;
  if (!ok(1e-300)) return 0.0;
  while (ok(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace hks
