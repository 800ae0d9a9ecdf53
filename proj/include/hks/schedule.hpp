#pragma once

// Time-dependent coefficients alpha, beta, gamma, xi (and rho) with pointwise
// evaluation and L^1 integrals of their absolute value.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hks/errors.hpp"

namespace hks {

namespace schedule {

struct Constant {
  double value = 0.0;
};

/// amplitude * exp(-rate * t), rate >= 0.
struct ExpDecay {
  double amplitude = 1.0;
  double rate = 0.0;
};

/// amplitude / (a + b t^2), a > 0, b > 0.
struct Rational {
  double a = 1.0;
  double b = 1.0;
  double amplitude = 1.0;
};

/// Piecewise-linear through sorted (t, value) knots, constant beyond the ends.
struct Tabulated {
  std::vector<std::pair<double, double>> knots;
};

}  // namespace schedule

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50) {
  auto simpson = [](double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); };
  std::function<double(double, double, double, double, double, double, double, int)> recurse =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int depth) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = simpson(flo, flm, fmid, mid - lo);
        const double right = simpson(fmid, frm, fhi, hi - mid);
        const double delta = left + right - whole;
        if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
        return recurse(lo, mid, flo, flm, fmid, left, eps / 2.0, depth - 1) +
               recurse(mid, hi, fmid, frm, fhi, right, eps / 2.0, depth - 1);
      };
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, max_depth);
}

class ParameterSchedule {
 public:
  using Kind = std::variant<schedule::Constant, schedule::ExpDecay, schedule::Rational, schedule::Tabulated>;

  ParameterSchedule() : kind_(schedule::Constant{0.0}) {}
  ParameterSchedule(schedule::Constant c) : kind_(c) {}
  ParameterSchedule(schedule::ExpDecay e) : kind_(e) {
    if (!(e.rate >= 0.0) || !std::isfinite(e.rate) || !std::isfinite(e.amplitude)) {
      throw DomainError("ExpDecay: rate must be finite and >= 0");
    }
  }
  ParameterSchedule(schedule::Rational r) : kind_(r) {
    if (!(r.a > 0.0) || !(r.b > 0.0) || !std::isfinite(r.amplitude)) {
      throw DomainError("Rational: a and b must be > 0");
    }
  }
  ParameterSchedule(schedule::Tabulated t) : kind_(std::move(t)) {
    const auto& k = std::get<schedule::Tabulated>(kind_).knots;
    if (k.empty()) throw DomainError("Tabulated: no knots");
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (!std::isfinite(k[i].first) || !std::isfinite(k[i].second)) {
        throw DomainError("Tabulated: non-finite knot");
      }
      if (i > 0 && !(k[i].first > k[i - 1].first)) {
        throw DomainError("Tabulated: knot times must be strictly increasing");
      }
    }
  }

  static ParameterSchedule constant(double c) { return schedule::Constant{c}; }
  static ParameterSchedule exp_decay(double amplitude, double rate) { return schedule::ExpDecay{amplitude, rate}; }
  static ParameterSchedule rational(double a, double b, double amplitude = 1.0) {
    return schedule::Rational{a, b, amplitude};
  }
  static ParameterSchedule tabulated(std::vector<std::pair<double, double>> knots) {
    return schedule::Tabulated{std::move(knots)};
  }

  const Kind& kind() const noexcept { return kind_; }

  double evaluate(double t) const {
    if (!(t >= 0.0)) throw DomainError("evaluate_schedule: t must be >= 0");
    return std::visit([t](const auto& s) { return value_at(s, t); }, kind_);
  }

  /// Integral of |s| over [t0, t1]; t1 may be +infinity.
  double integral_abs(double t0, double t1) const {
    if (!(t0 >= 0.0)) throw DomainError("integral_abs: t0 must be >= 0");
    if (!(t1 >= t0)) throw DomainError("integral_abs: t1 < t0");
    if (t1 == t0) return 0.0;
    return std::visit([&](const auto& s) { return integral_of(s, t0, t1); }, kind_);
  }

  /// Same schedule multiplied by factor.
  ParameterSchedule scaled(double factor) const {
    return std::visit(
        [factor](const auto& s) -> ParameterSchedule {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, schedule::Constant>) {
            return schedule::Constant{s.value * factor};
          } else if constexpr (std::is_same_v<T, schedule::ExpDecay>) {
            return schedule::ExpDecay{s.amplitude * factor, s.rate};
          } else if constexpr (std::is_same_v<T, schedule::Rational>) {
            return schedule::Rational{s.a, s.b, s.amplitude * factor};
          } else {
            auto knots = s.knots;
            for (auto& k : knots) k.second *= factor;
            return schedule::Tabulated{std::move(knots)};
          }
        },
        kind_);
  }

  bool is_nonnegative() const {
    return std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, schedule::Constant>) {
            return s.value >= 0.0;
          } else if constexpr (std::is_same_v<T, schedule::ExpDecay> || std::is_same_v<T, schedule::Rational>) {
            return s.amplitude >= 0.0;
          } else {
            return std::all_of(s.knots.begin(), s.knots.end(), [](const auto& k) { return k.second >= 0.0; });
          }
        },
        kind_);
  }

  bool is_zero() const {
    return std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, schedule::Constant>) {
            return s.value == 0.0;
          } else if constexpr (std::is_same_v<T, schedule::Tabulated>) {
            return std::all_of(s.knots.begin(), s.knots.end(), [](const auto& k) { return k.second == 0.0; });
          } else {
            return s.amplitude == 0.0;
          }
        },
        kind_);
  }

 private:
  static double value_at(const schedule::Constant& s, double) { return s.value; }
  static double value_at(const schedule::ExpDecay& s, double t) { return s.amplitude * std::exp(-s.rate * t); }
  static double value_at(const schedule::Rational& s, double t) { return s.amplitude / (s.a + s.b * t * t); }
  static double value_at(const schedule::Tabulated& s, double t) {
    const auto& k = s.knots;
    if (t <= k.front().first) return k.front().second;
    if (t >= k.back().first) return k.back().second;
    auto hi = std::upper_bound(k.begin(), k.end(), t, [](double v, const auto& knot) { return v < knot.first; });
    auto lo = hi - 1;
    const double w = (t - lo->first) / (hi->first - lo->first);
    return (1.0 - w) * lo->second + w * hi->second;
  }

  static double integral_of(const schedule::Constant& s, double t0, double t1) {
    if (s.value == 0.0) return 0.0;
    return std::abs(s.value) * (t1 - t0);
  }
  static double integral_of(const schedule::ExpDecay& s, double t0, double t1) {
    if (s.amplitude == 0.0) return 0.0;
    if (s.rate == 0.0) return std::abs(s.amplitude) * (t1 - t0);
    // -expm1 keeps precision when rate * (t1 - t0) is small.
    const double span = std::isinf(t1) ? 1.0 : -std::expm1(-s.rate * (t1 - t0));
    return std::abs(s.amplitude) * std::exp(-s.rate * t0) * span / s.rate;
  }
  static double integral_of(const schedule::Rational& s, double t0, double t1) {
    if (s.amplitude == 0.0) return 0.0;
    const double w = std::sqrt(s.b / s.a);
    return std::abs(s.amplitude) * (std::atan(t1 * w) - std::atan(t0 * w)) / std::sqrt(s.a * s.b);
  }
  static double integral_of(const schedule::Tabulated& s, double t0, double t1) {
    const auto& k = s.knots;
    double total = 0.0;
    double end = t1;
    if (std::isinf(t1)) {
      if (k.back().second != 0.0) return std::numeric_limits<double>::infinity();
      end = std::max(t0, k.back().first);
    }
    // Split at knots; Simpson is exact on each linear piece unless |.| kinks inside.
    std::vector<double> cuts{t0};
    for (const auto& knot : k) {
      if (knot.first > t0 && knot.first < end) cuts.push_back(knot.first);
    }
    cuts.push_back(end);
    auto f = [&s](double t) { return std::abs(value_at(s, t)); };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      total += adaptive_simpson(f, cuts[i], cuts[i + 1], 1e-10 / static_cast<double>(cuts.size()));
    }
    return total;
  }

  Kind kind_;
};

inline double evaluate_schedule(const ParameterSchedule& s, double t) { return s.evaluate(t); }
inline double integral_abs(const ParameterSchedule& s, double t0, double t1) { return s.integral_abs(t0, t1); }

}  // namespace hks
