#pragma once

// Right-hand sides of the hyperbolic Keller-Segel family
//
//   u_t + (alpha + beta u) grad S . grad u + (gamma u + xi u^2) Lap S = 0,
//   S = (1 - Lap)^{-1} u,
//
// and the specializations obtained from particular coefficient choices.
// Quadratic and cubic products are formed in physical space from
// 2/3-truncated inputs and truncated again afterwards.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "hks/errors.hpp"
#include "hks/schedule.hpp"
#include "hks/spectral.hpp"

namespace hks {

/// Coefficient tuple (alpha, beta, gamma, xi) of the unified equation.
struct HksParams {
  ParameterSchedule alpha;
  ParameterSchedule beta;
  ParameterSchedule gamma;
  ParameterSchedule xi;

  std::array<double, 4> at(double t) const {
    return {alpha.evaluate(t), beta.evaluate(t), gamma.evaluate(t), xi.evaluate(t)};
  }
  /// |alpha| + |beta| + |gamma| + |xi| at time t.
  double abs_sum(double t) const {
    const auto c = at(t);
    return std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]) + std::abs(c[3]);
  }
  static HksParams constant(double a, double b, double g, double x) {
    return {ParameterSchedule::constant(a), ParameterSchedule::constant(b), ParameterSchedule::constant(g),
            ParameterSchedule::constant(x)};
  }
};

/// Which coefficient table to trust where the written table and the
/// equation it describes disagree.
///
/// `derived` uses the coefficients obtained by expanding the equation;
/// `printed` reproduces the table as written (kept for comparison runs).
enum class SignConvention { derived, printed };

namespace variant {

struct Unified {
  HksParams params;
};
/// u_t + div(u(1-u) grad S) = 0.
struct Classical {
  SignConvention convention = SignConvention::derived;
};
/// u_t + div(rho(t) u(1-u) grad S) = 0, evaluated in conservative form.
struct SensitivityAdjusted {
  ParameterSchedule rho;
};
/// Classical equation with the weak dissipation -lambda u.
struct Damped {
  double lambda = 1.0;
};
/// The damped equation after the substitution v = exp(lambda t) u.
struct Transformed {
  double lambda = 1.0;
  SignConvention convention = SignConvention::derived;
};

}  // namespace variant

using EquationVariant = std::variant<variant::Unified, variant::Classical, variant::SensitivityAdjusted,
                                     variant::Damped, variant::Transformed>;

/// Coefficient tuple reproducing a named equation inside the unified form.
inline HksParams specialize_parameters(const EquationVariant& v) {
  return std::visit(
      [](const auto& e) -> HksParams {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, variant::Unified>) {
          throw DomainError("specialize_parameters: Unified is already specialized");
        } else if constexpr (std::is_same_v<T, variant::Classical>) {
          if (e.convention == SignConvention::printed) return HksParams::constant(1, 1, 1, 1);
          return HksParams::constant(1, -2, 1, -1);
        } else if constexpr (std::is_same_v<T, variant::SensitivityAdjusted>) {
          return {e.rho, e.rho.scaled(-2.0), e.rho, e.rho.scaled(-1.0)};
        } else if constexpr (std::is_same_v<T, variant::Damped>) {
          throw DomainError("specialize_parameters: the damped equation has a source term outside the unified form");
        } else {
          if (!(e.lambda > 0.0)) throw DomainError("Transformed: lambda must be > 0");
          const double xi_sign = e.convention == SignConvention::printed ? 1.0 : -1.0;
          return {ParameterSchedule::exp_decay(1.0, e.lambda), ParameterSchedule::exp_decay(-2.0, 2.0 * e.lambda),
                  ParameterSchedule::exp_decay(1.0, e.lambda), ParameterSchedule::exp_decay(xi_sign, 2.0 * e.lambda)};
        }
      },
      v);
}

/// Transport coefficients governing a variant (the damped equation reports
/// its classical transport part).
inline HksParams params_of(const EquationVariant& v) {
  if (const auto* u = std::get_if<variant::Unified>(&v)) return u->params;
  if (std::holds_alternative<variant::Damped>(v)) return HksParams::constant(1, -2, 1, -1);
  return specialize_parameters(v);
}

using RhsFunction = std::function<RealField(const RealField&, double)>;

namespace detail {

/// Dealiased u, its gradient, grad S and Lap S, all from one transform.
struct TransportState {
  RealField u;
  std::vector<RealField> grad_u;
  std::vector<RealField> grad_s;
  RealField lap_s;
};

inline TransportState transport_state(const RealField& u) {
  auto U = forward_unchecked(u);
  truncate_two_thirds(U);
  const auto& grid = u.grid();
  SpectralField S = U;
  {
    auto c = S.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= bessel_symbol(grid, i);
  }
  // Lap S = S - u, formed spectrally so constants give exactly zero.
  RealField lap_s = apply_multiplier(U, [&](std::size_t i) {
    const double k2 = static_cast<double>(grid.wavenumber_sq(i));
    return Complex(-k2 / (1.0 + k2), 0.0);
  });
  return {inverse_unchecked(U), gradient_of(U), gradient_of(S), std::move(lap_s)};
}

inline void require_finite(const RealField& f, const char* where, double t) {
  if (!f.all_finite()) throw DivergenceError(std::string(where) + ": non-finite values", t);
}

}  // namespace detail

/// du/dt of the unified equation.
inline RealField rhs_unified(const RealField& u, double t, const HksParams& p) {
  detail::require_finite(u, "rhs_unified", t);
  const auto [a, b, g, x] = p.at(t);
  const auto st = detail::transport_state(u);
  RealField out(u.grid());
  const int dim = u.grid().dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double ui = st.u[i];
    double adv = 0.0;
    for (int d = 0; d < dim; ++d) adv += st.grad_s[d][i] * st.grad_u[d][i];
    out[i] = -(a + b * ui) * adv - (g * ui + x * ui * ui) * st.lap_s[i];
  }
  out = dealias(out);
  detail::require_finite(out, "rhs_unified", t);
  return out;
}

/// du/dt = -div(rho(t) u (1 - u) grad S), conservative form.
inline RealField rhs_divergence(const RealField& u, double t, const ParameterSchedule& rho) {
  detail::require_finite(u, "rhs_divergence", t);
  const double r = rho.evaluate(t);
  const auto st = detail::transport_state(u);
  const auto& grid = u.grid();
  SpectralField acc(grid);
  for (int d = 0; d < grid.dim(); ++d) {
    RealField flux(grid);
    for (std::size_t i = 0; i < flux.size(); ++i) flux[i] = r * st.u[i] * (1.0 - st.u[i]) * st.grad_s[d][i];
    auto F = detail::forward_unchecked(flux);
    auto out = acc.coeffs();
    auto in = F.coeffs();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= derivative_symbol(grid, i, d) * in[i];
  }
  truncate_two_thirds(acc);
  auto out = detail::inverse_unchecked(acc);
  detail::require_finite(out, "rhs_divergence", t);
  return out;
}

/// du/dt = -(1 - 2u) grad S . grad u - (u - u^2) Lap S - lambda u.
inline RealField rhs_damped(const RealField& u, double t, double lambda) {
  detail::require_finite(u, "rhs_damped", t);
  const auto st = detail::transport_state(u);
  RealField out(u.grid());
  const int dim = u.grid().dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double ui = st.u[i];
    double adv = 0.0;
    for (int d = 0; d < dim; ++d) adv += st.grad_s[d][i] * st.grad_u[d][i];
    out[i] = -(1.0 + -2.0 * ui) * adv - (1.0 * ui + -1.0 * ui * ui) * st.lap_s[i];
  }
  out = dealias(out);
  // The linear source acts on every mode, so it stays outside the truncation.
  if (lambda != 0.0) out.axpy(-lambda, u);
  detail::require_finite(out, "rhs_damped", t);
  return out;
}

/// Right-hand side matching a variant: conservative form for the
/// sensitivity-adjusted equation, the damped form for Damped, unified otherwise.
inline RhsFunction make_rhs(const EquationVariant& v) {
  if (const auto* s = std::get_if<variant::SensitivityAdjusted>(&v)) {
    return [rho = s->rho](const RealField& u, double t) { return rhs_divergence(u, t, rho); };
  }
  if (const auto* d = std::get_if<variant::Damped>(&v)) {
    if (!(d->lambda >= 0.0)) throw DomainError("Damped: lambda must be >= 0");
    return [lambda = d->lambda](const RealField& u, double t) { return rhs_damped(u, t, lambda); };
  }
  return [p = params_of(v)](const RealField& u, double t) { return rhs_unified(u, t, p); };
}

/// max |(alpha(t) + beta(t) u) grad S| over the grid.
inline double advective_speed(const RealField& u, double t, const HksParams& p) {
  const auto coeffs = p.at(t);
  const auto S = detail::forward_unchecked(u);
  SpectralField Sb = S;
  auto c = Sb.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= detail::bessel_symbol(u.grid(), i);
  const auto grad_s = detail::gradient_of(Sb);
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double factor = coeffs[0] + coeffs[1] * u[i];
    double s2 = 0.0;
    for (const auto& g : grad_s) s2 += g[i] * g[i];
    worst = std::max(worst, std::abs(factor) * std::sqrt(s2));
  }
  return worst;
}

}  // namespace hks
