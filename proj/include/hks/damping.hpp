#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "hks/dynamics.hpp"
#include "hks/integrator.hpp"

namespace hks {

/// sup over the step times of |exp(lambda t) u_damped(t) - v(t)|_inf, where
/// u_damped solves the damped equation and v the transformed one, both from
/// u0 with the same fixed RK4 step.
inline double damping_transform_residual(const RealField& u0, double lambda, double t_end, double dt,
                                         SignConvention convention = SignConvention::derived) {
  if (!(lambda > 0.0)) throw DomainError("damping_transform_residual: lambda must be > 0");
  if (!(t_end > 0.0)) throw DomainError("damping_transform_residual: T must be > 0");
  const auto damped = integrate_fixed(u0, make_rhs(variant::Damped{lambda}), t_end, dt);
  const auto transformed = integrate_fixed(u0, make_rhs(variant::Transformed{lambda, convention}), t_end, dt);
  const double h = t_end / static_cast<double>(damped.size() - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < damped.size(); ++i) {
    const double growth = std::exp(lambda * h * static_cast<double>(i));
    const auto a = damped[i].values();
    const auto b = transformed[i].values();
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(growth * a[j] - b[j]));
  }
  return worst;
}

}  // namespace hks
