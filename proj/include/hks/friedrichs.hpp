#pragma once

// Friedrichs iteration: a sequence of linear transport problems
//
//   v_t + (alpha + beta w) grad S_w . grad v = -(gamma w + xi w^2) Lap S_w,
//   v(0) = S_{n+1} u0,
//
// where w is the previous iterate, stored at every step and interpolated
// linearly in time at the RK4 stage times. The first iterate is S_1 u0,
// constant in time.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hks/besov.hpp"
#include "hks/dynamics.hpp"
#include "hks/integrator.hpp"

namespace hks {

/// States on a uniform time grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<RealField> states;

  /// Linear interpolation between stored states; constant beyond the ends.
  RealField at(double t) const {
    if (states.size() == 1 || t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const double h = times[1] - times[0];
    auto i = static_cast<std::size_t>(std::floor((t - times.front()) / h));
    i = std::min(i, states.size() - 2);
    const double w = (t - times[i]) / h;
    RealField out = states[i];
    out *= (1.0 - w);
    out.axpy(w, states[i + 1]);
    return out;
  }
  const RealField& final_state() const { return states.back(); }
};

struct FriedrichsResult {
  std::vector<Trajectory> iterates;  ///< iterates[n - 1] is u^{(n)}

  const Trajectory& iterate(int n) const { return iterates.at(static_cast<std::size_t>(n - 1)); }
};

/// Called after each completed iterate with its 1-based index.
using IterateObserver = std::function<void(int, const Trajectory&)>;

/// Right-hand side of the linear problem for v given the frozen state w.
inline RealField friedrichs_linear_rhs(const RealField& v, double t, const RealField& w, const HksParams& p) {
  const auto [a, b, g, x] = p.at(t);
  const auto coeff = detail::transport_state(w);
  auto V = detail::forward_unchecked(v);
  truncate_two_thirds(V);
  const auto grad_v = detail::gradient_of(V);
  RealField out(v.grid());
  const int dim = v.grid().dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double wi = coeff.u[i];
    double adv = 0.0;
    for (int d = 0; d < dim; ++d) adv += coeff.grad_s[d][i] * grad_v[d][i];
    out[i] = -(a + b * wi) * adv - (g * wi + x * wi * wi) * coeff.lap_s[i];
  }
  return dealias(out);
}

inline FriedrichsResult friedrichs_iterate(const RealField& u0, const HksParams& p, double t_end, double dt,
                                           int n_iters, const IterateObserver& observer = {}) {
  if (n_iters < 1) throw DomainError("friedrichs_iterate: n_iters must be >= 1");
  if (!(t_end > 0.0) || !(dt > 0.0)) throw DomainError("friedrichs_iterate: T and dt must be > 0");
  if (!u0.all_finite()) throw DivergedInputError("friedrichs_iterate: non-finite initial data");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);
  std::vector<double> times(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) times[i] = i == steps ? t_end : h * static_cast<double>(i);

  FriedrichsResult result;
  {
    Trajectory first{times, std::vector<RealField>(steps + 1, low_freq_cutoff(u0, 1))};
    result.iterates.push_back(std::move(first));
    if (observer) observer(1, result.iterates.back());
  }
  for (int n = 2; n <= n_iters; ++n) {
    const Trajectory& prev = result.iterates.back();
    RhsFunction rhs = [&prev, &p](const RealField& v, double t) {
      return friedrichs_linear_rhs(v, t, prev.at(t), p);
    };
    Trajectory next{times, {}};
    next.states.reserve(steps + 1);
    next.states.push_back(low_freq_cutoff(u0, n));
    for (std::size_t i = 0; i < steps; ++i) {
      try {
        next.states.push_back(rk4_step(next.states.back(), times[i], h, rhs));
      } catch (const DivergenceError& e) {
        throw DivergenceError("friedrichs_iterate: iterate " + std::to_string(n) + " diverged", e.time(), n);
      }
    }
    result.iterates.push_back(std::move(next));
    if (observer) observer(n, result.iterates.back());
  }
  return result;
}

/// sup over stored times of the Besov norm of each iterate.
inline std::vector<double> iterate_sup_norms(const FriedrichsResult& r, const BesovIndex& idx) {
  std::vector<double> out;
  for (const auto& traj : r.iterates) {
    double m = 0.0;
    for (const auto& s : traj.states) m = std::max(m, besov_norm(s, idx));
    out.push_back(m);
  }
  return out;
}

}  // namespace hks
