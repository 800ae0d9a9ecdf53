#pragma once

// Named initial-data families. Single- and two-mode data vary along x only.

#include <cmath>
#include <numbers>
#include <random>

#include "hks/harness/config.hpp"
#include "hks/snapshot.hpp"
#include "hks/spectral.hpp"

namespace hks::harness {

namespace detail {

inline double mode_shape(const std::string& shape, double arg) { return shape == "cos" ? std::cos(arg) : std::sin(arg); }

/// Periodic bump centred at pi: sum_{m<=M} c_m exp(-m^2 w^2 / 2) cos(m(x - pi)), peak 1.
inline double gaussian_series(double x, double width, int modes) {
  double v = 1.0, peak = 1.0;
  for (int m = 1; m <= modes; ++m) {
    const double w = 2.0 * std::exp(-0.5 * m * m * width * width);
    v += w * std::cos(m * (x - std::numbers::pi));
    peak += w;
  }
  return v / peak;
}

inline RealField random_field(const TorusGrid& grid, int modes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  RealField out(grid);
  const int ky_max = grid.dim() == 2 ? modes : 0;
  for (int kx = 0; kx <= modes; ++kx) {
    for (int ky = -ky_max; ky <= ky_max; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      if (std::abs(kx) > grid.n() / 3 || std::abs(ky) > grid.n() / 3) continue;
      const double amp = normal(rng) / (1.0 + kx * kx + ky * ky);
      const double ph = phase(rng);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.coordinates(i);
        out[i] += amp * std::cos(kx * x[0] + ky * x[1] + ph);
      }
    }
  }
  const double peak = lp_norm(out, std::numeric_limits<double>::infinity());
  if (peak > 0.0) out *= 1.0 / peak;
  return out;
}

}  // namespace detail

/// Initial field described by an InitialSpec on the given grid.
inline RealField make_initial(const InitialSpec& in, const TorusGrid& grid) {
  if (in.preset == "constant") return RealField::constant(grid, in.offset);
  if (in.preset == "single_mode") {
    return sample(grid, [&](double x, double) { return in.offset + in.amplitude * detail::mode_shape(in.shape, in.wavenumber * x); });
  }
  if (in.preset == "two_mode") {
    return sample(grid, [&](double x, double) {
      return in.offset + in.amplitude * detail::mode_shape(in.shape, in.wavenumber * x) +
             in.amplitude2 * detail::mode_shape(in.shape, in.wavenumber2 * x);
    });
  }
  if (in.preset == "gaussian") {
    return sample(grid, [&](double x, double y) {
      double g = detail::gaussian_series(x, in.width, in.modes);
      if (grid.dim() == 2) g *= detail::gaussian_series(y, in.width, in.modes);
      return in.offset + in.amplitude * g;
    });
  }
  if (in.preset == "random") {
    auto f = detail::random_field(grid, in.modes, in.seed);
    f *= in.amplitude;
    f += RealField::constant(grid, in.offset);
    return f;
  }
  if (in.preset == "snapshot") {
    RealField f = read_snapshot(in.path);
    if (!(f.grid() == grid)) throw ConfigError("initial.path: snapshot grid does not match [grid]");
    return f;
  }
  throw ConfigError("initial.preset: unknown preset '" + in.preset + "'");
}

inline RealField make_initial(const ExperimentConfig& cfg) { return make_initial(cfg.initial, cfg.grid()); }

}  // namespace hks::harness
