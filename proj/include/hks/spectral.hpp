#pragma once

// Periodic grids on the torus [0, 2pi)^d, real and spectral fields, and the
// Fourier-multiplier operators the HKS right-hand sides are built from.
//
// Spectral coefficients are stored in FFT order and normalized so that
// coeff(0) is the grid mean:  coeff(k) = (1/N) sum_j f_j exp(-i k.x_j).

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "hks/errors.hpp"

namespace hks {

using Complex = std::complex<double>;
using WaveVector = std::array<int, 2>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid with n points per axis and period 2pi.
class TorusGrid {
 public:
  TorusGrid(int dim, int n) : dim_(dim), n_(n) {
    if (dim != 1 && dim != 2) {
      throw DomainError("TorusGrid: dim must be 1 or 2, got " + std::to_string(dim));
    }
    if (n < 8 || (n & (n - 1)) != 0) {
      throw DomainError("TorusGrid: n must be a power of two >= 8, got " + std::to_string(n));
    }
  }

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept {
    return dim_ == 1 ? static_cast<std::size_t>(n_)
                     : static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }
  double spacing() const noexcept { return kTwoPi / n_; }
  /// h^dim, the weight of one grid point in uniform quadrature.
  double cell_volume() const noexcept { return std::pow(spacing(), dim_); }
  /// (2pi)^dim.
  double volume() const noexcept { return std::pow(kTwoPi, dim_); }

  /// Signed wavenumber of FFT index i; the Nyquist index maps to +n/2.
  int wavenumber(int i) const noexcept { return i <= n_ / 2 ? i : i - n_; }
  bool is_nyquist(int i) const noexcept { return i == n_ / 2; }

  /// Axis indices of a flat row-major position (axis 0 varies slowest).
  WaveVector axis_indices(std::size_t flat) const noexcept {
    if (dim_ == 1) return {static_cast<int>(flat), 0};
    return {static_cast<int>(flat / n_), static_cast<int>(flat % n_)};
  }
  WaveVector wavevector(std::size_t flat) const noexcept {
    auto idx = axis_indices(flat);
    return {wavenumber(idx[0]), dim_ == 2 ? wavenumber(idx[1]) : 0};
  }
  /// |k|^2 as an exact integer.
  long long wavenumber_sq(std::size_t flat) const noexcept {
    auto k = wavevector(flat);
    return 1LL * k[0] * k[0] + 1LL * k[1] * k[1];
  }
  /// Flat position holding wavevector k (negative components wrap).
  std::size_t flat_index(WaveVector k) const noexcept {
    auto wrap = [this](int v) { return ((v % n_) + n_) % n_; };
    if (dim_ == 1) return static_cast<std::size_t>(wrap(k[0]));
    return static_cast<std::size_t>(wrap(k[0])) * n_ + static_cast<std::size_t>(wrap(k[1]));
  }
  /// Physical coordinates of a grid point.
  std::array<double, 2> coordinates(std::size_t flat) const noexcept {
    auto idx = axis_indices(flat);
    return {idx[0] * spacing(), dim_ == 2 ? idx[1] * spacing() : 0.0};
  }
  /// Largest |k|^2 on the lattice (Nyquist corner).
  long long max_wavenumber_sq() const noexcept {
    return static_cast<long long>(dim_) * (n_ / 2) * (n_ / 2);
  }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  int dim_;
  int n_;
};

/// Real samples on a TorusGrid, row-major.
class RealField {
 public:
  explicit RealField(TorusGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}
  RealField(TorusGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw GridMismatchError("RealField: value count does not match grid");
    }
  }
  static RealField constant(TorusGrid grid, double c) {
    return RealField(grid, std::vector<double>(grid.size(), c));
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  RealField& operator+=(const RealField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  RealField& operator-=(const RealField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  RealField& operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
  }
  /// this += s * o
  RealField& axpy(double s, const RealField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
    return *this;
  }

  friend RealField operator+(RealField a, const RealField& b) { return a += b; }
  friend RealField operator-(RealField a, const RealField& b) { return a -= b; }
  friend RealField operator*(double s, RealField a) { return a *= s; }
  friend bool operator==(const RealField&, const RealField&) = default;

 private:
  void check_same(const RealField& o) const {
    if (!(o.grid_ == grid_)) throw GridMismatchError("RealField: grid mismatch");
  }

  TorusGrid grid_;
  std::vector<double> values_;
};

/// Samples f(x, y) on the grid (y = 0 in one dimension).
template <class F>
RealField sample(const TorusGrid& grid, F&& f) {
  RealField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto x = grid.coordinates(i);
    out[i] = f(x[0], x[1]);
  }
  return out;
}

/// Fourier coefficients of a real field, FFT layout, mean-normalized.
class SpectralField {
 public:
  explicit SpectralField(TorusGrid grid) : grid_(grid), coeffs_(grid.size(), Complex{}) {}
  SpectralField(TorusGrid grid, std::vector<Complex> coeffs)
      : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size()) {
      throw GridMismatchError("SpectralField: coefficient count does not match grid");
    }
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  Complex coeff(WaveVector k) const noexcept { return coeffs_[grid_.flat_index(k)]; }
  Complex& coeff(WaveVector k) noexcept { return coeffs_[grid_.flat_index(k)]; }

  /// Largest |coeff(-k) - conj(coeff(k))| relative to the largest coefficient.
  double hermitian_defect() const noexcept {
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      auto k = grid_.wavevector(i);
      const Complex mirror = coeffs_[grid_.flat_index({-k[0], -k[1]})];
      worst = std::max(worst, std::abs(mirror - std::conj(coeffs_[i])));
    }
    return worst / scale;
  }

 private:
  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

namespace detail {

// FFTW planning is not thread-safe; executing an existing plan on new arrays is.
inline fftw_plan fft_plan(const TorusGrid& grid, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(grid.dim(), grid.n(), sign);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  std::vector<Complex> scratch(grid.size());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = grid.dim() == 1 ? fftw_plan_dft_1d(grid.n(), buf, buf, sign, flags)
                                   : fftw_plan_dft_2d(grid.n(), grid.n(), buf, buf, sign, flags);
  cache.emplace(key, plan);
  return plan;
}

inline void fft_in_place(const TorusGrid& grid, std::span<Complex> data, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(fft_plan(grid, sign), buf, buf);
}

inline SpectralField forward_unchecked(const RealField& f) {
  const auto& grid = f.grid();
  std::vector<Complex> data(f.values().begin(), f.values().end());
  fft_in_place(grid, data, FFTW_FORWARD);
  const double inv = 1.0 / static_cast<double>(grid.size());
  for (auto& c : data) c *= inv;
  return SpectralField(grid, std::move(data));
}

inline RealField inverse_unchecked(const SpectralField& F) {
  const auto& grid = F.grid();
  std::vector<Complex> data(F.coeffs().begin(), F.coeffs().end());
  fft_in_place(grid, data, FFTW_BACKWARD);
  RealField out(grid);
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
  return out;
}

/// Inverse transform of coeffs scaled by multiplier(k, flat).
template <class M>
RealField apply_multiplier(const SpectralField& F, M&& multiplier) {
  SpectralField G = F;
  auto coeffs = G.coeffs();
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= multiplier(i);
  return inverse_unchecked(G);
}

}  // namespace detail

/// Forward DFT; coeff(0) equals the mean of f.
inline SpectralField forward_transform(const RealField& f) {
  if (!f.all_finite()) throw DivergedInputError("forward_transform: non-finite input");
  return detail::forward_unchecked(f);
}

inline constexpr double kHermitianTolerance = 1e-8;

/// Inverse DFT of a Hermitian spectrum; the imaginary residue is dropped
/// after the symmetry check.
inline RealField inverse_transform(const SpectralField& F) {
  const double defect = F.hermitian_defect();
  if (!(defect <= kHermitianTolerance)) {
    throw AsymmetryError("inverse_transform: Hermitian symmetry violated (relative defect " +
                         std::to_string(defect) + ")");
  }
  return detail::inverse_unchecked(F);
}

/// i * k_axis with the Nyquist mode of that axis zeroed.
inline Complex derivative_symbol(const TorusGrid& grid, std::size_t flat, int axis) {
  const auto idx = grid.axis_indices(flat);
  if (grid.is_nyquist(idx[axis])) return {};
  return {0.0, static_cast<double>(grid.wavenumber(idx[axis]))};
}

namespace detail {

inline std::vector<RealField> gradient_of(const SpectralField& F) {
  const auto& grid = F.grid();
  std::vector<RealField> out;
  out.reserve(grid.dim());
  for (int axis = 0; axis < grid.dim(); ++axis) {
    out.push_back(apply_multiplier(F, [&](std::size_t i) { return derivative_symbol(grid, i, axis); }));
  }
  return out;
}

inline RealField laplacian_of(const SpectralField& F) {
  const auto& grid = F.grid();
  return apply_multiplier(F, [&](std::size_t i) {
    return Complex(-static_cast<double>(grid.wavenumber_sq(i)), 0.0);
  });
}

inline double bessel_symbol(const TorusGrid& grid, std::size_t i) {
  return 1.0 / (1.0 + static_cast<double>(grid.wavenumber_sq(i)));
}

}  // namespace detail

/// Spectral gradient, one component per axis.
inline std::vector<RealField> gradient(const RealField& f) {
  return detail::gradient_of(forward_transform(f));
}

/// Spectral Laplacian, multiplier -|k|^2.
inline RealField laplacian(const RealField& f) { return detail::laplacian_of(forward_transform(f)); }

/// Spectral divergence of a vector field given by its components.
inline RealField divergence(std::span<const RealField> components) {
  if (components.empty()) throw DomainError("divergence: no components");
  const auto& grid = components.front().grid();
  if (static_cast<int>(components.size()) != grid.dim()) {
    throw GridMismatchError("divergence: component count must equal grid dimension");
  }
  SpectralField acc(grid);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const auto F = forward_transform(components[axis]);
    auto out = acc.coeffs();
    auto in = F.coeffs();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += derivative_symbol(grid, i, axis) * in[i];
  }
  return detail::inverse_unchecked(acc);
}

/// S = (1 - Laplacian)^{-1} u, multiplier 1/(1+|k|^2).
inline RealField bessel_potential(const RealField& u) {
  const auto U = forward_transform(u);
  const auto& grid = u.grid();
  return detail::apply_multiplier(U, [&](std::size_t i) { return Complex(detail::bessel_symbol(grid, i), 0.0); });
}

/// Discrete L^p norm by uniform quadrature; p = infinity gives the max norm.
inline double lp_norm(const RealField& f, double p) {
  if (!(p >= 1.0)) throw InvalidExponentError("lp_norm: exponent must be >= 1");
  auto v = f.values();
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double sum = 0.0;
  if (p == 1.0) {
    for (double x : v) sum += std::abs(x);
    return f.grid().cell_volume() * sum;
  }
  if (p == 2.0) {
    for (double x : v) sum += x * x;
    return std::sqrt(f.grid().cell_volume() * sum);
  }
  for (double x : v) sum += std::pow(std::abs(x), p);
  return std::pow(f.grid().cell_volume() * sum, 1.0 / p);
}

inline double mean(const RealField& f) {
  double sum = 0.0;
  for (double x : f.values()) sum += x;
  return sum / static_cast<double>(f.size());
}

/// Integral of f over the torus.
inline double mass(const RealField& f) { return f.grid().volume() * mean(f); }

/// Pointwise Euclidean magnitude of a vector field, max over the grid.
inline double max_magnitude(std::span<const RealField> components) {
  if (components.empty()) return 0.0;
  const std::size_t n = components.front().size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& c : components) s += c[i] * c[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

/// Zeroes every mode with |k_axis| > n/3 on some axis (2/3 rule).
inline void truncate_two_thirds(SpectralField& F) {
  const auto& grid = F.grid();
  const int cutoff = grid.n() / 3;
  auto coeffs = F.coeffs();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto k = grid.wavevector(i);
    if (std::abs(k[0]) > cutoff || std::abs(k[1]) > cutoff) coeffs[i] = Complex{};
  }
}

/// Physical-space projection onto the 2/3-rule band.
inline RealField dealias(const RealField& f) {
  auto F = detail::forward_unchecked(f);
  truncate_two_thirds(F);
  return detail::inverse_unchecked(F);
}

}  // namespace hks
