#pragma once

// Littlewood-Paley blocks on the periodic lattice with sharp dyadic cutoffs.
//
// Nonhomogeneous blocks:  q = -1 holds |k| <= 1;  q >= 0 holds
// 2^q <= |k| < 2^{q+1} with |k| > 1 (so block 0 is empty in one dimension).
// Homogeneous blocks:     j = 0 holds |k| < 2 including the mean;  j >= 1
// holds 2^j <= |k| < 2^{j+1}.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "hks/errors.hpp"
#include "hks/spectral.hpp"

namespace hks {

struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;

  void validate() const {
    if (!(p >= 1.0) || !(r >= 1.0) || !std::isfinite(s)) {
      throw InvalidExponentError("BesovIndex: require finite s, p >= 1, r >= 1");
    }
  }
  /// The critical index (1 + d/2, 2, 1).
  static BesovIndex critical(int dim) { return {1.0 + 0.5 * dim, 2.0, 1.0}; }
};

struct LpBlock {
  int q;
  RealField field;
};

using LpBlocks = std::vector<LpBlock>;

/// Largest q with 4^q <= k2 (k2 >= 1).
inline int dyadic_floor_log2_of_sqrt(long long k2) {
  int q = 0;
  while ((1LL << (2 * (q + 1))) <= k2) ++q;
  return q;
}

/// Nonhomogeneous block index of a wavevector with |k|^2 = k2.
inline int block_of(long long k2) { return k2 <= 1 ? -1 : dyadic_floor_log2_of_sqrt(k2); }

/// Homogeneous block index, mean folded into block 0.
inline int homogeneous_block_of(long long k2) { return k2 < 4 ? 0 : dyadic_floor_log2_of_sqrt(k2); }

/// Highest nonhomogeneous block index present on the grid.
inline int max_block(const TorusGrid& grid) { return dyadic_floor_log2_of_sqrt(grid.max_wavenumber_sq()); }

/// Blocks -1..max_block(grid), i.e. 2 + floor(log2 k_max) of them.
inline int block_count(const TorusGrid& grid) { return max_block(grid) + 2; }

namespace detail {

template <class BlockFn>
std::vector<RealField> split_blocks(const SpectralField& F, int first, int last, BlockFn&& block_fn) {
  const auto& grid = F.grid();
  std::vector<SpectralField> parts(static_cast<std::size_t>(last - first + 1), SpectralField(grid));
  auto in = F.coeffs();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const int q = block_fn(grid.wavenumber_sq(i));
    parts[static_cast<std::size_t>(q - first)].coeffs()[i] = in[i];
  }
  std::vector<RealField> out;
  out.reserve(parts.size());
  for (const auto& part : parts) out.push_back(inverse_unchecked(part));
  return out;
}

inline double sequence_norm(std::span<const double> terms, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (double v : terms) m = std::max(m, v);
    return m;
  }
  double sum = 0.0;
  for (double v : terms) sum += std::pow(v, r);
  return std::pow(sum, 1.0 / r);
}

}  // namespace detail

/// Nonhomogeneous dyadic decomposition.
inline LpBlocks dyadic_blocks(const RealField& u) {
  const auto F = forward_transform(u);
  auto fields = detail::split_blocks(F, -1, max_block(u.grid()), block_of);
  LpBlocks out;
  out.reserve(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) out.push_back({static_cast<int>(i) - 1, std::move(fields[i])});
  return out;
}

/// Sum of the blocks of an LpBlocks list.
inline RealField reconstruct(const LpBlocks& blocks) {
  if (blocks.empty()) throw DomainError("reconstruct: no blocks");
  RealField acc(blocks.front().field.grid());
  for (const auto& b : blocks) acc += b.field;
  return acc;
}

/// Projection of u onto nonhomogeneous block q (zero outside the grid's range).
inline RealField block_projection(const RealField& u, int q) {
  auto F = forward_transform(u);
  const auto& grid = u.grid();
  auto c = F.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (block_of(grid.wavenumber_sq(i)) != q) c[i] = Complex{};
  }
  return detail::inverse_unchecked(F);
}

/// S_q u = sum of blocks p <= q - 1: |k| <= 1 for q = 0, |k| < 2^q otherwise.
inline RealField low_freq_cutoff(const RealField& u, int q) {
  if (q < 0) throw DomainError("low_freq_cutoff: q must be >= 0");
  auto F = forward_transform(u);
  const auto& grid = u.grid();
  auto c = F.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (block_of(grid.wavenumber_sq(i)) > q - 1) c[i] = Complex{};
  }
  return detail::inverse_unchecked(F);
}

/// ||Delta_q u||_{L^p} for q = -1..max_block.
inline std::vector<double> block_lp_norms(const RealField& u, double p) {
  const auto F = forward_transform(u);
  const auto fields = detail::split_blocks(F, -1, max_block(u.grid()), block_of);
  std::vector<double> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(lp_norm(f, p));
  return out;
}

/// Weighted l^r norm of the block norms; norms[i] belongs to block i - 1.
inline double besov_from_block_norms(std::span<const double> norms, double s, double r) {
  std::vector<double> terms(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const int q = static_cast<int>(i) - 1;
    terms[i] = std::exp2(q * s) * norms[i];
  }
  return detail::sequence_norm(terms, r);
}

/// ||u||_{B^s_{p,r}} = || (2^{qs} ||Delta_q u||_{L^p})_{q >= -1} ||_{l^r}.
inline double besov_norm(const RealField& u, const BesovIndex& idx) {
  idx.validate();
  const auto norms = block_lp_norms(u, idx.p);
  return besov_from_block_norms(norms, idx.s, idx.r);
}

/// L^infinity norms of the homogeneous blocks of u.
inline std::vector<double> homogeneous_block_sup_norms(const RealField& u) {
  const auto F = forward_transform(u);
  const auto fields =
      detail::split_blocks(F, 0, std::max(0, max_block(u.grid())), homogeneous_block_of);
  std::vector<double> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(lp_norm(f, std::numeric_limits<double>::infinity()));
  return out;
}

/// L^infinity norms (pointwise Euclidean magnitude) of the homogeneous blocks of grad u.
inline std::vector<double> homogeneous_gradient_block_sup_norms(const RealField& u) {
  const auto F = forward_transform(u);
  const auto& grid = u.grid();
  const int last = std::max(0, max_block(grid));
  std::vector<std::vector<RealField>> per_axis;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    SpectralField D = F;
    auto c = D.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= derivative_symbol(grid, i, axis);
    per_axis.push_back(detail::split_blocks(D, 0, last, homogeneous_block_of));
  }
  std::vector<double> out;
  for (int j = 0; j <= last; ++j) {
    std::vector<RealField> comps;
    for (auto& axis_blocks : per_axis) comps.push_back(axis_blocks[static_cast<std::size_t>(j)]);
    out.push_back(max_magnitude(comps));
  }
  return out;
}

/// ||u||_{B-dot^0_{inf,r}} with the mean assigned to the lowest block.
inline double homogeneous_b0_norm(const RealField& u, double r) {
  if (!(r >= 1.0)) throw InvalidExponentError("homogeneous_b0_norm: r must be >= 1");
  const auto norms = homogeneous_block_sup_norms(u);
  return detail::sequence_norm(norms, r);
}

/// Same norm applied to grad u.
inline double homogeneous_b0_norm_gradient(const RealField& u, double r) {
  if (!(r >= 1.0)) throw InvalidExponentError("homogeneous_b0_norm_gradient: r must be >= 1");
  const auto norms = homogeneous_gradient_block_sup_norms(u);
  return detail::sequence_norm(norms, r);
}

struct InterpolationReport {
  bool skipped = false;  ///< u was identically zero
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Ratio ||u||_{B^{theta s1 + (1-theta) s2}} / (||u||_{B^{s1}}^theta ||u||_{B^{s2}}^{1-theta}),
/// with p and r taken from `family`.
inline InterpolationReport interpolation_check(const RealField& u, double s1, double s2, double theta,
                                               const BesovIndex& family) {
  if (!(s1 < s2)) throw DomainError("interpolation_check: require s1 < s2");
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("interpolation_check: theta must lie in (0, 1)");
  family.validate();
  const auto norms = block_lp_norms(u, family.p);
  const double n1 = besov_from_block_norms(norms, s1, family.r);
  const double n2 = besov_from_block_norms(norms, s2, family.r);
  if (n1 == 0.0 || n2 == 0.0) return {true, 0.0, 0.0, 0.0};
  const double lhs = besov_from_block_norms(norms, theta * s1 + (1.0 - theta) * s2, family.r);
  const double rhs = std::pow(n1, theta) * std::pow(n2, 1.0 - theta);
  return {false, lhs, rhs, lhs / rhs};
}

}  // namespace hks
