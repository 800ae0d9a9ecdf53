#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hks/snapshot.hpp"
#include "hks/spectral.hpp"
#include "test_fields.hpp"

using namespace hks;
using hks::testing::max_abs_diff;
using hks::testing::random_smooth;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInfNorm = std::numeric_limits<double>::infinity();
}  // namespace

TEST(TorusGrid, RejectsBadShapes) {
  EXPECT_THROW(TorusGrid(3, 16), DomainError);
  EXPECT_THROW(TorusGrid(1, 4), DomainError);
  EXPECT_THROW(TorusGrid(1, 24), DomainError);
  EXPECT_NO_THROW(TorusGrid(2, 8));
}

TEST(TorusGrid, SizesAndWavenumbers) {
  TorusGrid g(2, 16);
  EXPECT_EQ(g.size(), 256u);
  EXPECT_DOUBLE_EQ(g.spacing(), 2 * kPi / 16);
  EXPECT_EQ(g.wavenumber(8), 8);
  EXPECT_EQ(g.wavenumber(9), -7);
  EXPECT_EQ(g.wavenumber_sq(g.flat_index({-3, 4})), 25);
  EXPECT_EQ(g.wavevector(g.flat_index({-3, 4})), (WaveVector{-3, 4}));
}

TEST(ForwardTransform, ConstantHasOnlyMean) {
  TorusGrid g(1, 32);
  auto F = forward_transform(RealField::constant(g, 2.5));
  EXPECT_NEAR(F.coeff({0, 0}).real(), 2.5, 1e-15);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(std::abs(F.coeffs()[i]), 1e-15);
}

TEST(ForwardTransform, CosineSplitsIntoTwoModes) {
  TorusGrid g(1, 32);
  auto F = forward_transform(sample(g, [](double x, double) { return std::cos(3 * x); }));
  EXPECT_NEAR(F.coeff({3, 0}).real(), 0.5, 1e-15);
  EXPECT_NEAR(F.coeff({-3, 0}).real(), 0.5, 1e-15);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int k = g.wavevector(i)[0];
    if (std::abs(k) != 3) {
      EXPECT_LT(std::abs(F.coeffs()[i]), 1e-15);
    }
  }
}

TEST(ForwardTransform, RejectsNonFinite) {
  TorusGrid g(1, 16);
  RealField f(g);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(forward_transform(f), DivergedInputError);
}

TEST(Transforms, RoundTripIsIdentity) {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 32);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto f = random_smooth(g, seed, 10, 0.3);
      auto back = inverse_transform(forward_transform(f));
      EXPECT_LT(max_abs_diff(f, back), 1e-12 * lp_norm(f, kInfNorm));
      EXPECT_LT(forward_transform(f).hermitian_defect(), 1e-12);
    }
  }
}

TEST(InverseTransform, SimpleSpectra) {
  TorusGrid g(1, 16);
  SpectralField F(g);
  F.coeff({0, 0}) = 5.0;
  auto f = inverse_transform(F);
  for (double v : f.values()) EXPECT_NEAR(v, 5.0, 1e-14);

  SpectralField C(g);
  C.coeff({1, 0}) = 0.5;
  C.coeff({-1, 0}) = 0.5;
  auto c = inverse_transform(C);
  auto expect = sample(g, [](double x, double) { return std::cos(x); });
  EXPECT_LT(max_abs_diff(c, expect), 1e-14);
}

TEST(InverseTransform, RejectsAsymmetricSpectrum) {
  TorusGrid g(1, 16);
  SpectralField F(g);
  F.coeff({2, 0}) = Complex(1.0, 0.0);
  EXPECT_THROW(inverse_transform(F), AsymmetryError);
}

TEST(InverseTransform, ForwardOfInverseIsIdentity) {
  TorusGrid g(2, 16);
  auto F = forward_transform(random_smooth(g, 11, 5));
  auto G = forward_transform(inverse_transform(F));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(F.coeffs()[i] - G.coeffs()[i]), 1e-12);
}

TEST(Gradient, SineAndConstant) {
  TorusGrid g(1, 64);
  auto d = gradient(sample(g, [](double x, double) { return std::sin(x); }));
  EXPECT_LT(max_abs_diff(d[0], sample(g, [](double x, double) { return std::cos(x); })), 1e-12);
  auto z = gradient(RealField::constant(g, 3.0));
  EXPECT_LT(lp_norm(z[0], kInfNorm), 1e-14);
}

TEST(Gradient, ProductModeIn2D) {
  TorusGrid g(2, 32);
  auto d = gradient(sample(g, [](double x, double y) { return std::sin(2 * x) * std::cos(y); }));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_LT(max_abs_diff(d[0], sample(g, [](double x, double y) { return 2 * std::cos(2 * x) * std::cos(y); })), 1e-12);
  EXPECT_LT(max_abs_diff(d[1], sample(g, [](double x, double y) { return -std::sin(2 * x) * std::sin(y); })), 1e-12);
}

TEST(Gradient, NyquistModeIsZeroed) {
  TorusGrid g(1, 16);
  auto f = sample(g, [](double x, double) { return std::cos(8 * x); });
  EXPECT_LT(lp_norm(gradient(f)[0], kInfNorm), 1e-13);
}

TEST(Laplacian, CosineConstantAndDivergenceOfGradient) {
  TorusGrid g(1, 64);
  for (int k : {1, 4, 9}) {
    auto f = sample(g, [k](double x, double) { return std::cos(k * x); });
    auto expect = sample(g, [k](double x, double) { return -k * k * std::cos(k * x); });
    EXPECT_LT(max_abs_diff(laplacian(f), expect), 1e-11);
  }
  EXPECT_LT(lp_norm(laplacian(RealField::constant(g, 2.0)), kInfNorm), 1e-14);

  TorusGrid g2(2, 32);
  auto f = random_smooth(g2, 3, 8);
  auto grad = gradient(f);
  EXPECT_LT(max_abs_diff(laplacian(f), divergence(grad)), 1e-12 * lp_norm(laplacian(f), kInfNorm));
}

TEST(BesselPotential, EigenfunctionsAndConstants) {
  TorusGrid g(1, 64);
  for (int k = 0; k < 32; ++k) {
    auto u = sample(g, [k](double x, double) { return std::cos(k * x); });
    auto expect = sample(g, [k](double x, double) { return std::cos(k * x) / (1.0 + k * k); });
    EXPECT_LT(max_abs_diff(bessel_potential(u), expect), 1e-12) << "k=" << k;
  }
  auto c = bessel_potential(RealField::constant(g, 0.7));
  for (double v : c.values()) EXPECT_NEAR(v, 0.7, 1e-15);
}

TEST(BesselPotential, ResidualAndMean) {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 32);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto u = random_smooth(g, seed, 15, 0.2);
      auto S = bessel_potential(u);
      auto residual = laplacian(S) - S + u;
      EXPECT_LT(lp_norm(residual, kInfNorm), 1e-10 * lp_norm(u, kInfNorm));
      EXPECT_NEAR(mean(S), mean(u), 1e-15);
    }
  }
}

TEST(BesselPotential, SupNormContractsForNonnegativeSpectrum) {
  TorusGrid g(1, 64);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    SpectralField F(g);
    for (int k = 0; k <= 20; ++k) {
      const double a = unit(rng);
      F.coeff({k, 0}) += a * 0.5;
      F.coeff({-k, 0}) += a * 0.5;
    }
    auto u = inverse_transform(F);
    EXPECT_LE(lp_norm(bessel_potential(u), kInfNorm), lp_norm(u, kInfNorm) * (1 + 1e-14));
  }
}

TEST(BesselPotential, CommutesWithGradient) {
  TorusGrid g(2, 32);
  auto u = random_smooth(g, 8, 10);
  auto a = gradient(bessel_potential(u));
  std::vector<RealField> b;
  for (const auto& c : gradient(u)) b.push_back(bessel_potential(c));
  for (int d = 0; d < 2; ++d) EXPECT_LT(max_abs_diff(a[d], b[d]), 1e-12);
}

TEST(LpNorm, ClosedForms) {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 16);
    EXPECT_NEAR(lp_norm(RealField::constant(g, 2.0), 4.0), 2.0 * std::pow(2 * kPi, dim / 4.0), 1e-13);
  }
  TorusGrid g(1, 64);
  auto c = sample(g, [](double x, double) { return std::cos(x); });
  EXPECT_NEAR(lp_norm(c, kInfNorm), 1.0, 1e-15);
  EXPECT_NEAR(lp_norm(c, 2.0), 1.7724538509055160, 1e-14);
  EXPECT_THROW(lp_norm(c, 0.5), InvalidExponentError);
}

TEST(LpNorm, Parseval) {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 32);
    auto f = random_smooth(g, 21, 12, 0.4);
    auto F = forward_transform(f);
    double sum = 0.0;
    for (auto c : F.coeffs()) sum += std::norm(c);
    const double l2sq = std::pow(lp_norm(f, 2.0), 2);
    EXPECT_NEAR(l2sq, g.volume() * sum, 1e-10 * l2sq);
  }
}

TEST(Dealias, TruncatesHighModes) {
  TorusGrid g(1, 64);
  auto f = sample(g, [](double x, double) { return std::cos(5 * x) + std::cos(30 * x); });
  auto d = dealias(f);
  EXPECT_LT(max_abs_diff(d, sample(g, [](double x, double) { return std::cos(5 * x); })), 1e-13);
}

TEST(Snapshot, RoundTripAndValidation) {
  TorusGrid g(2, 16);
  auto f = random_smooth(g, 2, 5, 0.1);
  std::stringstream ss;
  write_snapshot(ss, f);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "HKS1");
  EXPECT_EQ(bytes.size(), 4u + 8u + 8u * g.size());
  std::stringstream in(bytes);
  EXPECT_EQ(read_snapshot(in), f);

  std::stringstream bad_magic("XKS1" + bytes.substr(4));
  EXPECT_THROW(read_snapshot(bad_magic), SnapshotError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_snapshot(truncated), SnapshotError);
  std::stringstream trailing(bytes + "x");
  EXPECT_THROW(read_snapshot(trailing), SnapshotError);
}
