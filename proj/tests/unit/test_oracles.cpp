#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "hks/oracles.hpp"
#include "test_fields.hpp"

using namespace hks;

namespace {

HksParams only_alpha(ParameterSchedule s) {
  HksParams p = HksParams::constant(0, 0, 0, 0);
  p.alpha = std::move(s);
  return p;
}

HksParams rational_all(double a, double b, std::array<double, 4> amp) {
  return {ParameterSchedule::rational(a, b, amp[0]), ParameterSchedule::rational(a, b, amp[1]),
          ParameterSchedule::rational(a, b, amp[2]), ParameterSchedule::rational(a, b, amp[3])};
}

}  // namespace

TEST(HFunction, FrozenValueAndZero) {
  const auto b = IntegralBundle::from_totals(0.01, 0.01);
  const auto h = h_function(1.0, b, {});
  EXPECT_FALSE(h.overflow);
  EXPECT_NEAR(h.value, 1.12407563612777928, 1e-15);
  EXPECT_EQ(h_function(0.0, b, {}).value, 0.0);
  EXPECT_THROW(h_function(-1.0, b, {}), DomainError);
}

TEST(HFunction, MonotoneInArgumentAndIntegrals) {
  double prev = 0.0;
  for (double x = 0.0; x <= 4.0; x += 0.25) {
    const double v = h_function(x, IntegralBundle::from_totals(0.02, 0.05), {}).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_LT(h_function(1.5, IntegralBundle::from_totals(0.01, 0.02), {}).value,
            h_function(1.5, IntegralBundle::from_totals(0.01, 0.03), {}).value);
  EXPECT_LT(h_function(1.5, IntegralBundle::from_totals(0.01, 0.03), {}).value,
            h_function(1.5, IntegralBundle::from_totals(0.02, 0.03), {}).value);
}

TEST(HFunction, OverflowIsFlagged) {
  const auto h = h_function(100.0, IntegralBundle::from_totals(10.0, 10.0), {});
  EXPECT_TRUE(h.overflow);
  EXPECT_EQ(h.value, kInf);
}

TEST(IntegralBundle, ClosedFormIntegrals) {
  const auto p = rational_all(1.0, 1.0, {1.0, -2.0, 1.0, -1.0});
  const auto b = IntegralBundle::from_params(p);
  EXPECT_NEAR(b.total, 7.85398163397448310, 1e-14);
  EXPECT_NEAR(b.ab, 1.5 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(b.partial(1.0), 5.0 * std::numbers::pi / 4.0, 1e-14);
  EXPECT_NEAR(IntegralBundle::from_params(only_alpha(ParameterSchedule::exp_decay(1.0, 1.0))).partial(5.0),
              0.993262053000914533, 1e-15);
  EXPECT_THROW(IntegralBundle::from_totals(0.2, 0.1), DomainError);
  EXPECT_THROW(IntegralBundle::from_totals(0.1, 0.2).partial(1.0), DomainError);
}

TEST(GlobalThreshold, FrozenThresholdAndMonotonicity) {
  const auto b = IntegralBundle::from_totals(0.01, 0.01);
  const auto rep = global_threshold_ok(0.0, b, {});
  EXPECT_EQ(rep.condition, "global_existence");
  EXPECT_NEAR(rep.rhs, 0.0457144127819711970, 1e-15);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_NEAR(rep.ratio, 0.01 / 0.0457144127819711970, 1e-13);

  bool was_ok = true;
  for (double x = 0.0; x <= 2.0; x += 0.05) {
    const bool ok = global_threshold_ok(x, IntegralBundle::from_totals(0.004, 0.008), {}).satisfied;
    if (!was_ok) {
      EXPECT_FALSE(ok) << "x=" << x;
    }
    was_ok = ok;
  }
  EXPECT_FALSE(was_ok);
}

TEST(GlobalThreshold, ZeroAndDivergentIntegrals) {
  const auto zero = global_threshold_ok(5.0, IntegralBundle::from_totals(0.0, 0.0), {});
  EXPECT_TRUE(zero.satisfied);
  EXPECT_EQ(zero.ratio, 0.0);
  const auto inf = global_threshold_ok(0.5, IntegralBundle::from_totals(kInf, kInf), {});
  EXPECT_FALSE(inf.satisfied);
  EXPECT_EQ(inf.ratio, kInf);
  EXPECT_EQ(inf.to_json()["ratio"], "inf");
}

TEST(GlobalThreshold, LargerConstantIsStricter) {
  const auto b = IntegralBundle::from_totals(0.001, 0.003);
  EXPECT_TRUE(global_threshold_ok(0.5, b, {1.0}).satisfied);
  EXPECT_FALSE(global_threshold_ok(0.5, b, {10.0}).satisfied);
}

TEST(Dissipation, LambdaStarAndCorollaryRatio) {
  EXPECT_NEAR(lambda_star(0.0, {}), 173.123404906675609, 1e-12);
  EXPECT_NEAR(lambda_star(1.0, {}), 4.0 * 173.123404906675609, 1e-11);
  EXPECT_NEAR(lambda_star(0.0, {2.0}), 8.0 * 173.123404906675609, 1e-11);
  const auto rep = corollary_lambda_ok(0.0, lambda_star(0.0, {}), {});
  EXPECT_EQ(rep.condition, "dissipation_lambda");
  EXPECT_NEAR(rep.ratio, 0.518106490207351754, 1e-14);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_FALSE(corollary_lambda_ok(0.0, 10.0, {}).satisfied);
  EXPECT_THROW(corollary_lambda_ok(0.0, 0.0, {}), DomainError);
}

TEST(Dissipation, LambdaStarSatisfiesCorollaryAcrossNorms) {
  for (double x : {0.0, 0.1, 1.0, 5.0}) {
    for (double C : {0.1, 1.0, 3.0}) {
      EXPECT_TRUE(corollary_lambda_ok(x, lambda_star(x, {C}), {C}).satisfied) << x << " " << C;
    }
  }
}

TEST(Dissipation, MaximalConstantIsTheBoundary) {
  const double lam = lambda_star(0.0, {});
  const double c = maximal_constant_for_lambda(0.0, lam);
  EXPECT_GT(c, 1.0);
  EXPECT_TRUE(corollary_lambda_ok(0.0, lam, {c}).satisfied);
  EXPECT_FALSE(corollary_lambda_ok(0.0, lam, {c * (1 + 1e-10)}).satisfied);
}

TEST(UniformBound, ValueAndMinimalConstant) {
  const auto b = IntegralBundle::from_totals(0.01, 0.01);
  EXPECT_NEAR(uniform_bound_value(0.0, b, {}), 2.0 * 1.12407563612777928, 1e-14);
  const double c = minimal_constant_for_bound(1.0, 0.0, b);
  EXPECT_NEAR(uniform_bound_value(0.0, b, {c}), 1.0, 1e-12);
  EXPECT_EQ(minimal_constant_for_bound(0.0, 0.0, b), 0.0);
  EXPECT_TRUE(std::isnan(minimal_constant_for_bound(1.0, 0.0, IntegralBundle::from_totals(kInf, kInf))));
}

TEST(BindingCondition, SwitchesWithIntegrals) {
  EXPECT_EQ(binding_condition(0.0, IntegralBundle::from_totals(0.01, 0.01), {}), "global_existence");
  EXPECT_EQ(binding_condition(0.0, IntegralBundle::from_totals(0.0, 0.0), {}), "global_existence");
  EXPECT_EQ(binding_condition(0.0, IntegralBundle::from_totals(0.0, 0.0), {0.1}), "blowup_lower_bound");
}

TEST(CrossingTime, FrozenClosedForms) {
  const auto decay = only_alpha(ParameterSchedule::exp_decay(1.0, 1.0));
  EXPECT_NEAR(blowup_lower_bound_critical(3.0, decay, {}), 0.0645385211375711717, 1e-15);
  const auto flat = only_alpha(ParameterSchedule::constant(1.0));
  EXPECT_NEAR(blowup_lower_bound_noncritical(0.0, flat, {}), 0.00247875217666635842, 1e-17);
  EXPECT_NEAR(accumulator_crossing_time(rational_all(1.0, 1.0, {1, 1, 1, 1}), 1.0), 0.255341921221036267, 1e-15);
}

TEST(CrossingTime, BisectionAgreesWithClosedForm) {
  const std::vector<HksParams> cases = {
      only_alpha(ParameterSchedule::exp_decay(2.0, 0.5)),
      HksParams{ParameterSchedule::exp_decay(1.0, 0.3), ParameterSchedule::exp_decay(-2.0, 0.3),
                ParameterSchedule::constant(0.0), ParameterSchedule::exp_decay(0.5, 0.3)},
      rational_all(2.0, 0.5, {1.0, -2.0, 1.0, -1.0}),
      HksParams::constant(1.0, -2.0, 1.0, -1.0)};
  for (const auto& p : cases) {
    for (double thr : {0.01, 0.3, 1.0}) {
      const double fast = accumulator_crossing_time(p, thr);
      const double slow = accumulator_crossing_time(p, thr, RootMethod::bisection);
      ASSERT_TRUE(std::isfinite(fast));
      EXPECT_NEAR(fast, slow, 1e-12 * fast);
      EXPECT_NEAR(IntegralBundle::from_params(p).partial(fast), thr, 1e-12);
    }
  }
}

TEST(CrossingTime, InfiniteWhenTotalStaysBelowThreshold) {
  const auto zero = HksParams::constant(0, 0, 0, 0);
  EXPECT_EQ(blowup_lower_bound_critical(0.5, zero, {}), kInf);
  EXPECT_EQ(blowup_lower_bound_noncritical(0.5, zero, {}), kInf);
  EXPECT_EQ(accumulator_crossing_time(only_alpha(ParameterSchedule::exp_decay(0.5, 1.0)), 0.5), kInf);
  EXPECT_THROW(accumulator_crossing_time(zero, -1.0), DomainError);
}

TEST(CrossingTime, DecreasesWithNormAndConstant) {
  const auto p = HksParams::constant(1.0, -2.0, 1.0, -1.0);
  double prev = kInf;
  for (double x = 0.0; x <= 3.0; x += 0.5) {
    const double t = blowup_lower_bound_critical(x, p, {});
    EXPECT_LT(t, prev);
    EXPECT_LE(blowup_lower_bound_noncritical(x, p, {}), t);
    prev = t;
  }
  EXPECT_NEAR(blowup_lower_bound_critical(1.0, p, {2.0}), 0.5 * blowup_lower_bound_critical(1.0, p, {}), 1e-15);
}

TEST(CriterionIntegral, ConstantStateClosedForm) {
  RunRecord rec;
  rec.times = {0.0, 0.5, 1.0};
  rec.monitored[column::sched_abs] = {5.0, 5.0, 5.0};
  rec.monitored[column::hb0_inf1_u] = {0.4, 0.4, 0.4};
  rec.monitored[column::hb0_inf1_gu] = {0.0, 0.0, 0.0};
  rec.monitored[column::hb0_inf2_u] = {0.4, 0.4, 0.4};
  rec.monitored[column::hb0_inf2_gu] = {0.3, 0.3, 0.3};
  EXPECT_NEAR(criterion_integral(rec, Criterion::critical_b0_inf1), 5.0 * 0.16, 1e-15);
  EXPECT_NEAR(criterion_integral(rec, Criterion::noncritical_b0_inf2), 5.0 * 0.25, 1e-15);
  rec.monitored.erase(column::sched_abs);
  EXPECT_THROW(criterion_integral(rec, Criterion::critical_b0_inf1), MissingSeriesError);
}

TEST(Lemma31, TwoTermExample) {
  const std::array<double, 2> a = {0.5, 1.0 / 3.0};
  const auto rep = lemma31_check(a, ParameterSchedule::constant(1.0), 0.0, 1, 1.0);
  EXPECT_NEAR(rep.bound, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(rep.numeric_sup, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(rep.mu_l1, 1.0, 1e-15);
}

TEST(Lemma31, GeometricSequenceWithDecayingWeight) {
  std::vector<double> a;
  for (int k = 0; k <= 8; ++k) a.push_back(std::exp2(-k));
  for (int n : {0, 3, 8}) {
    const auto rep = lemma31_check(a, ParameterSchedule::exp_decay(2.0, 1.5), 0.7, n, 6.0);
    EXPECT_GE(rep.slack, -1e-10);
  }
}

TEST(Lemma31, PureIterationIsTight) {
  const std::array<double, 4> a = {0.0, 0.0, 0.0, 0.0};
  const auto rep = lemma31_check(a, ParameterSchedule::constant(1.0), 1.0, 3, 2.0);
  EXPECT_NEAR(rep.bound, std::pow(2.0, 4) / 24.0, 1e-14);
  EXPECT_NEAR(rep.slack, 0.0, 1e-9);
}

TEST(Lemma31, RejectsInvalidInput) {
  const std::array<double, 2> a = {1.0, 1.0};
  const std::array<double, 2> neg = {1.0, -1.0};
  EXPECT_THROW(lemma31_check(a, ParameterSchedule::constant(1.0), 0.0, 2, 1.0), DomainError);
  EXPECT_THROW(lemma31_check(neg, ParameterSchedule::constant(1.0), 0.0, 1, 1.0), DomainError);
  EXPECT_THROW(lemma31_check(a, ParameterSchedule::constant(-1.0), 0.0, 1, 1.0), DomainError);
  EXPECT_THROW(lemma31_check(a, ParameterSchedule::constant(1.0), -1.0, 1, 1.0), DomainError);
  EXPECT_THROW(lemma31_check(a, ParameterSchedule::constant(1.0), 0.0, 1, 0.0), DomainError);
}

namespace {

RunRecord run_with_trajectory(const RealField& u0, const EquationVariant& v) {
  SolverConfig cfg;
  cfg.dt = 0.02;
  cfg.t_end = 0.4;
  cfg.record_every = 2;
  cfg.keep_trajectory = true;
  return integrate(u0, v, cfg, MonitorSet::standard(u0.grid().dim()));
}

}  // namespace

TEST(Stability, IdenticalDataGiveZeroDifference) {
  TorusGrid g(1, 32);
  const auto u0 = hks::testing::random_smooth(g, 2, 4, 0.2);
  const auto r1 = run_with_trajectory(u0, variant::Classical{});
  const auto r2 = run_with_trajectory(u0, variant::Classical{});
  const auto rep = stability_check(r1, r2, 2.0, {});
  for (double d : rep.difference) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(rep.c_max, 0.0);
}

TEST(Stability, ZeroSchedulesFreezeTheDifference) {
  TorusGrid g(1, 32);
  const auto u1 = hks::testing::random_smooth(g, 2, 4, 0.2);
  const auto u2 = hks::testing::random_smooth(g, 3, 4, 0.2);
  const EquationVariant frozen = variant::Unified{HksParams::constant(0, 0, 0, 0)};
  const auto rep = stability_check(run_with_trajectory(u1, frozen), run_with_trajectory(u2, frozen), 2.0, {});
  for (double e : rep.exponent) EXPECT_EQ(e, 0.0);
  for (double d : rep.difference) EXPECT_NEAR(d, rep.difference.front(), 1e-14);
  EXPECT_EQ(rep.c_max, 0.0);
}

TEST(Stability, NearbyDataGiveFiniteConstant) {
  TorusGrid g(1, 32);
  const auto u1 = hks::testing::random_smooth(g, 2, 4, 0.2);
  auto u2 = u1;
  u2.axpy(1e-3, hks::testing::random_smooth(g, 9, 4));
  const auto rep = stability_check(run_with_trajectory(u1, variant::Classical{}),
                                   run_with_trajectory(u2, variant::Classical{}), 2.0, {});
  EXPECT_TRUE(std::isfinite(rep.c_max));
  for (std::size_t i = 1; i < rep.exponent.size(); ++i) EXPECT_GE(rep.exponent[i], rep.exponent[i - 1]);
}

TEST(Stability, RejectsMissingTrajectoriesAndInterpolatedIndex) {
  TorusGrid g(1, 16);
  const auto u0 = RealField::constant(g, 0.1);
  const auto r = run_with_trajectory(u0, variant::Classical{});
  RunRecord bare = r;
  bare.trajectory.clear();
  EXPECT_THROW(stability_check(bare, r, 2.0, {}), MissingSeriesError);
  EXPECT_THROW(stability_check(r, r, 2.5, {}), DomainError);
}
