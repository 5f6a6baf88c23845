#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "plqfpi/fpi.hpp"
#include "plqfpi/problems.hpp"
#include "plqfpi/rates.hpp"

using namespace plqfpi;

namespace {

FixedPointOperator identity_op(Eigen::Index n)
{
  return {n, 0.5, [](const Vector& x) { return x; }, Provenance{}};
}

/// A trace with residuals r_k given directly.
IterationTrace trace_with_residuals(const std::vector<double>& r)
{
  IterationTrace t;
  t.residuals = r;
  double x = 0.0;
  t.iterates.push_back(Vector::Constant(1, x));
  for (double v : r) t.iterates.push_back(Vector::Constant(1, x += v));
  t.limit = t.iterates.back();
  return t;
}

} // namespace

TEST(Iterate, IdentityStopsAfterOneStep)
{
  const auto t = iterate(identity_op(2), Vector::Ones(2), 1e-12, 100);
  EXPECT_EQ(t.steps(), 1u);
  EXPECT_EQ(t.residuals[0], 0.0);
  EXPECT_EQ(t.stop_reason, StopReason::residual_tol);
  EXPECT_EQ(t.iterates.size(), 2u);
}

TEST(Iterate, ScaledIdentityHalvesResiduals)
{
  const auto t = iterate(make_scaled_identity(0.5), Vector::Ones(1), 1e-12, 1000);
  for (std::size_t k = 0; k + 1 < t.residuals.size(); ++k) EXPECT_NEAR(t.residuals[k + 1] / t.residuals[k], 0.5, 1e-12);
  EXPECT_EQ(t.stop_reason, StopReason::residual_tol);
}

TEST(Iterate, RotationAverageResidualRatio)
{
  for (double theta : example4_thetas()) {
    const auto t = iterate(make_rotation_average(theta), Vector::Ones(2), 1e-10, 1000);
    for (std::size_t k = 0; k + 1 < t.residuals.size(); ++k)
      EXPECT_NEAR(t.residuals[k + 1] / t.residuals[k], std::cos(theta / 2.0), 1e-9);
  }
}

TEST(Iterate, MaxItersAndErrors)
{
  const auto t = iterate(make_scaled_identity(0.1), Vector::Ones(1), 1e-12, 5);
  EXPECT_EQ(t.stop_reason, StopReason::max_iters);
  EXPECT_EQ(t.steps(), 5u);
  EXPECT_EQ(stop_reason_name(t.stop_reason), "max_iters");
  EXPECT_THROW(iterate(identity_op(1), Vector::Ones(1), 0.0, 5), Error);
  EXPECT_THROW(iterate(identity_op(1), Vector::Ones(2), 1e-3, 5), Error);
  const FixedPointOperator blowup{1, 1.0, [](const Vector& x) -> Vector { return 1e200 * x; }, Provenance{}};
  try {
    iterate(blowup, Vector::Ones(1), 1e-12, 10);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_finite);
  }
}

TEST(Iterate, ResidualsNonincreasingForAveragedOperators)
{
  std::vector<FixedPointOperator> ops = example_operators();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto [lp, lt] = generate_lp(3, 6, seed);
    ops.push_back(make_dr(lp.constraint_indicator(), lp.smooth_part(), 1.0, 0.3).op);
    const auto [qp, qt] = generate_qp(3, 6, 1 + seed % 3, seed);
    ops.push_back(make_admm_xy_split(qp.smooth_part(), qp.constraint_indicator(), 3.0).op);
    ops.push_back(make_gradient_projection(qp.smooth_part(), qp.feasible_set(), 1.0 / lambda_max(*qp.Q)));
  }
  std::mt19937_64 rng(61);
  for (const auto& F : ops) {
    const auto t = iterate(F, 5.0 * oracle::gaussian(rng, F.dimension()), 1e-12, 5000);
    for (std::size_t k = 0; k + 1 < t.residuals.size(); ++k) EXPECT_LE(t.residuals[k + 1], t.residuals[k] + 1e-12);
  }
}

TEST(EstimateRates, ScaledIdentityIsExact)
{
  for (double lambda : example3_lambdas()) {
    const auto er = estimate_rates(make_scaled_identity(lambda), FixedPointSetDescription::single_point(Vector::Zero(1)),
                                   1.0, 100, 3);
    EXPECT_NEAR(er.k_tilde, 1.0 / lambda, 1e-9);
    EXPECT_NEAR(er.rho_tilde, 1.0 - lambda, 1e-9);
    EXPECT_GT(er.sample_count, 0u);
  }
}

TEST(EstimateRates, RotationAverage)
{
  for (double theta : example4_thetas()) {
    const auto er = estimate_rates(make_rotation_average(theta), FixedPointSetDescription::single_point(Vector::Zero(2)),
                                   1.0, 100, 4);
    EXPECT_NEAR(er.k_tilde, 1.0 / std::sin(theta / 2.0), 1e-6);
    EXPECT_NEAR(er.rho_tilde, std::cos(theta / 2.0), 1e-6);
  }
}

TEST(EstimateRates, DeterministicBySeed)
{
  const auto F = make_rotation_average(1.0);
  const auto fix = FixedPointSetDescription::single_point(Vector::Zero(2));
  const auto a = estimate_rates(F, fix, 0.5, 50, 7);
  const auto b = estimate_rates(F, fix, 0.5, 50, 7);
  EXPECT_EQ(a.rho_tilde, b.rho_tilde);
  EXPECT_EQ(a.k_tilde, b.k_tilde);
  EXPECT_EQ(a.sample_count, b.sample_count);
  EXPECT_EQ(a.seed, 7u);
  EXPECT_EQ(a.sample_radius, 0.5);
}

TEST(EstimateRates, Errors)
{
  const auto F = make_scaled_identity(0.5);
  try {
    estimate_rates(F, FixedPointSetDescription{}, 1.0, 10, 0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_fixed_set);
  }
  EXPECT_THROW(estimate_rates(F, FixedPointSetDescription::single_point(Vector::Zero(1)), 0.0, 10, 0), Error);
  const auto pr = make_pr(PLQFunctionSpec::l1(1.0, 1), PLQFunctionSpec::l1(1.0, 1), 1.0);
  try {
    estimate_rates(pr, FixedPointSetDescription::single_point(Vector::Zero(1)), 1.0, 10, 0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_averaged);
  }
}

TEST(EstimateRates, MeasuredConstantsSatisfyTheSandwich)
{
  for (const auto& F : example_operators()) {
    const auto er = estimate_rates(F, FixedPointSetDescription::single_point(Vector::Zero(F.dimension())), 1.0, 300, 5);
    const double a = F.alpha();
    EXPECT_GE(er.rho_tilde, 0.0);
    EXPECT_LE(er.rho_tilde, 1.0);
    EXPECT_GE(er.rho_tilde, 1.0 - 1.0 / er.k_tilde - 1e-12);
    EXPECT_LE(er.rho_tilde, std::sqrt(1.0 - (1.0 - a) / (a * er.k_tilde * er.k_tilde)) + 1e-6);
    EXPECT_GE(er.k_tilde, std::sqrt((1.0 - a) / (a * (1.0 - er.rho_tilde * er.rho_tilde))) - 1e-6);
    EXPECT_LE(er.k_tilde, 1.0 / (1.0 - er.rho_tilde) + 1e-6);
  }
}

TEST(FitRate, ExactGeometricSequence)
{
  std::vector<double> r;
  for (int k = 0; k < 40; ++k) r.push_back(std::pow(0.8, k));
  EXPECT_NEAR(fit_asymptotic_rate(trace_with_residuals(r), 0.5), 0.8, 1e-12);
}

TEST(FitRate, ScaledIdentityTrace)
{
  const auto t = iterate(make_scaled_identity(0.3), Vector::Ones(1), 1e-12, 1000);
  EXPECT_NEAR(fit_asymptotic_rate(t, 0.5), 0.7, 1e-9);
}

TEST(FitRate, TooShort)
{
  try {
    fit_asymptotic_rate(trace_with_residuals({1.0, 0.5, 0.25}), 0.5);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_short);
  }
}

TEST(TerminalRate, FitIgnoresRoundOff)
{
  auto t = trace_with_residuals({1.0, 0.5, 0.25, 0.125, 1e-13, 1.1e-13});
  attach_limit_distances(t);
  const auto fit = fit_terminal_rate(t, 10.0, 1e-10);
  ASSERT_TRUE(fit.has_value());
  EXPECT_LT(*fit, 0.5);
  const auto worst = terminal_contraction(t, 10.0, 1e-10);
  ASSERT_TRUE(worst.has_value());
  EXPECT_NEAR(*worst, 0.5, 1e-12);
}

TEST(TerminalRate, RegionStart)
{
  auto t = trace_with_residuals({4.0, 2.0, 1.0, 0.5});
  t.dist_to_fix = std::vector<double>{7.5, 3.5, 1.5, 0.5, 0.0};
  EXPECT_EQ(terminal_region_start(t, 2.0), std::optional<std::size_t>(2));
  EXPECT_FALSE(terminal_region_start(t, -1.0).has_value());
}

TEST(LinearRates, ChecksPerStepInequalities)
{
  auto t = iterate(make_scaled_identity(0.5), Vector::Ones(1), 1e-14, 1000);
  attach_distances(t, FixedPointSetDescription::single_point(Vector::Zero(1)));
  const auto ok = check_linear_rates(t, 0.5, 0.5, 10.0);
  EXPECT_LE(ok.worst_distance_excess, 1e-15);
  EXPECT_LE(ok.worst_sequence_excess, 1e-15);
  EXPECT_EQ(ok.steps_checked, t.steps());
  const auto bad = check_linear_rates(t, 0.4, 0.4, 10.0);
  EXPECT_GT(bad.worst_distance_excess, 0.0);
}

TEST(FixedSet, NearestPoint)
{
  const auto fix = FixedPointSetDescription::single_point((Vector(2) << 1.0, 2.0).finished());
  const auto n = nearest_fixed_point(fix, (Vector(2) << 4.0, 6.0).finished());
  EXPECT_NEAR(n.distance, 5.0, 1e-12);
  EXPECT_EQ(n.piece, 0);
  EXPECT_THROW(distance_to_fixed_points(FixedPointSetDescription{}, Vector::Zero(2)), Error);
}
