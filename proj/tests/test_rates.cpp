#include <gtest/gtest.h>

#include "plqfpi/rates.hpp"

using namespace plqfpi;

namespace {

std::vector<double> alphas() { return {0.05, 0.2, 0.5, 0.75, 0.95}; }

double k_floor(double a) { return std::sqrt((1.0 - a) / a); }

} // namespace

TEST(RatesFromK, HalfAveragedUnitConstant)
{
  const auto r = rates_from_K(0.5, 1.0);
  EXPECT_EQ(r.rho_dist, 0.0);
  EXPECT_EQ(r.rho_dist_relaxed, 0.5);
  EXPECT_NEAR(r.rho_seq, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(r.rho_seq_relaxed, 1.0 - 1.0 / 16.0, 1e-15);
  EXPECT_FALSE(r.valid_radius_note.empty());
}

TEST(RatesFromK, ClosedFormsByHand)
{
  // alpha = 1/4, K = 2: (1 - a)/(a K^2) = 3/4
  const auto r = rates_from_K(0.25, 2.0);
  EXPECT_NEAR(r.rho_dist, 0.5, 1e-15);
  EXPECT_NEAR(r.rho_dist_relaxed, 1.0 - 3.0 / 8.0, 1e-15);
  EXPECT_NEAR(r.rho_seq, std::sqrt(1.0 - 0.5 * 1.5 * 0.25), 1e-15);
  EXPECT_NEAR(r.rho_seq_relaxed, 1.0 - 0.5625 / (16.0 * 0.0625 * 16.0), 1e-15);
}

TEST(RatesFromK, GridInvariants)
{
  for (double a : alphas()) {
    for (double scale : {1.0, 1.01, 1.5, 3.0, 10.0, 1e3}) {
      const double K = k_floor(a) * scale;
      const auto r = rates_from_K(a, K);
      EXPECT_GE(r.rho_dist, 0.0);
      EXPECT_LT(r.rho_dist, 1.0);
      EXPECT_GE(r.rho_dist_relaxed, r.rho_dist - 1e-15) << a << " " << K;
      EXPECT_GE(r.rho_seq, r.rho_dist - 1e-15);
      EXPECT_LT(r.rho_seq, 1.0);
      EXPECT_GE(r.rho_seq_relaxed, r.rho_seq - 1e-15) << a << " " << K;
      EXPECT_LE(r.rho_seq_relaxed, 1.0);
    }
  }
}

TEST(RatesFromK, MonotoneInK)
{
  for (double a : alphas()) {
    double prev = -1.0;
    for (double scale : {1.0, 2.0, 4.0, 8.0}) {
      const double rho = rates_from_K(a, k_floor(a) * scale).rho_dist;
      EXPECT_GT(rho, prev);
      prev = rho;
    }
  }
}

TEST(RatesFromK, Errors)
{
  EXPECT_THROW(rates_from_K(0.0, 2.0), Error);
  EXPECT_THROW(rates_from_K(1.0, 2.0), Error);
  EXPECT_THROW(rates_from_K(0.5, 0.0), Error);
  EXPECT_THROW(rates_from_K(0.5, std::numeric_limits<double>::infinity()), Error);
  try {
    rates_from_K(0.1, 2.0); // floor is 3
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::k_too_small);
  }
}

TEST(KFromRho, Values)
{
  EXPECT_EQ(K_from_rho(0.0), 1.0);
  EXPECT_EQ(K_from_rho(0.5), 2.0);
  EXPECT_NEAR(K_from_rho(0.9), 10.0, 1e-12);
  try {
    K_from_rho(1.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::rho_out_of_range);
  }
  EXPECT_THROW(K_from_rho(-0.1), Error);
}

TEST(KFromRho, RoundTripStaysAboveFloor)
{
  // a rate certified from K gives back a constant no smaller than the floor
  for (double a : alphas())
    for (double scale : {1.0, 2.0, 5.0}) {
      const auto r = rates_from_K(a, k_floor(a) * scale);
      EXPECT_GE(K_from_rho(r.rho_dist), 1.0);
    }
}

TEST(Sandwich, ScaledIdentityIsTightBothWays)
{
  // x -> (1 - l) x is (l/2)-averaged with rho = 1 - l and K = 1/l
  for (double l : {0.1, 0.3, 0.5, 0.9}) {
    const auto s = sandwich(l / 2.0, 1.0 - l, 1.0 / l);
    EXPECT_TRUE(s.all(1e-12));
    EXPECT_LE(sandwich_violation(s), 1e-12);
    EXPECT_NEAR(s.slack_rho_lower, 0.0, 1e-12);
    EXPECT_NEAR(s.slack_k_upper, 0.0, 1e-9);
  }
}

TEST(Sandwich, RotationAverage)
{
  for (double th : {0.5, 1.0, 2.0}) {
    const auto s = sandwich(0.5, std::cos(th / 2.0), 1.0 / std::sin(th / 2.0));
    EXPECT_LE(sandwich_violation(s), 1e-12);
    EXPECT_NEAR(s.slack_rho_upper, 0.0, 1e-12);
    EXPECT_NEAR(s.slack_k_lower, 0.0, 1e-9);
  }
}

TEST(Sandwich, DetectsViolation)
{
  const auto s = sandwich(0.5, 0.9, 1.0); // rho far above the upper bound for K = 1
  EXPECT_FALSE(s.all());
  EXPECT_FALSE(s.rho_upper_ok);
  EXPECT_GT(sandwich_violation(s), 0.5);
}

TEST(Sandwich, UpperRateBoundMatchesCertificate)
{
  for (double a : alphas())
    for (double K : {k_floor(a), 2.0 * k_floor(a) + 1.0, 20.0}) {
      const auto s = sandwich(a, 0.5, K);
      EXPECT_NEAR(s.rho_upper, rates_from_K(a, K).rho_dist, 1e-15) << a << " " << K;
    }
  // at alpha = 1/2 the two rate bounds bracket a nonempty interval for every K >= 1
  for (double K : {1.0, 1.5, 4.0, 100.0}) {
    const auto s = sandwich(0.5, 0.5, K);
    EXPECT_LE(s.rho_lower, s.rho_upper + 1e-15) << K;
  }
}

TEST(LpCertificate, Values)
{
  const auto r = lp_certificate(0.5);
  EXPECT_EQ(r.K, 1.0);
  EXPECT_EQ(r.rho_dist, 0.0);
  EXPECT_EQ(r.rho_dist_relaxed, 0.5);
  const auto q = lp_certificate(0.25);
  EXPECT_EQ(q.K, 2.0);
  EXPECT_NEAR(q.rho_dist, 0.5, 1e-15);
  for (double a : alphas()) EXPECT_NEAR(lp_certificate(a).K, 1.0 / (2.0 * a), 1e-15);
  EXPECT_THROW(lp_certificate(1.0), Error);
}

TEST(QpCertificate, HalfGammaZeroValues)
{
  // kappa = 10, gamma0 = 1/2, alpha = 1/2: K = (1/(2a)) * (1.5 / 0.25) * 9.5 = 57
  const auto q = qp_certificate(0.5, 0.05, 10.0, 10.0);
  EXPECT_NEAR(q.gamma0, 0.5, 1e-15);
  EXPECT_NEAR(q.cert.K, 57.0, 1e-12);
  ASSERT_TRUE(q.compact_K && q.compact_rho);
  EXPECT_NEAR(*q.compact_K, 60.0, 1e-12);
  EXPECT_NEAR(*q.compact_rho, 1.0 - 0.25 / 1800.0, 1e-15);
  const double ratio = 0.25 / (1.5 * 9.5);
  EXPECT_NEAR(q.rho_bound, 1.0 - 0.5 * ratio * ratio, 1e-15);
}

TEST(QpCertificate, CompactValuesDominateExactForms)
{
  for (double a : alphas())
    for (double kappa : {1.0, 2.0, 10.0, 1e4}) {
      const auto q = qp_certificate(a, 0.5, 1.0, kappa);
      ASSERT_TRUE(q.compact_K && q.compact_rho);
      EXPECT_GE(*q.compact_K, q.cert.K * (1.0 - 1e-12));
      EXPECT_GE(*q.compact_rho, q.rho_bound - 1e-15);
      EXPECT_GE(q.rho_bound, q.cert.rho_dist - 1e-12);
    }
}

TEST(QpCertificate, CompactFormOnlyAtHalf)
{
  EXPECT_FALSE(qp_certificate(0.5, 0.3, 1.0, 5.0).compact_K.has_value());
}

TEST(QpCertificate, Errors)
{
  try {
    qp_certificate(0.5, 1.0, 1.0, 2.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::gamma0_out_of_range);
  }
  EXPECT_THROW(qp_certificate(0.5, 0.5, 1.0, 0.5), Error);
  EXPECT_THROW(qp_certificate(0.0, 0.5, 1.0, 2.0), Error);
}
