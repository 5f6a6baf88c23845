#include <gtest/gtest.h>

#include "oracles.hpp"
#include "plqfpi/linalg.hpp"

using namespace plqfpi;

TEST(PseudoInverse, IdentityIsItsOwnInverse)
{
  EXPECT_LE((pseudo_inverse(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(PseudoInverse, SingleRow)
{
  Matrix A(1, 2);
  A << 2.0, 0.0;
  Matrix expected(2, 1);
  expected << 0.5, 0.0;
  EXPECT_LE((pseudo_inverse(A) - expected).norm(), 1e-14);
}

TEST(PseudoInverse, FullRowRankMatchesNormalEquations)
{
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Matrix A = oracle::gaussian(rng, 4, 6);
    const Matrix P = pseudo_inverse(A);
    EXPECT_LE((A * P * A - A).norm(), 1e-10);
    // A^T (A A^T)^{-1} through an independent elimination, column by column
    const Matrix G = A * A.transpose();
    Matrix Ginv(4, 4);
    for (int j = 0; j < 4; ++j) Ginv.col(j) = *oracle::gauss_solve(G, Vector::Unit(4, j));
    EXPECT_LE(oracle::rel_diff(P, A.transpose() * Ginv), 1e-10);
  }
}

TEST(PseudoInverse, MoorePenroseIdentitiesOnRankDeficientMatrices)
{
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const auto r = static_cast<Eigen::Index>(1 + t % 4);
    const auto m = static_cast<Eigen::Index>(r + t % 3);
    const auto n = static_cast<Eigen::Index>(r + (t / 3) % 4);
    const Matrix A = oracle::gaussian(rng, m, r) * oracle::gaussian(rng, r, n);
    const Matrix P = pseudo_inverse(A);
    EXPECT_LE((A * P * A - A).norm(), 1e-9 * A.norm());
    EXPECT_LE((P * A * P - P).norm(), 1e-9 * P.norm());
    const Matrix AP = A * P, PA = P * A;
    EXPECT_LE((AP - AP.transpose()).norm(), 1e-9);
    EXPECT_LE((PA - PA.transpose()).norm(), 1e-9);
  }
}

TEST(PseudoInverse, ZeroMatrixGivesZero)
{
  EXPECT_EQ(pseudo_inverse(Matrix::Zero(2, 3)).norm(), 0.0);
}

TEST(SpectralSummary, Diagonal)
{
  const Matrix D = Vector((Vector(3) << 3.0, 2.0, 0.0).finished()).asDiagonal();
  const auto s = spectral_summary(D);
  EXPECT_NEAR(s.singular_values(0), 3.0, 1e-15);
  EXPECT_NEAR(s.singular_values(1), 2.0, 1e-15);
  EXPECT_NEAR(s.singular_values(2), 0.0, 1e-15);
  EXPECT_EQ(s.rank, 2);
  EXPECT_NEAR(s.sigma_min_plus, 2.0, 1e-15);
}

TEST(SpectralSummary, ZeroMatrix)
{
  const auto s = spectral_summary(Matrix::Zero(3, 2));
  EXPECT_EQ(s.rank, 0);
  EXPECT_EQ(s.sigma_min_plus, 0.0);
}

TEST(SpectralSummary, ScaledProjectorHasUnitSpectrumAtHalf)
{
  std::mt19937_64 rng(13);
  const double alpha = 0.5;
  for (int t = 0; t < 20; ++t) {
    const Matrix AJ = oracle::gaussian(rng, 1 + t % 3, 4);
    const Matrix M = 2.0 * alpha * pseudo_inverse(AJ) * AJ;
    EXPECT_NEAR(spectral_summary(M).sigma_min_plus, 1.0, 1e-12);
  }
}

TEST(SpectralSummary, MatchesJacobiOracle)
{
  std::mt19937_64 rng(14);
  for (int t = 0; t < 20; ++t) {
    const Matrix A = oracle::gaussian(rng, 3 + t % 3, 4);
    const auto s = spectral_summary(A);
    const auto ref = oracle::singular_values(A);
    for (Eigen::Index i = 0; i < s.singular_values.size(); ++i)
      EXPECT_NEAR(s.singular_values(i), ref[static_cast<std::size_t>(i)], 1e-9 * (1.0 + ref[0]));
  }
}

TEST(SpectralSummary, RankInvariants)
{
  std::mt19937_64 rng(15);
  for (int t = 0; t < 30; ++t) {
    const auto r = static_cast<Eigen::Index>(t % 4);
    Matrix A = Matrix::Zero(4, 5);
    if (r > 0) A = oracle::gaussian(rng, 4, r) * oracle::gaussian(rng, r, 5);
    const auto s = spectral_summary(A, 1e-10);
    EXPECT_EQ(s.rank, r);
    EXPECT_LE(s.rank, 4);
    if (s.rank > 0) {
      EXPECT_GT(s.sigma_min_plus, 1e-10 * s.singular_values(0));
    }
  }
}

TEST(SpectralSummary, RejectsNonPositiveTolerance)
{
  EXPECT_THROW(spectral_summary(Matrix::Identity(2, 2), 0.0), Error);
}

TEST(ProjectorSpectrum, NonzeroSingularValuesAreOne)
{
  std::mt19937_64 rng(16);
  for (int t = 0; t < 30; ++t) {
    const auto r = static_cast<Eigen::Index>(1 + t % 3);
    const Matrix A = oracle::gaussian(rng, 4, r) * oracle::gaussian(rng, r, 5);
    const auto s = spectral_summary(pseudo_inverse(A) * A);
    for (Eigen::Index i = 0; i < s.rank; ++i) EXPECT_NEAR(s.singular_values(i), 1.0, 1e-9);
    EXPECT_EQ(s.rank, r);
  }
}

TEST(ConditionNumber, Identity) { EXPECT_NEAR(condition_number_plus(Matrix::Identity(3, 3)), 1.0, 1e-15); }

TEST(ConditionNumber, IgnoresZeroEigenvalues)
{
  const Matrix Q = Vector((Vector(3) << 4.0, 1.0, 0.0).finished()).asDiagonal();
  EXPECT_NEAR(condition_number_plus(Q), 4.0, 1e-14);
}

TEST(ConditionNumber, RankDeficientMatchesJacobiOracle)
{
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const Matrix Q = oracle::random_psd(rng, 5, 1 + t % 4);
    const auto ev = oracle::jacobi_eigenvalues(Q);
    double lmin = 0.0;
    for (double v : ev)
      if (v > 1e-10 * ev[0]) lmin = v;
    EXPECT_NEAR(condition_number_plus(Q), ev[0] / lmin, 1e-9 * ev[0] / lmin);
  }
}

TEST(ConditionNumber, ScaleInvariant)
{
  std::mt19937_64 rng(18);
  for (int t = 0; t < 20; ++t) {
    const Matrix Q = oracle::random_psd(rng, 4, 2 + t % 3);
    const double c = oracle::uniform(rng, 1e-3, 1e3);
    EXPECT_NEAR(condition_number_plus(c * Q), condition_number_plus(Q), 1e-9 * condition_number_plus(Q));
  }
}

TEST(ConditionNumber, Errors)
{
  Matrix N(2, 2);
  N << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(condition_number_plus(N), Error);
  try {
    condition_number_plus(N);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_psd);
  }
  try {
    condition_number_plus(Matrix::Zero(2, 2));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::zero_matrix);
  }
  Matrix A(2, 2);
  A << 1.0, 0.5, 0.0, 1.0;
  try {
    condition_number_plus(A);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_psd);
  }
}

TEST(NullSpace, SpansKernel)
{
  std::mt19937_64 rng(19);
  const Matrix A = oracle::gaussian(rng, 2, 3) * oracle::gaussian(rng, 3, 5);
  const Matrix N = null_space(A);
  EXPECT_EQ(N.cols(), 3);
  EXPECT_LE((A * N).norm(), 1e-10);
  EXPECT_LE((N.transpose() * N - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(OrthonormalizeRows, DetectsInconsistency)
{
  Matrix A(2, 2);
  A << 1.0, 1.0, 2.0, 2.0;
  Vector b(2);
  b << 1.0, 3.0;
  EXPECT_FALSE(orthonormalize_rows(A, b).consistent);
  b << 1.0, 2.0;
  const auto o = orthonormalize_rows(A, b);
  EXPECT_TRUE(o.consistent);
  EXPECT_EQ(o.W.rows(), 1);
}
