#ifndef PLQFPI_LINALG_HPP
#define PLQFPI_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "plqfpi/error.hpp"

namespace plqfpi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative rank tolerance: singular values above tol * sigma_max count.
inline constexpr double kRankTol = 1e-10;

struct SpectralSummary {
  Vector singular_values; // nonincreasing
  Eigen::Index rank = 0;
  double sigma_min_plus = 0.0; // 0 when rank == 0
};

inline bool all_finite(const Matrix& A) { return A.allFinite(); }

inline SpectralSummary spectral_summary(const Matrix& A, double tol = kRankTol)
{
  require(tol > 0.0, Errc::invalid_argument, "spectral_summary: tol must be positive");
  SpectralSummary s;
  if (A.size() == 0) {
    s.singular_values = Vector(0);
    return s;
  }
  Eigen::JacobiSVD<Matrix> svd(A);
  s.singular_values = svd.singularValues();
  const double smax = s.singular_values(0);
  if (smax <= 0.0) return s;
  for (Eigen::Index i = 0; i < s.singular_values.size(); ++i) {
    if (s.singular_values(i) > tol * smax) {
      s.rank = i + 1;
      s.sigma_min_plus = s.singular_values(i);
    }
  }
  return s;
}

inline Eigen::Index rank(const Matrix& A, double tol = kRankTol) { return spectral_summary(A, tol).rank; }

/// Moore-Penrose pseudo-inverse through a thin SVD; defined for every matrix.
inline Matrix pseudo_inverse(const Matrix& A, double tol = kRankTol)
{
  if (A.size() == 0) return Matrix::Zero(A.cols(), A.rows());
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv(0);
  Vector inv = Vector::Zero(sv.size());
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol * smax) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Orthonormal basis (columns) of Null(A).
inline Matrix null_space(const Matrix& A, double tol = kRankTol)
{
  const Eigen::Index n = A.cols();
  if (A.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Eigen::Index r = 0;
  if (sv.size() > 0 && sv(0) > 0.0)
    while (r < sv.size() && sv(r) > tol * sv(0)) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Equivalent system with orthonormal rows: {x : A x = b} == {x : W x = w}.
/// Returns false when A x = b has no solution (least-squares residual above tol).
struct OrthonormalRows {
  Matrix W;
  Vector w;
  bool consistent = true;
  double residual = 0.0;
};

inline OrthonormalRows orthonormalize_rows(const Matrix& A, const Vector& b, double tol = kRankTol,
                                           double consistency_tol = 1e-9)
{
  OrthonormalRows out;
  const Eigen::Index n = A.cols();
  if (A.rows() == 0) {
    out.W = Matrix(0, n);
    out.w = Vector(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Eigen::Index r = 0;
  if (sv.size() > 0 && sv(0) > 0.0)
    while (r < sv.size() && sv(r) > tol * sv(0)) ++r;
  const Matrix Ur = svd.matrixU().leftCols(r);
  out.W = svd.matrixV().leftCols(r).transpose();
  out.w = (Ur.transpose() * b).cwiseQuotient(sv.head(r));
  const Vector x0 = out.W.transpose() * out.w;
  out.residual = (A * x0 - b).norm();
  out.consistent = out.residual <= consistency_tol * (1.0 + b.norm());
  return out;
}

inline void check_symmetric(const Matrix& Q, double tol, const char* who)
{
  require(Q.rows() == Q.cols(), Errc::shape_mismatch, std::string(who) + ": matrix must be square");
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= tol * scale, Errc::not_psd,
          std::string(who) + ": matrix is not symmetric");
}

/// Eigenvalues of a symmetric matrix, ascending.
inline Vector symmetric_eigenvalues(const Matrix& Q)
{
  if (Q.size() == 0) return Vector(0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double lambda_max(const Matrix& Q)
{
  const Vector ev = symmetric_eigenvalues(Q);
  return ev.size() ? ev(ev.size() - 1) : 0.0;
}

/// Checks symmetry and positive semidefiniteness to a relative tolerance.
inline void check_psd(const Matrix& Q, double tol = 1e-9, const char* who = "matrix")
{
  check_symmetric(Q, tol, who);
  const Vector ev = symmetric_eigenvalues(Q);
  if (ev.size() == 0) return;
  const double top = std::max(0.0, ev(ev.size() - 1));
  require(ev(0) >= -tol * std::max(1.0, top), Errc::not_psd,
          std::string(who) + ": matrix has a negative eigenvalue");
}

/// kappa+(Q) = lambda_max(Q) / lambda_min^+(Q).
inline double condition_number_plus(const Matrix& Q, double tol = kRankTol)
{
  require(tol > 0.0, Errc::invalid_argument, "condition_number_plus: tol must be positive");
  check_symmetric(Q, std::max(tol, 1e-12), "condition_number_plus");
  const Vector ev = symmetric_eigenvalues(Q);
  require(ev.size() > 0, Errc::zero_matrix, "condition_number_plus: empty matrix");
  const double lmax = ev(ev.size() - 1);
  require(lmax > tol, Errc::zero_matrix, "condition_number_plus: lambda_max <= tol");
  require(ev(0) >= -tol * lmax, Errc::not_psd, "condition_number_plus: negative eigenvalue");
  double lmin_plus = lmax;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol * lmax) {
      lmin_plus = ev(i);
      break;
    }
  }
  return lmax / lmin_plus;
}

/// Rows of A selected by `idx`.
inline Matrix select_rows(const Matrix& A, const std::vector<int>& idx)
{
  Matrix out(static_cast<Eigen::Index>(idx.size()), A.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = A.row(idx[k]);
  return out;
}

inline Vector select_entries(const Vector& b, const std::vector<int>& idx)
{
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = b(idx[k]);
  return out;
}

} // namespace plqfpi

#endif // PLQFPI_LINALG_HPP
