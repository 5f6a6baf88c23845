#ifndef PLQFPI_PWL_HPP
#define PLQFPI_PWL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plqfpi/fixed_set.hpp"
#include "plqfpi/operators.hpp"

namespace plqfpi {

inline constexpr int kMaxEnumerationRows = 16;

/// One piece J of the compatible collection for I - F_DR: on the region P_J,
/// x - F_DR(x) = M x - v.
struct ActiveSetPiece {
  std::vector<int> J;
  Matrix AJ;
  Vector bJ;
  Polyhedron region; // P_J = X_J + A_J^T R_+^{|J|}
  Matrix M;
  Vector v;
  double sigma_min_plus = 0.0;
  double hoffman_bound = 0.0;
  bool linear = true; // LP piece (G_J independent of the X_J component)
  double alpha = 0.5;
  Vector gamma_c;

  Vector residual(const Vector& x) const { return M * x - v; }

  std::string label() const
  {
    std::string s = "{";
    for (std::size_t k = 0; k < J.size(); ++k) s += (k ? "," : "") + std::to_string(J[k] + 1);
    return s + "}";
  }
};

/// 1 / sigma_min^+(M); 0 when M = 0 (the zero map has H = 0).
inline double hoffman_bound_piece(const ActiveSetPiece& piece)
{
  const auto s = spectral_summary(piece.M);
  return s.rank == 0 ? 0.0 : 1.0 / s.sigma_min_plus;
}

namespace detail {

struct FaceData {
  std::vector<int> J;
  Matrix AJ;
  Vector bJ;
  Matrix AJpinv; // A_J^T (A_J A_J^T)^{-1}
  Matrix P;      // A_J^dagger A_J
};

/// P_J = {x : A Pi_J(x) <= b, (A_J A_J^T)^{-1}(A_J x - b_J) >= 0}.
inline Polyhedron region_polyhedron(const Polyhedron& X, const FaceData& f)
{
  const Eigen::Index n = X.dim();
  const Eigen::Index m = X.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Vector shift = f.AJpinv * f.bJ; // Pi_J(x) = (I - P) x + shift
  std::vector<Vector> rows;
  std::vector<double> rhs;
  std::vector<char> in_J(static_cast<std::size_t>(m), 0);
  for (int j : f.J) in_J[static_cast<std::size_t>(j)] = 1;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (in_J[static_cast<std::size_t>(i)]) continue;
    const Vector a = ((I - f.P).transpose() * X.A.row(i).transpose()).eval();
    const double r = X.b(i) - X.A.row(i).dot(shift);
    if (a.norm() <= 1e-12 * (1.0 + X.A.row(i).norm())) continue; // implied by X_J being nonempty
    rows.push_back(a);
    rhs.push_back(r);
  }
  if (!f.J.empty()) {
    const Matrix G = f.AJ * f.AJ.transpose();
    const Matrix S = G.ldlt().solve(Matrix::Identity(G.rows(), G.cols()));
    const Matrix SA = S * f.AJ;
    const Vector Sb = S * f.bJ;
    for (Eigen::Index k = 0; k < SA.rows(); ++k) {
      rows.push_back(-SA.row(k).transpose());
      rhs.push_back(-Sb(k));
    }
  }
  Matrix A(static_cast<Eigen::Index>(rows.size()), n);
  Vector b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    A.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    b(static_cast<Eigen::Index>(k)) = rhs[k];
  }
  return {A, b};
}

/// Every J with rank(A_J^T) = |J| and X_J nonempty.
inline std::vector<FaceData> enumerate_faces(const Polyhedron& X, Eigen::Index n)
{
  const int m = static_cast<int>(X.rows());
  require(m <= kMaxEnumerationRows, Errc::too_large,
          "enumeration budget exceeded: m = " + std::to_string(m) + " > " + std::to_string(kMaxEnumerationRows));
  require(m == 0 || X.dim() == n, Errc::shape_mismatch, "enumerate_pieces: A must have n columns");
  require(is_nonempty(X), Errc::infeasible, "enumerate_pieces: X is empty");
  std::vector<FaceData> faces;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> J;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) J.push_back(i);
    if (static_cast<Eigen::Index>(J.size()) > n) continue;
    const Matrix AJ = select_rows(X.A, J);
    const Vector bJ = select_entries(X.b, J);
    if (!J.empty() && rank(AJ) != static_cast<Eigen::Index>(J.size())) continue;
    if (!J.empty() && !is_nonempty(PolyhedralSet{X.A, X.b, AJ, bJ}, n)) continue;
    FaceData f{J, AJ, bJ, Matrix::Zero(n, 0), Matrix::Zero(n, n)};
    if (!J.empty()) {
      // A_J^T = U T with U orthonormal: P = U U^T and A_J^dagger = U T^{-T}, accurate to round-off
      const auto k = static_cast<Eigen::Index>(J.size());
      Eigen::HouseholderQR<Matrix> qr(AJ.transpose());
      const Matrix U = qr.householderQ() * Matrix::Identity(n, k);
      const Matrix T = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
      f.P = U * U.transpose();
      f.AJpinv = U * Matrix(T.transpose()).triangularView<Eigen::Lower>().solve(Matrix::Identity(k, k));
    }
    faces.push_back(std::move(f));
  }
  return faces;
}

inline void check_dr_params(double gamma, double alpha)
{
  require(gamma > 0.0, Errc::invalid_argument, "enumerate_pieces: gamma must be positive");
  require(alpha > 0.0 && alpha < 1.0, Errc::invalid_argument, "enumerate_pieces: alpha must lie in (0,1)");
}

inline void finish_piece(ActiveSetPiece& p)
{
  const auto s = spectral_summary(p.M);
  p.sigma_min_plus = s.sigma_min_plus;
  p.hoffman_bound = s.rank == 0 ? 0.0 : 1.0 / s.sigma_min_plus;
}

} // namespace detail

/// Pieces of I - F_DR for min c^T x over X (f = indicator of X, g = c^T x).
inline std::vector<ActiveSetPiece> enumerate_pieces_lp(const Polyhedron& X, const Vector& c, double gamma, double alpha)
{
  detail::check_dr_params(gamma, alpha);
  const Eigen::Index n = c.size();
  std::vector<ActiveSetPiece> pieces;
  for (auto& f : detail::enumerate_faces(X, n)) {
    ActiveSetPiece p;
    p.region = detail::region_polyhedron(X.rows() ? X : Polyhedron::whole_space(n), f);
    p.M = 2.0 * alpha * f.P;
    p.v = 2.0 * alpha * (f.AJpinv * f.bJ - gamma * c);
    p.J = std::move(f.J);
    p.AJ = std::move(f.AJ);
    p.bJ = std::move(f.bJ);
    p.linear = true;
    p.alpha = alpha;
    p.gamma_c = gamma * c;
    detail::finish_piece(p);
    pieces.push_back(std::move(p));
  }
  return pieces;
}

/// Pieces of I - F_DR for min 1/2 x^T Q x + c^T x over X (f = indicator of X, g = quadratic).
inline std::vector<ActiveSetPiece> enumerate_pieces_qp(const Polyhedron& X, const Matrix& Q, const Vector& c,
                                                       double gamma, double alpha)
{
  detail::check_dr_params(gamma, alpha);
  const Eigen::Index n = c.size();
  require(Q.rows() == n && Q.cols() == n, Errc::shape_mismatch, "enumerate_pieces_qp: Q must be n x n");
  check_psd(Q, 1e-9, "enumerate_pieces_qp Q");
  const Matrix I = Matrix::Identity(n, n);
  const Matrix Rinv = (gamma * Q + I).llt().solve(I);
  std::vector<ActiveSetPiece> pieces;
  for (auto& f : detail::enumerate_faces(X, n)) {
    ActiveSetPiece p;
    p.region = detail::region_polyhedron(X.rows() ? X : Polyhedron::whole_space(n), f);
    const Vector shift = f.AJpinv * f.bJ;
    p.M = 2.0 * alpha * (I - f.P - Rinv * (I - 2.0 * f.P));
    p.v = 2.0 * alpha * (Rinv * (2.0 * shift - gamma * c) - shift);
    p.J = std::move(f.J);
    p.AJ = std::move(f.AJ);
    p.bJ = std::move(f.bJ);
    p.linear = false;
    p.alpha = alpha;
    p.gamma_c = gamma * c;
    detail::finish_piece(p);
    pieces.push_back(std::move(p));
  }
  return pieces;
}

/// Zeros of each piece: {x : M x = v} intersected with P_J, kept when certified nonempty.
inline FixedPointSetDescription fixed_point_set(const std::vector<ActiveSetPiece>& pieces)
{
  FixedPointSetDescription out;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    const auto orth = orthonormalize_rows(p.M, p.v);
    if (!orth.consistent) continue;
    PolyhedralSet S{p.region.A, p.region.b, orth.W, orth.w};
    const Vector least_norm = orth.W.transpose() * orth.w;
    Vector witness;
    try {
      witness = project_active_set(S, least_norm).point;
    } catch (const Error& e) {
      if (e.code() == Errc::infeasible) continue;
      throw;
    }
    const double scale = 1.0 + p.v.norm() + p.M.norm() * witness.norm();
    if ((p.M * witness - p.v).norm() > 1e-8 * scale) continue;
    if (!p.region.contains(witness, 1e-8 * (1.0 + witness.norm()))) continue;
    out.pieces.push_back({std::move(S), static_cast<int>(k), witness});
  }
  require(!out.pieces.empty(), Errc::no_fixed_points, "fixed_point_set: no piece has a zero (problem has no optimum)");
  out.representative = out.pieces.front().witness;
  return out;
}

/// K_F: max Hoffman bound over pieces whose region meets the fixed-point set.
inline double error_bound_constant(const std::vector<ActiveSetPiece>& pieces, const FixedPointSetDescription& fix)
{
  require(!fix.empty(), Errc::empty_fixed_set, "error_bound_constant: empty fixed-point set");
  double K = 0.0;
  for (const auto& fp : fix.pieces) {
    require(fp.source_piece >= 0 && static_cast<std::size_t>(fp.source_piece) < pieces.size(), Errc::invalid_argument,
            "error_bound_constant: fixed-set piece without a source piece");
    K = std::max(K, pieces[static_cast<std::size_t>(fp.source_piece)].hoffman_bound);
  }
  return K;
}

/// inf over P_J of ||G_J||. Exact for LP pieces (a cone projection); a lightly
/// regularised QP solve for QP pieces, which can only overestimate.
inline double piece_residual_floor(const ActiveSetPiece& p, const Vector& anchor)
{
  const Eigen::Index n = p.M.cols();
  if (p.linear) {
    // G_J(x' + A_J^T s) = 2 alpha (A_J^T s + gamma c) for x' in X_J, s >= 0
    const Vector target = -p.gamma_c;
    if (p.J.empty()) return 2.0 * p.alpha * p.gamma_c.norm();
    const Matrix N = null_space(p.AJ);
    const Matrix G = p.AJ * p.AJ.transpose();
    const Matrix SA = G.ldlt().solve(p.AJ);
    PolyhedralSet cone{-SA, Vector::Zero(SA.rows()), N.transpose(), Vector::Zero(N.cols())};
    const Vector q = project_active_set(cone, target).point;
    return 2.0 * p.alpha * (q - target).norm();
  }
  const double delta = 1e-10 * (1.0 + p.M.squaredNorm());
  const Matrix H = p.M.transpose() * p.M + delta * Matrix::Identity(n, n);
  const Vector q = -(p.M.transpose() * p.v + delta * anchor);
  const Vector x = minimize_quadratic(H, q, PolyhedralSet::from(p.region));
  return (p.M * x - p.v).norm();
}

struct RadiusEstimate {
  double radius = 0.0;         // reported sampling radius
  double default_radius = 0.0; // 1e-3 (1 + ||xbar||)
  std::optional<double> min_epsilon; // over pieces without fixed points
  int limiting_piece = -1;
};

inline RadiusEstimate valid_radius_estimate(const std::vector<ActiveSetPiece>& pieces,
                                            const FixedPointSetDescription& fix)
{
  RadiusEstimate r;
  r.default_radius = 1e-3 * (1.0 + fix.representative.norm());
  r.radius = r.default_radius;
  std::vector<char> has_fix(pieces.size(), 0);
  for (const auto& fp : fix.pieces) has_fix[static_cast<std::size_t>(fp.source_piece)] = 1;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (has_fix[k]) continue;
    const double eps = piece_residual_floor(pieces[k], fix.representative);
    if (!r.min_epsilon || eps < *r.min_epsilon) {
      r.min_epsilon = eps;
      r.limiting_piece = static_cast<int>(k);
    }
  }
  // I - F is 2 alpha-Lipschitz, so points closer than eps / (2 alpha) to the
  // fixed-point set cannot lie in a piece whose residual never drops below eps.
  if (r.min_epsilon && !pieces.empty()) {
    const double lip = 2.0 * pieces.front().alpha;
    r.radius = std::min(r.radius, 0.5 * *r.min_epsilon / lip);
  }
  return r;
}

/// Null(M_J) basis vectors w: max of ||Q w|| and ||A_J w||.
inline double null_space_inclusion_residual(const ActiveSetPiece& p, const Matrix& Q)
{
  const Matrix N = null_space(p.M);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < N.cols(); ++k) {
    const Vector w = N.col(k);
    worst = std::max(worst, (Q * w).norm());
    if (p.AJ.rows() > 0) worst = std::max(worst, (p.AJ * w).norm());
  }
  return worst;
}

/// Full piecewise analysis of a DR (or x = y ADMM) operator built from an
/// indicator of X and a linear or quadratic objective.
struct PwlAnalysis {
  std::vector<ActiveSetPiece> pieces;
  FixedPointSetDescription fixset;
  double K = 0.0;
  RadiusEstimate radius;
  double alpha = 0.5;
  double gamma = 1.0;
};

inline PwlAnalysis analyze_dr(const Polyhedron& X, const std::optional<Matrix>& Q, const Vector& c, double gamma,
                              double alpha)
{
  PwlAnalysis a;
  a.alpha = alpha;
  a.gamma = gamma;
  a.pieces = Q ? enumerate_pieces_qp(X, *Q, c, gamma, alpha) : enumerate_pieces_lp(X, c, gamma, alpha);
  a.fixset = fixed_point_set(a.pieces);
  a.K = error_bound_constant(a.pieces, a.fixset);
  a.radius = valid_radius_estimate(a.pieces, a.fixset);
  return a;
}

/// Rebuild the analysis from an operator's provenance. Supported: DR with the
/// indicator reflected first, and x = y ADMM with g the indicator.
inline std::optional<PwlAnalysis> analyze_operator(const FixedPointOperator& F)
{
  const auto& p = F.provenance();
  const bool dr = p.algorithm == Algorithm::douglas_rachford || p.algorithm == Algorithm::admm;
  if (!dr || p.functions.size() != 2 || !p.functions[0].is<PolyhedralIndicator>()) return std::nullopt;
  const auto& X = p.functions[0].as<PolyhedralIndicator>().X;
  const auto& g = p.functions[1];
  if (g.is<LinearFn>()) return analyze_dr(X, std::nullopt, g.as<LinearFn>().c, p.gamma, F.alpha());
  if (g.is<QuadraticFn>()) return analyze_dr(X, g.as<QuadraticFn>().Q, g.as<QuadraticFn>().c, p.gamma, F.alpha());
  return std::nullopt;
}

} // namespace plqfpi

#endif // PLQFPI_PWL_HPP
