#ifndef PLQFPI_PROJECTION_HPP
#define PLQFPI_PROJECTION_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plqfpi/linalg.hpp"

namespace plqfpi {

/// X = {x : A x <= b}. An empty row set means X = R^n.
struct Polyhedron {
  Matrix A;
  Vector b;

  Polyhedron() = default;
  Polyhedron(Matrix A_, Vector b_) : A(std::move(A_)), b(std::move(b_))
  {
    require(A.rows() == b.size(), Errc::shape_mismatch, "Polyhedron: rows(A) != size(b)");
    require(A.allFinite() && b.allFinite(), Errc::invalid_argument, "Polyhedron: non-finite data");
  }

  static Polyhedron whole_space(Eigen::Index n) { return {Matrix(0, n), Vector(0)}; }

  Eigen::Index dim() const { return A.cols(); }
  Eigen::Index rows() const { return A.rows(); }

  bool contains(const Vector& x, double tol = 1e-8) const
  {
    return rows() == 0 || ((A * x - b).array() <= tol).all();
  }
};

/// {x : A x <= b, E x = e}.
struct PolyhedralSet {
  Matrix A;
  Vector b;
  Matrix E;
  Vector e;

  static PolyhedralSet from(const Polyhedron& X)
  {
    return {X.A, X.b, Matrix(0, X.dim()), Vector(0)};
  }

  Eigen::Index dim() const { return A.cols() > 0 || A.rows() > 0 ? A.cols() : E.cols(); }

  bool contains(const Vector& x, double tol = 1e-8) const
  {
    const bool ineq = A.rows() == 0 || ((A * x - b).array() <= tol).all();
    const bool eq = E.rows() == 0 || ((E * x - e).cwiseAbs().array() <= tol).all();
    return ineq && eq;
  }
};

/// Projection together with its KKT certificate: u - x = A^T y + E^T mu, y >= 0.
struct ProjectionResult {
  Vector point;
  Vector multipliers;    // one per inequality row, zero when inactive
  Vector eq_multipliers; // one per (orthonormalized) equality row
  Matrix eq_rows;        // orthonormal equality rows used by the solver
  std::vector<int> active;
  int iterations = 0;
};

namespace detail {

/// Active constraint in the dual active-set solver. For equalities `sign`
/// records the orientation chosen when the row was added.
struct ActiveRow {
  bool equality;
  int index;
  double sign;
};

class ActiveSet {
public:
  explicit ActiveSet(Eigen::Index n) : n_(n), N_(n, 0) {}

  Eigen::Index size() const { return N_.cols(); }
  const Matrix& normals() const { return N_; }

  void push(const Vector& a)
  {
    N_.conservativeResize(Eigen::NoChange, N_.cols() + 1);
    N_.col(N_.cols() - 1) = a;
    refactor();
  }

  void erase(Eigen::Index k)
  {
    Matrix next(n_, N_.cols() - 1);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < N_.cols(); ++j)
      if (j != k) next.col(c++) = N_.col(j);
    N_ = std::move(next);
    refactor();
  }

  /// Least-squares coefficients r with N r closest to a.
  Vector coefficients(const Vector& a) const
  {
    if (N_.cols() == 0) return Vector(0);
    return qr_.solve(a);
  }

private:
  void refactor()
  {
    if (N_.cols() > 0) qr_.compute(N_);
  }

  Eigen::Index n_;
  Matrix N_;
  Eigen::HouseholderQR<Matrix> qr_;
};

inline double row_scale(const Vector& a, double bi, const Vector& x)
{
  return 1.0 + std::abs(bi) + a.norm() * x.norm();
}

} // namespace detail

/// Euclidean projection of u onto {A x <= b, E x = e} with a Goldfarb-Idnani
/// dual active-set method specialised to the identity Hessian. Starts from the
/// unconstrained minimiser and adds violated rows; X = {} is detected when a
/// violated row cannot be reached by any dual step.
inline ProjectionResult project_active_set(const PolyhedralSet& S, const Vector& u, double tol = 1e-12)
{
  const Eigen::Index n = u.size();
  const Eigen::Index m = S.A.rows();
  require(S.A.cols() == n || m == 0, Errc::shape_mismatch, "project: dimension mismatch (A)");
  require(S.E.cols() == n || S.E.rows() == 0, Errc::shape_mismatch, "project: dimension mismatch (E)");
  require(u.allFinite(), Errc::non_finite, "project: non-finite point");

  ProjectionResult res;
  res.multipliers = Vector::Zero(m);

  OrthonormalRows eq;
  if (S.E.rows() > 0) {
    eq = orthonormalize_rows(S.E, S.e);
    require(eq.consistent, Errc::infeasible, "project: equality constraints are inconsistent");
  } else {
    eq.W = Matrix(0, n);
    eq.w = Vector(0);
  }
  res.eq_rows = eq.W;

  Vector x = u;
  detail::ActiveSet act(n);
  std::vector<detail::ActiveRow> rows;
  std::vector<double> y;
  const int max_iter = static_cast<int>(50 * (m + eq.W.rows() + n + 10));
  int iter = 0;

  // Adds one row (normal a, target beta, violation s = a^T x - beta >= 0).
  auto add_row = [&](const Vector& a, double s, detail::ActiveRow tag) {
    double yp = 0.0;
    while (true) {
      require(++iter <= max_iter, Errc::no_certificate, "project: active-set iteration limit reached");
      const Vector r = act.coefficients(a);
      const Vector z = (rows.empty() ? Vector(-a) : Vector(-(a - act.normals() * r)));
      const double zz = z.squaredNorm();
      const bool step_primal = z.norm() > 1e-12 * a.norm();
      double t2 = step_primal ? s / zz : std::numeric_limits<double>::infinity();
      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index block = -1;
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[j].equality) continue;
        const double rj = r(static_cast<Eigen::Index>(j));
        if (rj > 1e-14 && y[j] / rj < t1) {
          t1 = y[j] / rj;
          block = static_cast<Eigen::Index>(j);
        }
      }
      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        fail(Errc::infeasible, "project: constraint set is empty");
      }
      if (t2 <= t1) {
        x += t2 * z;
        for (std::size_t j = 0; j < rows.size(); ++j) y[j] -= t2 * r(static_cast<Eigen::Index>(j));
        yp += t2;
        act.push(a);
        rows.push_back(tag);
        y.push_back(yp);
        return;
      }
      if (step_primal) x += t1 * z;
      for (std::size_t j = 0; j < rows.size(); ++j) y[j] -= t1 * r(static_cast<Eigen::Index>(j));
      yp += t1;
      s -= step_primal ? t1 * zz : 0.0;
      act.erase(block);
      rows.erase(rows.begin() + block);
      y.erase(y.begin() + block);
      if (s <= 0.0) {
        act.push(a);
        rows.push_back(tag);
        y.push_back(yp);
        return;
      }
    }
  };

  for (Eigen::Index k = 0; k < eq.W.rows(); ++k) {
    const Vector row = eq.W.row(k).transpose();
    const double viol = row.dot(x) - eq.w(k);
    const double sign = viol >= 0.0 ? 1.0 : -1.0;
    add_row(sign * row, std::abs(viol), {true, static_cast<int>(k), sign});
  }

  while (true) {
    int worst = -1;
    double worst_score = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vector a = S.A.row(i).transpose();
      const double an = a.norm();
      const double s = a.dot(x) - S.b(i);
      if (an == 0.0) {
        require(s <= tol * (1.0 + std::abs(S.b(i))), Errc::infeasible, "project: row 0 <= b with b < 0");
        continue;
      }
      if (s <= tol * detail::row_scale(a, S.b(i), x)) continue;
      bool already = false;
      for (const auto& r : rows)
        if (!r.equality && r.index == i) already = true;
      if (already) continue;
      const double score = s / an;
      if (score > worst_score) {
        worst_score = score;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) break;
    const Vector a = S.A.row(worst).transpose();
    add_row(a, a.dot(x) - S.b(worst), {false, worst, 1.0});
  }

  res.point = x;
  res.eq_multipliers = Vector::Zero(eq.W.rows());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].equality) {
      res.eq_multipliers(rows[j].index) = rows[j].sign * y[j];
    } else {
      res.multipliers(rows[j].index) = y[j];
      res.active.push_back(rows[j].index);
    }
  }
  std::sort(res.active.begin(), res.active.end());
  res.iterations = iter;
  return res;
}

inline ProjectionResult project_active_set(const Polyhedron& X, const Vector& u, double tol = 1e-12)
{
  require(X.rows() == 0 || X.dim() == u.size(), Errc::shape_mismatch, "project: dimension mismatch");
  if (X.rows() == 0) {
    ProjectionResult r;
    r.point = u;
    r.multipliers = Vector(0);
    r.eq_multipliers = Vector(0);
    r.eq_rows = Matrix(0, u.size());
    return r;
  }
  return project_active_set(PolyhedralSet::from(X), u, tol);
}

inline bool is_nonempty(const PolyhedralSet& S, Eigen::Index n)
{
  try {
    project_active_set(S, Vector::Zero(n));
    return true;
  } catch (const Error& e) {
    if (e.code() == Errc::infeasible) return false;
    throw;
  }
}

inline bool is_nonempty(const Polyhedron& X)
{
  if (X.rows() == 0) return true;
  return is_nonempty(PolyhedralSet::from(X), X.dim());
}

/// Pi_J(u) = (I - A_J^+ A_J) u + A_J^+ b_J together with its multipliers
/// (A_J A_J^T)^{-1} (A_J u - b_J).
struct FaceProjection {
  Vector point;
  Vector multipliers;
};

inline FaceProjection project_onto_face(const Matrix& AJ, const Vector& bJ, const Vector& u)
{
  if (AJ.rows() == 0) return {u, Vector(0)};
  const Matrix G = AJ * AJ.transpose();
  const Vector y = G.ldlt().solve(AJ * u - bJ);
  return {u - AJ.transpose() * y, y};
}

/// Brute-force projection: enumerate J with rank(A_J^T) = |J| and return the
/// unique candidate Pi_J(u) that is feasible with nonnegative multipliers.
inline Vector project_brute_force(const Polyhedron& X, const Vector& u, double kkt_tol = 1e-8)
{
  const Eigen::Index n = u.size();
  const int m = static_cast<int>(X.rows());
  if (m == 0) return u;
  require(X.dim() == n, Errc::shape_mismatch, "project_brute_force: dimension mismatch");
  require(m <= 20, Errc::too_large, "project_brute_force: too many rows to enumerate");
  require(is_nonempty(X), Errc::infeasible, "project_brute_force: X is empty");

  std::optional<Vector> best;
  const double scale = 1.0 + u.norm() + X.b.cwiseAbs().maxCoeff();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> J;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) J.push_back(i);
    if (static_cast<Eigen::Index>(J.size()) > n) continue;
    const Matrix AJ = select_rows(X.A, J);
    if (!J.empty() && rank(AJ) != static_cast<Eigen::Index>(J.size())) continue;
    const FaceProjection fp = project_onto_face(AJ, select_entries(X.b, J), u);
    if (!X.contains(fp.point, kkt_tol * scale)) continue;
    if (fp.multipliers.size() > 0 && fp.multipliers.minCoeff() < -kkt_tol * scale) continue;
    if (best) {
      if ((*best - fp.point).norm() > 1e-6 * scale)
        fail(Errc::no_certificate, "project_brute_force: two distinct certified candidates");
      continue;
    }
    best = fp.point;
  }
  if (!best) fail(Errc::no_certificate, "project_brute_force: no KKT-certified candidate");
  return *best;
}

/// Minimises 1/2 x^T H x - q^T x over S for H positive definite, by mapping
/// to a Euclidean projection in z = L^T x (H = L L^T).
inline Vector minimize_quadratic(const Matrix& H, const Vector& q, const PolyhedralSet& S)
{
  Eigen::LLT<Matrix> llt(H);
  require(llt.info() == Eigen::Success, Errc::not_psd, "minimize_quadratic: Hessian not positive definite");
  const Matrix L = llt.matrixL();
  const auto Lt = L.transpose().triangularView<Eigen::Upper>();
  // A L^{-T} = (L^{-1} A^T)^T
  PolyhedralSet T;
  T.A = S.A.rows() ? Matrix(L.triangularView<Eigen::Lower>().solve(S.A.transpose()).transpose())
                   : Matrix(0, H.cols());
  T.b = S.b;
  T.E = S.E.rows() ? Matrix(L.triangularView<Eigen::Lower>().solve(S.E.transpose()).transpose())
                   : Matrix(0, H.cols());
  T.e = S.e;
  const Vector u = L.triangularView<Eigen::Lower>().solve(q);
  const Vector z = project_active_set(T, u).point;
  return Lt.solve(z);
}

} // namespace plqfpi

#endif // PLQFPI_PROJECTION_HPP
