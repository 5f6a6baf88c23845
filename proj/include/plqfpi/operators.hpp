#ifndef PLQFPI_OPERATORS_HPP
#define PLQFPI_OPERATORS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plqfpi/prox.hpp"

namespace plqfpi {

enum class Algorithm {
  gradient_descent,
  proximal_point,
  gradient_projection,
  proximal_gradient,
  douglas_rachford,
  peaceman_rachford,
  admm,
  analytic,
};

inline std::string algorithm_name(Algorithm a)
{
  switch (a) {
    case Algorithm::gradient_descent: return "gd";
    case Algorithm::proximal_point: return "prox";
    case Algorithm::gradient_projection: return "gp";
    case Algorithm::proximal_gradient: return "pg";
    case Algorithm::douglas_rachford: return "dr";
    case Algorithm::peaceman_rachford: return "pr";
    case Algorithm::admm: return "admm";
    case Algorithm::analytic: return "analytic";
  }
  return "unknown";
}

/// Which algorithm built an operator and from what data. For DR/PR the
/// functions are stored in the order the reflections are applied.
struct Provenance {
  Algorithm algorithm = Algorithm::analytic;
  std::vector<PLQFunctionSpec> functions;
  std::optional<Polyhedron> set;
  double gamma = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  std::string note;
};

class FixedPointOperator {
public:
  using Map = std::function<Vector(const Vector&)>;

  FixedPointOperator(Eigen::Index dimension, double alpha, Map map, Provenance provenance)
      : dim_(dimension), alpha_(alpha), map_(std::move(map)), prov_(std::move(provenance))
  {
    require(alpha_ > 0.0 && alpha_ <= 1.0, Errc::invalid_argument, "FixedPointOperator: alpha must lie in (0,1]");
  }

  Eigen::Index dimension() const { return dim_; }
  double alpha() const { return alpha_; }
  /// alpha == 1 marks an operator that is only nonexpansive (or not known to be averaged).
  bool averaged() const { return alpha_ < 1.0; }
  const Provenance& provenance() const { return prov_; }

  Vector operator()(const Vector& x) const
  {
    require(x.size() == dim_, Errc::shape_mismatch, "FixedPointOperator: dimension mismatch");
    return map_(x);
  }

  double residual(const Vector& x) const { return ((*this)(x) - x).norm(); }

private:
  Eigen::Index dim_;
  double alpha_;
  Map map_;
  Provenance prov_;
};

/// Recovers an optimiser of the source problem from a fixed point.
struct PrimalExtraction {
  std::function<Vector(const Vector&)> map;
  Vector operator()(const Vector& w) const { return map(w); }
};

struct SplittingOperator {
  FixedPointOperator op;
  PrimalExtraction extract;
};

/// Averaging constant of the composition of an a1- and an a2-averaged map.
inline double compose_alpha(double a1, double a2)
{
  if (a1 >= 1.0 || a2 >= 1.0) return 1.0;
  return (a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2);
}

namespace detail {

inline const QuadraticFn& smooth_part(const PLQFunctionSpec& f, const char* who)
{
  require(f.is<QuadraticFn>(), Errc::invalid_argument, std::string(who) + ": f must be quadratic");
  return f.as<QuadraticFn>();
}

/// alpha of x -> x - lambda grad f; 1 (not averaged) when Q = 0.
inline double gd_alpha(const QuadraticFn& q, double lambda)
{
  require(lambda > 0.0, Errc::invalid_argument, "gradient step must be positive");
  const double L = lambda_max(q.Q);
  if (L <= 1e-14) return 1.0;
  require(lambda < 2.0 / L, Errc::step_too_large, "gradient step lambda >= 2 / lambda_max(Q)");
  return lambda * L / 2.0;
}

} // namespace detail

inline FixedPointOperator make_gd(const PLQFunctionSpec& f, double lambda)
{
  const auto& q = detail::smooth_part(f, "make_gd");
  const double alpha = detail::gd_alpha(q, lambda);
  Provenance p{Algorithm::gradient_descent, {f}, std::nullopt, 0.0, lambda, 0.0, ""};
  if (alpha >= 1.0) p.note = "Q = 0: gradient step is a translation, not averaged";
  Matrix Q = q.Q;
  Vector c = q.c;
  return {f.dimension(), alpha, [Q, c, lambda](const Vector& x) -> Vector { return x - lambda * (Q * x + c); },
          std::move(p)};
}

inline FixedPointOperator make_proximal_point(const PLQFunctionSpec& f, double gamma)
{
  auto P = std::make_shared<ProxMap>(f, gamma);
  return {f.dimension(), 0.5, [P](const Vector& x) { return (*P)(x); },
          Provenance{Algorithm::proximal_point, {f}, std::nullopt, gamma, 0.0, 0.0, ""}};
}

inline FixedPointOperator make_gradient_projection(const PLQFunctionSpec& f, const Polyhedron& S, double lambda)
{
  const auto& q = detail::smooth_part(f, "make_gradient_projection");
  const double a1 = detail::gd_alpha(q, lambda);
  require(S.rows() == 0 || S.dim() == f.dimension(), Errc::shape_mismatch, "make_gradient_projection: dimension");
  require(is_nonempty(S), Errc::infeasible, "make_gradient_projection: S is empty");
  Matrix Q = q.Q;
  Vector c = q.c;
  Polyhedron X = S;
  return {f.dimension(), compose_alpha(a1, 0.5),
          [Q, c, lambda, X](const Vector& x) -> Vector {
            return project_active_set(X, Vector(x - lambda * (Q * x + c))).point;
          },
          Provenance{Algorithm::gradient_projection, {f}, S, 0.0, lambda, 0.0, ""}};
}

inline FixedPointOperator make_proximal_gradient(const PLQFunctionSpec& f, const PLQFunctionSpec& g, double lambda,
                                                 double gamma)
{
  const auto& q = detail::smooth_part(f, "make_proximal_gradient");
  const double a1 = detail::gd_alpha(q, lambda);
  require(g.dimension() == f.dimension(), Errc::shape_mismatch, "make_proximal_gradient: dimension");
  auto P = std::make_shared<ProxMap>(g, gamma);
  Matrix Q = q.Q;
  Vector c = q.c;
  return {f.dimension(), compose_alpha(a1, 0.5),
          [Q, c, lambda, P](const Vector& x) -> Vector { return (*P)(x - lambda * (Q * x + c)); },
          Provenance{Algorithm::proximal_gradient, {f, g}, std::nullopt, gamma, lambda, 0.0, ""}};
}

namespace detail {

inline FixedPointOperator dr_like(const PLQFunctionSpec& f, const PLQFunctionSpec& g, double gamma, double alpha,
                                  Provenance prov)
{
  require(f.dimension() == g.dimension(), Errc::shape_mismatch, "DR: f and g dimensions differ");
  auto Pf = std::make_shared<ProxMap>(f, gamma);
  auto Pg = std::make_shared<ProxMap>(g, gamma);
  // (1 - alpha) w + alpha ref_g(ref_f(w)) == w + 2 alpha (prox_g(2 prox_f(w) - w) - prox_f(w))
  return {f.dimension(), alpha,
          [Pf, Pg, alpha](const Vector& w) -> Vector {
            const Vector x = (*Pf)(w);
            const Vector y = (*Pg)(2.0 * x - w);
            return w + 2.0 * alpha * (y - x);
          },
          std::move(prov)};
}

} // namespace detail

/// Douglas-Rachford: F(w) = (1 - alpha) w + alpha ref_{gamma g}(ref_{gamma f}(w)).
inline SplittingOperator make_dr(const PLQFunctionSpec& f, const PLQFunctionSpec& g, double gamma, double alpha)
{
  require(alpha > 0.0 && alpha < 1.0, Errc::invalid_argument, "make_dr: alpha must lie in (0,1)");
  require(gamma > 0.0, Errc::invalid_argument, "make_dr: gamma must be positive");
  Provenance p{Algorithm::douglas_rachford, {f, g}, std::nullopt, gamma, 0.0, 0.0, ""};
  auto Pf = std::make_shared<ProxMap>(f, gamma);
  return {detail::dr_like(f, g, gamma, alpha, std::move(p)), PrimalExtraction{[Pf](const Vector& w) { return (*Pf)(w); }}};
}

/// Peaceman-Rachford: ref_{gamma g} o ref_{gamma f}; nonexpansive only.
inline FixedPointOperator make_pr(const PLQFunctionSpec& f, const PLQFunctionSpec& g, double gamma)
{
  require(gamma > 0.0, Errc::invalid_argument, "make_pr: gamma must be positive");
  Provenance p{Algorithm::peaceman_rachford, {f, g}, std::nullopt, gamma, 0.0, 0.0,
               "no averaged-operator guarantee (nonexpansive only)"};
  return detail::dr_like(f, g, gamma, 1.0, std::move(p));
}

/// ADMM for min f(x) + g(y) s.t. -x + y = 0 with penalty rho, written as a
/// fixed-point map on W_k = x_{k+1} - u_k (u the scaled dual). The map is
/// Douglas-Rachford with alpha = 1/2, gamma = 1/rho and the first reflection
/// taken through g, the function of the y-update.
inline SplittingOperator make_admm_xy_split(const PLQFunctionSpec& f, const PLQFunctionSpec& g, double rho)
{
  require(rho > 0.0, Errc::invalid_argument, "make_admm_xy_split: rho must be positive");
  const double gamma = 1.0 / rho;
  Provenance p{Algorithm::admm, {g, f}, std::nullopt, gamma, 0.0, rho, "x = y splitting"};
  auto Pg = std::make_shared<ProxMap>(g, gamma);
  return {detail::dr_like(g, f, gamma, 0.5, std::move(p)), PrimalExtraction{[Pg](const Vector& w) { return (*Pg)(w); }}};
}

/// Iterates of the scaled-dual ADMM run directly on the x = y splitting.
struct AdmmTrace {
  std::vector<Vector> x; // x_1 .. x_K
  std::vector<Vector> y; // y_0 .. y_K
  std::vector<Vector> u; // u_0 .. u_K

  /// W_k = x_{k+1} - u_k, the variable on which ADMM is a DR fixed-point iteration.
  Vector dr_variable(std::size_t k) const { return x[k] - u[k]; }
  double primal_residual(std::size_t k) const { return (x[k] - y[k + 1]).norm(); }
};

inline AdmmTrace run_admm_direct(const PLQFunctionSpec& f, const PLQFunctionSpec& g, double rho, const Vector& y0,
                                 const Vector& u0, std::size_t iters)
{
  require(rho > 0.0, Errc::invalid_argument, "run_admm_direct: rho must be positive");
  require(f.is<QuadraticFn>() || f.is<LinearFn>(), Errc::invalid_argument,
          "run_admm_direct: x-update needs a quadratic or linear f");
  const Eigen::Index n = f.dimension();
  require(g.dimension() == n && y0.size() == n && u0.size() == n, Errc::shape_mismatch, "run_admm_direct: dimension");

  Eigen::LLT<Matrix> xsolve;
  if (f.is<QuadraticFn>()) {
    xsolve = (f.as<QuadraticFn>().Q + rho * Matrix::Identity(n, n)).llt();
    require(xsolve.info() == Eigen::Success, Errc::singular_subproblem, "run_admm_direct: singular x-update");
  }
  const ProxMap prox_g(g, 1.0 / rho);

  AdmmTrace t;
  t.y.push_back(y0);
  t.u.push_back(u0);
  for (std::size_t k = 0; k < iters; ++k) {
    const Vector& y = t.y.back();
    const Vector& u = t.u.back();
    // argmin_x f(x) + rho/2 || -x + y + u ||^2
    Vector x = f.is<QuadraticFn>() ? Vector(xsolve.solve(rho * (y + u) - f.as<QuadraticFn>().c))
                                   : Vector(y + u - f.as<LinearFn>().c / rho);
    // argmin_y g(y) + rho/2 || -x + y + u ||^2
    Vector ynext = prox_g(x - u);
    Vector unext = u - x + ynext;
    require(x.allFinite() && ynext.allFinite(), Errc::non_finite, "run_admm_direct: non-finite iterate");
    t.x.push_back(std::move(x));
    t.y.push_back(std::move(ynext));
    t.u.push_back(std::move(unext));
  }
  return t;
}

} // namespace plqfpi

#endif // PLQFPI_OPERATORS_HPP
