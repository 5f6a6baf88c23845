#ifndef PLQFPI_PROX_HPP
#define PLQFPI_PROX_HPP

#include <string>
#include <variant>

#include "plqfpi/projection.hpp"

namespace plqfpi {

/// 1/2 x^T Q x + c^T x with Q symmetric PSD.
struct QuadraticFn {
  Matrix Q;
  Vector c;
};

/// c^T x.
struct LinearFn {
  Vector c;
};

/// Indicator of {x : A x <= b}.
struct PolyhedralIndicator {
  Polyhedron X;
};

/// weight * ||x||_1.
struct L1Norm {
  double weight = 1.0;
};

/// Indicator of {lo <= x <= hi}.
struct BoxIndicator {
  Vector lo;
  Vector hi;
};

/// A convex piecewise linear-quadratic function from one of the shipped classes.
class PLQFunctionSpec {
public:
  using Kind = std::variant<QuadraticFn, LinearFn, PolyhedralIndicator, L1Norm, BoxIndicator>;

  PLQFunctionSpec(Kind kind, Eigen::Index dimension) : kind_(std::move(kind)), dim_(dimension) { validate(); }

  static PLQFunctionSpec quadratic(Matrix Q, Vector c)
  {
    const auto n = c.size();
    return {QuadraticFn{std::move(Q), std::move(c)}, n};
  }
  static PLQFunctionSpec linear(Vector c)
  {
    const auto n = c.size();
    return {LinearFn{std::move(c)}, n};
  }
  static PLQFunctionSpec indicator(Polyhedron X, Eigen::Index n) { return {PolyhedralIndicator{std::move(X)}, n}; }
  static PLQFunctionSpec l1(double weight, Eigen::Index n) { return {L1Norm{weight}, n}; }
  static PLQFunctionSpec box(Vector lo, Vector hi)
  {
    const auto n = lo.size();
    return {BoxIndicator{std::move(lo), std::move(hi)}, n};
  }
  static PLQFunctionSpec zero(Eigen::Index n) { return l1(0.0, n); }

  const Kind& kind() const { return kind_; }
  Eigen::Index dimension() const { return dim_; }

  template <class T>
  bool is() const
  {
    return std::holds_alternative<T>(kind_);
  }
  template <class T>
  const T& as() const
  {
    return std::get<T>(kind_);
  }

  std::string name() const
  {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, QuadraticFn>) return "quadratic";
          else if constexpr (std::is_same_v<T, LinearFn>) return "linear";
          else if constexpr (std::is_same_v<T, PolyhedralIndicator>) return "polyhedral_indicator";
          else if constexpr (std::is_same_v<T, L1Norm>) return "l1";
          else return "box_indicator";
        },
        kind_);
  }

  /// Function value; +infinity outside the domain of indicators.
  double value(const Vector& x, double tol = 1e-9) const
  {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, QuadraticFn>) return 0.5 * x.dot(k.Q * x) + k.c.dot(x);
          else if constexpr (std::is_same_v<T, LinearFn>) return k.c.dot(x);
          else if constexpr (std::is_same_v<T, PolyhedralIndicator>) return k.X.contains(x, tol) ? 0.0 : inf;
          else if constexpr (std::is_same_v<T, L1Norm>) return k.weight * x.lpNorm<1>();
          else
            return ((x - k.lo).array() >= -tol).all() && ((k.hi - x).array() >= -tol).all() ? 0.0 : inf;
        },
        kind_);
  }

private:
  void validate() const
  {
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, QuadraticFn>) {
            require(k.Q.rows() == dim_ && k.Q.cols() == dim_ && k.c.size() == dim_, Errc::shape_mismatch,
                    "quadratic: Q must be n x n and c of size n");
            check_psd(k.Q, 1e-9, "quadratic Q");
          } else if constexpr (std::is_same_v<T, LinearFn>) {
            require(k.c.size() == dim_, Errc::shape_mismatch, "linear: c must have size n");
          } else if constexpr (std::is_same_v<T, PolyhedralIndicator>) {
            require(k.X.rows() == 0 || k.X.dim() == dim_, Errc::shape_mismatch,
                    "polyhedral_indicator: A must have n columns");
          } else if constexpr (std::is_same_v<T, L1Norm>) {
            require(k.weight >= 0.0, Errc::invalid_argument, "l1: weight must be nonnegative");
          } else {
            require(k.lo.size() == dim_ && k.hi.size() == dim_, Errc::shape_mismatch, "box: bounds of size n");
            require((k.lo.array() <= k.hi.array()).all(), Errc::invalid_argument, "box: lo <= hi violated");
          }
        },
        kind_);
  }

  Kind kind_;
  Eigen::Index dim_;
};

inline Vector soft_threshold(const Vector& x, double t)
{
  return x.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
}

/// prox_{gamma f} with any factorisation prepared once; evaluation is pure.
class ProxMap {
public:
  ProxMap(PLQFunctionSpec f, double gamma) : f_(std::move(f)), gamma_(gamma)
  {
    require(gamma > 0.0, Errc::invalid_argument, "prox: gamma must be positive");
    if (f_.is<QuadraticFn>()) {
      const auto& q = f_.as<QuadraticFn>();
      solver_ = (gamma_ * q.Q + Matrix::Identity(f_.dimension(), f_.dimension())).llt();
    } else if (f_.is<PolyhedralIndicator>()) {
      require(is_nonempty(f_.as<PolyhedralIndicator>().X), Errc::infeasible, "prox: polyhedral indicator of an empty set");
    }
  }

  const PLQFunctionSpec& function() const { return f_; }
  double gamma() const { return gamma_; }

  Vector operator()(const Vector& x) const
  {
    require(x.size() == f_.dimension(), Errc::shape_mismatch, "prox: dimension mismatch");
    return std::visit(
        [&](const auto& k) -> Vector {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, QuadraticFn>) return solver_.solve(x - gamma_ * k.c);
          else if constexpr (std::is_same_v<T, LinearFn>) return x - gamma_ * k.c;
          else if constexpr (std::is_same_v<T, PolyhedralIndicator>) return project_active_set(k.X, x).point;
          else if constexpr (std::is_same_v<T, L1Norm>) return soft_threshold(x, gamma_ * k.weight);
          else return x.cwiseMax(k.lo).cwiseMin(k.hi);
        },
        f_.kind());
  }

private:
  PLQFunctionSpec f_;
  double gamma_;
  Eigen::LLT<Matrix> solver_;
};

inline Vector prox(const PLQFunctionSpec& f, double gamma, const Vector& x) { return ProxMap(f, gamma)(x); }

inline Vector reflect(const PLQFunctionSpec& f, double gamma, const Vector& x)
{
  return 2.0 * prox(f, gamma, x) - x;
}

enum class ProjectionMethod { active_set, brute_force };

inline Vector project_polyhedron(const Polyhedron& X, const Vector& u,
                                 ProjectionMethod method = ProjectionMethod::active_set)
{
  if (method == ProjectionMethod::brute_force) return project_brute_force(X, u);
  return project_active_set(X, u).point;
}

/// || prox_{gamma f}(x) + gamma prox_{f*/gamma}(x/gamma) - x ||, with f* supplied by the caller.
inline double moreau_residual(const PLQFunctionSpec& f, const PLQFunctionSpec& f_conj, double gamma, const Vector& x)
{
  require(gamma > 0.0, Errc::invalid_argument, "moreau_residual: gamma must be positive");
  return (prox(f, gamma, x) + gamma * prox(f_conj, 1.0 / gamma, x / gamma) - x).norm();
}

} // namespace plqfpi

#endif // PLQFPI_PROX_HPP
