#ifndef PLQFPI_PROBLEMS_HPP
#define PLQFPI_PROBLEMS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "plqfpi/operators.hpp"

namespace plqfpi {

inline constexpr Eigen::Index kMaxGeneratedRows = 16;

enum class ProblemKind { lp, qp, lasso, prox_demo };

inline std::string problem_kind_name(ProblemKind k)
{
  switch (k) {
    case ProblemKind::lp: return "lp";
    case ProblemKind::qp: return "qp";
    case ProblemKind::lasso: return "lasso";
    case ProblemKind::prox_demo: return "prox_demo";
  }
  return "unknown";
}

inline ProblemKind parse_problem_kind(const std::string& s)
{
  if (s == "lp") return ProblemKind::lp;
  if (s == "qp") return ProblemKind::qp;
  if (s == "lasso") return ProblemKind::lasso;
  if (s == "prox_demo") return ProblemKind::prox_demo;
  fail(Errc::parse_error, "kind: unknown problem kind '" + s + "'");
}

/// lp:        min c^T x             s.t. x in X
/// qp:        min 1/2 x^T Q x + c^T x s.t. x in X
/// lasso:     min 1/2 x^T Q x + c^T x + l1_weight ||x||_1
/// prox_demo: min l1_weight ||x||_1 if present, else 1/2 x^T Q x + c^T x
struct ProblemInstance {
  ProblemKind kind = ProblemKind::lp;
  std::optional<Matrix> Q;
  Vector c;
  std::optional<Polyhedron> X;
  std::optional<double> l1_weight;
  std::string name;
  std::optional<std::uint64_t> seed;

  Eigen::Index n() const { return c.size(); }
  Eigen::Index m() const { return X ? X->rows() : 0; }
  Polyhedron feasible_set() const { return X ? *X : Polyhedron::whole_space(n()); }

  /// Objective value, ignoring the constraint indicator.
  double objective(const Vector& x) const
  {
    if (kind == ProblemKind::prox_demo && l1_weight) return *l1_weight * x.lpNorm<1>();
    double v = c.dot(x);
    if (Q) v += 0.5 * x.dot(*Q * x);
    if (kind == ProblemKind::lasso && l1_weight) v += *l1_weight * x.lpNorm<1>();
    return v;
  }

  PLQFunctionSpec smooth_part() const
  {
    if (Q) return PLQFunctionSpec::quadratic(*Q, c);
    return PLQFunctionSpec::linear(c);
  }

  PLQFunctionSpec constraint_indicator() const { return PLQFunctionSpec::indicator(feasible_set(), n()); }

  /// Fixed-point residual of projected gradient (or soft-thresholded gradient) at x; zero iff x is optimal.
  double optimality_residual(const Vector& x) const
  {
    if (kind == ProblemKind::prox_demo && l1_weight) return soft_threshold(x, *l1_weight).norm();
    Vector grad = c;
    if (Q) grad += *Q * x;
    if (kind == ProblemKind::lasso) return (x - soft_threshold(x - grad, l1_weight.value_or(0.0))).norm();
    return (x - project_active_set(feasible_set(), Vector(x - grad)).point).norm();
  }

  void validate() const
  {
    const Eigen::Index n = c.size();
    require(n > 0, Errc::shape_mismatch, "c: must be nonempty");
    require(c.allFinite(), Errc::non_finite, "c: entries must be finite");
    if (Q) {
      require(Q->rows() == n && Q->cols() == n, Errc::shape_mismatch, "Q: must be n x n");
      require(Q->allFinite(), Errc::non_finite, "Q: entries must be finite");
      check_psd(*Q, 1e-9, "Q");
    }
    if (X) {
      require(X->rows() == 0 || X->dim() == n, Errc::shape_mismatch, "A: must have n columns");
      require(is_nonempty(*X), Errc::infeasible, "A, b: feasible set is empty");
    }
    if (l1_weight) require(*l1_weight >= 0.0, Errc::invalid_argument, "l1_weight: must be nonnegative");
    switch (kind) {
      case ProblemKind::lp: require(!Q, Errc::invalid_argument, "Q: must be absent for an lp"); break;
      case ProblemKind::qp:
        require(Q.has_value(), Errc::invalid_argument, "Q: required for a qp");
        require(lambda_max(*Q) > 1e-12, Errc::zero_matrix, "Q: must be nonzero for a qp");
        break;
      case ProblemKind::lasso:
        require(Q.has_value() && l1_weight.has_value(), Errc::invalid_argument, "lasso: Q and l1_weight required");
        require(!X || X->rows() == 0, Errc::invalid_argument, "lasso: constraints are not supported");
        break;
      case ProblemKind::prox_demo:
        require(l1_weight.has_value() || Q.has_value(), Errc::invalid_argument, "prox_demo: l1_weight or Q required");
        break;
    }
  }
};

struct GeneratedTruth {
  std::optional<Vector> known_optimum;
  Vector duals;
  std::string construction_note;
};

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string fmt_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_vector(const Vector& v)
{
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v(i));
  return s + "]";
}

inline std::string fmt_matrix(const Matrix& M)
{
  std::string s = "[";
  for (Eigen::Index i = 0; i < M.rows(); ++i) s += (i ? ", " : "") + fmt_vector(M.row(i).transpose());
  return s + "]";
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

inline Vector read_vector(const nlohmann::json& j, const std::string& field)
{
  require(j.is_array(), Errc::parse_error, field + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), Errc::parse_error, field + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Matrix read_matrix(const nlohmann::json& j, const std::string& field, Eigen::Index cols)
{
  require(j.is_array(), Errc::parse_error, field + ": expected an array of rows");
  Matrix M(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector row = read_vector(j[i], field + "[" + std::to_string(i) + "]");
    require(row.size() == cols, Errc::shape_mismatch,
            field + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) + " entries");
    M.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return M;
}

} // namespace detail

/// Canonical text form: sorted keys, one per line, numbers as %.17g.
inline std::string serialize(const ProblemInstance& p)
{
  std::map<std::string, std::string> fields;
  fields["kind"] = detail::json_string(problem_kind_name(p.kind));
  fields["n"] = std::to_string(p.n());
  fields["m"] = std::to_string(p.m());
  fields["c"] = detail::fmt_vector(p.c);
  if (p.Q) fields["Q"] = detail::fmt_matrix(*p.Q);
  if (p.X && p.X->rows() > 0) {
    fields["A"] = detail::fmt_matrix(p.X->A);
    fields["b"] = detail::fmt_vector(p.X->b);
  }
  if (p.l1_weight) fields["l1_weight"] = detail::fmt_double(*p.l1_weight);
  if (!p.name.empty()) fields["name"] = detail::json_string(p.name);
  if (p.seed) fields["seed"] = std::to_string(*p.seed);
  std::string out = "{\n";
  std::size_t k = 0;
  for (const auto& [key, value] : fields) out += "  \"" + key + "\": " + value + (++k < fields.size() ? ",\n" : "\n");
  return out + "}\n";
}

inline ProblemInstance parse_problem(const std::string& text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::parse_error, std::string("problem file: ") + e.what());
  }
  require(j.is_object(), Errc::parse_error, "problem file: top level must be an object");
  for (const char* key : {"kind", "n", "c"})
    require(j.contains(key), Errc::parse_error, std::string(key) + ": required field missing");
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::vector<std::string> known{"kind", "n", "m", "Q", "c", "A", "b", "l1_weight", "name", "seed"};
    require(std::find(known.begin(), known.end(), it.key()) != known.end(), Errc::parse_error,
            it.key() + ": unknown field");
  }
  require(j["kind"].is_string(), Errc::parse_error, "kind: expected a string");
  require(j["n"].is_number_integer() && j["n"].get<long long>() > 0, Errc::parse_error, "n: expected a positive integer");

  ProblemInstance p;
  p.kind = parse_problem_kind(j["kind"].get<std::string>());
  const auto n = static_cast<Eigen::Index>(j["n"].get<long long>());
  p.c = detail::read_vector(j["c"], "c");
  require(p.c.size() == n, Errc::shape_mismatch, "c: expected n = " + std::to_string(n) + " entries");
  if (j.contains("Q")) p.Q = detail::read_matrix(j["Q"], "Q", n);
  const bool hasA = j.contains("A");
  require(hasA == j.contains("b"), Errc::parse_error, "A, b: must be given together");
  if (hasA) {
    Matrix A = detail::read_matrix(j["A"], "A", n);
    Vector b = detail::read_vector(j["b"], "b");
    require(A.rows() == b.size(), Errc::shape_mismatch, "b: expected one entry per row of A");
    p.X = Polyhedron(std::move(A), std::move(b));
  }
  if (j.contains("m")) {
    require(j["m"].is_number_integer(), Errc::parse_error, "m: expected an integer");
    require(j["m"].get<long long>() == p.m(), Errc::shape_mismatch, "m: does not match the rows of A");
  }
  if (j.contains("l1_weight")) {
    require(j["l1_weight"].is_number(), Errc::parse_error, "l1_weight: expected a number");
    p.l1_weight = j["l1_weight"].get<double>();
  }
  if (j.contains("name")) {
    require(j["name"].is_string(), Errc::parse_error, "name: expected a string");
    p.name = j["name"].get<std::string>();
  }
  if (j.contains("seed")) {
    require(j["seed"].is_number_unsigned(), Errc::parse_error, "seed: expected a nonnegative integer");
    p.seed = j["seed"].get<std::uint64_t>();
  }
  p.validate();
  return p;
}

inline ProblemInstance load(const std::string& path)
{
  std::ifstream in(path);
  require(in.good(), Errc::parse_error, "cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

inline void save(const ProblemInstance& p, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::invalid_argument, "cannot write problem file '" + path + "'");
  out << serialize(p);
}

// ---------------------------------------------------------------------------
// Generators

namespace detail {

inline Vector gaussian_vector(std::mt19937_64& rng, Eigen::Index n)
{
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c)
{
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = g(rng);
  return M;
}

/// Unit-norm random rows, a planted point, an active set of size k and positive duals.
struct PlantedConstraints {
  Polyhedron X;
  Vector x_star;
  std::vector<int> J;
  Vector y; // full-length multipliers, zero off J
};

inline PlantedConstraints plant_constraints(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m, Eigen::Index k)
{
  std::uniform_real_distribution<double> dual(0.5, 1.5), slack(0.1, 1.0);
  PlantedConstraints pc;
  Matrix A = gaussian_matrix(rng, m, n);
  for (Eigen::Index i = 0; i < m; ++i) A.row(i).normalize();
  pc.x_star = gaussian_vector(rng, n);
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (int i = 0; i < static_cast<int>(m); ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  pc.J.assign(perm.begin(), perm.begin() + k);
  std::sort(pc.J.begin(), pc.J.end());
  Vector b = A * pc.x_star;
  pc.y = Vector::Zero(m);
  std::vector<char> active(static_cast<std::size_t>(m), 0);
  for (int j : pc.J) {
    active[static_cast<std::size_t>(j)] = 1;
    pc.y(j) = dual(rng);
  }
  for (Eigen::Index i = 0; i < m; ++i)
    if (!active[static_cast<std::size_t>(i)]) b(i) += slack(rng);
  pc.X = Polyhedron(std::move(A), std::move(b));
  return pc;
}

} // namespace detail

/// Random LP with a planted KKT point: c = -A_J^T y, y > 0, b_J = A_J x*.
inline std::pair<ProblemInstance, GeneratedTruth> generate_lp(Eigen::Index n, Eigen::Index m, std::uint64_t seed)
{
  require(n >= 1 && n <= m && m <= kMaxGeneratedRows, Errc::invalid_argument, "generate_lp: need 1 <= n <= m <= 16");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> size(1, n);
  const Eigen::Index k = size(rng);
  auto pc = detail::plant_constraints(rng, n, m, k);
  ProblemInstance p;
  p.kind = ProblemKind::lp;
  p.c = -pc.X.A.transpose() * pc.y;
  p.X = pc.X;
  p.name = "generated-lp";
  p.seed = seed;
  GeneratedTruth t{pc.x_star, pc.y,
                   "planted KKT point: |J*| = " + std::to_string(k) + ", duals in [0.5, 1.5], slacks in [0.1, 1]"};
  return {p, t};
}

/// Random QP with Q = U diag(lambda) U^T of rank rank_q, eigenvalues log-spaced in [1, kappa],
/// and a planted KKT point: c = -Q x* - A_J^T y.
inline std::pair<ProblemInstance, GeneratedTruth> generate_qp(Eigen::Index n, Eigen::Index m, Eigen::Index rank_q,
                                                               std::uint64_t seed, double kappa = 10.0)
{
  require(n >= 1 && m >= 0 && m <= kMaxGeneratedRows, Errc::invalid_argument, "generate_qp: need n >= 1, 0 <= m <= 16");
  require(rank_q >= 1 && rank_q <= n, Errc::invalid_argument, "generate_qp: need 0 < rank_q <= n");
  require(kappa >= 1.0, Errc::invalid_argument, "generate_qp: kappa must be >= 1");
  std::mt19937_64 rng(seed);
  const Eigen::Index kmax = std::min(n, m);
  std::uniform_int_distribution<Eigen::Index> size(std::min<Eigen::Index>(1, kmax), kmax);
  const Eigen::Index k = size(rng);
  const Matrix U = Eigen::HouseholderQR<Matrix>(detail::gaussian_matrix(rng, n, n)).householderQ();
  Vector lam(rank_q);
  for (Eigen::Index i = 0; i < rank_q; ++i)
    lam(i) = rank_q == 1 ? kappa : std::pow(kappa, static_cast<double>(i) / static_cast<double>(rank_q - 1));
  const Matrix Ur = U.leftCols(rank_q);
  Matrix Q = Ur * lam.asDiagonal() * Ur.transpose();
  Q = 0.5 * (Q + Q.transpose()).eval();
  auto pc = detail::plant_constraints(rng, n, m, k);
  ProblemInstance p;
  p.kind = ProblemKind::qp;
  p.Q = Q;
  p.c = -Q * pc.x_star - pc.X.A.transpose() * pc.y;
  if (m > 0) p.X = pc.X;
  p.name = "generated-qp";
  p.seed = seed;
  GeneratedTruth t{pc.x_star, pc.y,
                   "planted KKT point: rank(Q) = " + std::to_string(rank_q) + ", |J*| = " + std::to_string(k) +
                       ", eigenvalues log-spaced in [1, kappa]"};
  return {p, t};
}

/// Stationarity, primal feasibility, dual feasibility and complementarity, as one max norm.
inline double kkt_residual(const ProblemInstance& p, const Vector& x, const Vector& y)
{
  Vector grad = p.c;
  if (p.Q) grad += *p.Q * x;
  double r = 0.0;
  if (p.X && p.X->rows() > 0) {
    const auto& X = *p.X;
    grad += X.A.transpose() * y;
    const Vector s = X.b - X.A * x;
    r = std::max(r, (-s).cwiseMax(0.0).maxCoeff());
    r = std::max(r, (-y).cwiseMax(0.0).maxCoeff());
    r = std::max(r, y.cwiseProduct(s).cwiseAbs().maxCoeff());
  }
  return std::max(r, grad.cwiseAbs().maxCoeff());
}

// ---------------------------------------------------------------------------
// Analytic operators

/// x -> (1 - lambda) x: gradient descent on 1/2 x^2 in one dimension.
inline FixedPointOperator make_scaled_identity(double lambda)
{
  require(lambda > 0.0 && lambda < 1.0, Errc::invalid_argument, "scaled identity: lambda must lie in (0,1)");
  return make_gd(PLQFunctionSpec::quadratic(Matrix::Identity(1, 1), Vector::Zero(1)), lambda);
}

/// x -> 1/2 (x + N_theta x) with N_theta the planar rotation by theta.
inline FixedPointOperator make_rotation_average(double theta)
{
  require(theta > 0.0 && theta < std::numbers::pi, Errc::invalid_argument, "rotation average: theta in (0, pi)");
  Matrix N(2, 2);
  N << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Matrix T = 0.5 * (Matrix::Identity(2, 2) + N);
  Provenance p;
  p.algorithm = Algorithm::analytic;
  p.note = "rotation average, theta = " + detail::fmt_double(theta);
  return {2, 0.5, [T](const Vector& x) -> Vector { return T * x; }, std::move(p)};
}

inline std::vector<double> example3_lambdas() { return {0.1, 0.3, 0.5, 0.9}; }
inline std::vector<double> example4_thetas()
{
  constexpr double pi = std::numbers::pi;
  return {pi / 6.0, pi / 3.0, pi / 2.0, 2.0 * pi / 3.0};
}

inline std::vector<FixedPointOperator> example_operators()
{
  std::vector<FixedPointOperator> ops;
  for (double l : example3_lambdas()) ops.push_back(make_scaled_identity(l));
  for (double t : example4_thetas()) ops.push_back(make_rotation_average(t));
  return ops;
}

} // namespace plqfpi

#endif // PLQFPI_PROBLEMS_HPP
