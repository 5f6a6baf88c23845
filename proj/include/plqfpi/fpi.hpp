#ifndef PLQFPI_FPI_HPP
#define PLQFPI_FPI_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "plqfpi/fixed_set.hpp"
#include "plqfpi/operators.hpp"

namespace plqfpi {

enum class StopReason { residual_tol, max_iters };

inline std::string stop_reason_name(StopReason s) { return s == StopReason::residual_tol ? "residual_tol" : "max_iters"; }

struct IterationTrace {
  std::vector<Vector> iterates; // x_0 .. x_K
  std::vector<double> residuals; // ||x_{k+1} - x_k||, k = 0 .. K-1
  std::optional<std::vector<double>> dist_to_fix; // per iterate
  std::string distance_source; // "fixed_set" or "limit"
  Vector limit;
  StopReason stop_reason = StopReason::max_iters;

  std::size_t steps() const { return residuals.size(); }
};

/// x_{k+1} = F(x_k) until ||x_{k+1} - x_k|| <= residual_tol or max_iters steps.
inline IterationTrace iterate(const FixedPointOperator& F, const Vector& x0, double residual_tol, std::size_t max_iters)
{
  require(residual_tol > 0.0, Errc::invalid_argument, "iterate: residual_tol must be positive");
  require(x0.size() == F.dimension(), Errc::shape_mismatch, "iterate: x0 has the wrong dimension");
  IterationTrace t;
  t.iterates.reserve(std::min<std::size_t>(max_iters + 1, 1u << 16));
  t.iterates.push_back(x0);
  Vector x = x0;
  for (std::size_t k = 0; k < max_iters; ++k) {
    Vector next = F(x);
    require(next.allFinite(), Errc::non_finite, "iterate: iterate left the finite range at step " + std::to_string(k));
    const double r = (next - x).norm();
    t.residuals.push_back(r);
    t.iterates.push_back(next);
    x = std::move(next);
    if (r <= residual_tol) {
      t.stop_reason = StopReason::residual_tol;
      break;
    }
  }
  t.limit = x;
  return t;
}

inline void attach_distances(IterationTrace& t, const FixedPointSetDescription& fix)
{
  std::vector<double> d;
  d.reserve(t.iterates.size());
  for (const auto& x : t.iterates) d.push_back(distance_to_fixed_points(fix, x));
  t.dist_to_fix = std::move(d);
  t.distance_source = "fixed_set";
}

/// Distances to the final iterate; an upper bound on the distance to the fixed-point set.
inline void attach_limit_distances(IterationTrace& t)
{
  std::vector<double> d;
  d.reserve(t.iterates.size());
  for (const auto& x : t.iterates) d.push_back((x - t.limit).norm());
  t.dist_to_fix = std::move(d);
  t.distance_source = "limit";
}

struct EmpiricalRates {
  double rho_tilde = 0.0; // sampled sup dist(F(x), Fix) / dist(x, Fix)
  double k_tilde = 0.0;   // sampled sup dist(x, Fix) / ||F(x) - x||
  double sample_radius = 0.0;
  std::size_t sample_count = 0; // samples that contributed (x outside Fix)
  std::uint64_t seed = 0;
};

/// Sampled estimates of the tightest rate and error-bound constants over
/// points within distance R of the fixed-point set. Sampling gives lower
/// bounds on the true suprema.
inline EmpiricalRates estimate_rates(const FixedPointOperator& F, const FixedPointSetDescription& fix, double R,
                                     std::size_t samples, std::uint64_t seed)
{
  require(!fix.empty(), Errc::empty_fixed_set, "estimate_rates: empty fixed-point set");
  require(R > 0.0, Errc::invalid_argument, "estimate_rates: R must be positive");
  require(F.averaged(), Errc::not_averaged, "estimate_rates: operator is not averaged");
  const Eigen::Index n = F.dimension();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto gaussian = [&] {
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = gauss(rng);
    return g;
  };

  // anchors: each piece's witness plus one more point of every piece
  std::vector<Vector> anchors;
  for (const auto& piece : fix.pieces) {
    anchors.push_back(piece.witness);
    const Vector probe = piece.witness + (1.0 + piece.witness.norm()) * gaussian();
    anchors.push_back(project_active_set(piece.set, probe).point);
  }

  EmpiricalRates out;
  out.sample_radius = R;
  out.seed = seed;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector& a = anchors[s % anchors.size()];
    Vector dir = gaussian();
    const double dn = dir.norm();
    if (dn == 0.0) continue;
    const double r = R * (1.0 - unif(rng)); // (0, R]
    const Vector x = a + (r / dn) * dir;
    const double dx = distance_to_fixed_points(fix, x);
    if (dx <= 1e-13 * (1.0 + x.norm())) continue;
    const Vector Fx = F(x);
    const double res = (Fx - x).norm();
    if (res <= 0.0) continue;
    out.rho_tilde = std::max(out.rho_tilde, distance_to_fixed_points(fix, Fx) / dx);
    out.k_tilde = std::max(out.k_tilde, dx / res);
    ++out.sample_count;
  }
  return out;
}

/// Geometric-mean residual ratio over the final `tail_fraction` of the steps.
inline double fit_asymptotic_rate(const IterationTrace& t, double tail_fraction = 0.5)
{
  require(tail_fraction > 0.0 && tail_fraction <= 1.0, Errc::invalid_argument, "fit_asymptotic_rate: tail_fraction");
  std::vector<double> r = t.residuals;
  while (!r.empty() && !(r.back() > 0.0)) r.pop_back();
  const auto count = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(r.size())));
  require(count >= 10, Errc::too_short, "fit_asymptotic_rate: fewer than 10 positive residuals in the tail");
  const std::size_t first = r.size() - count;
  for (std::size_t k = first; k < r.size(); ++k)
    require(r[k] > 0.0, Errc::too_short, "fit_asymptotic_rate: zero residual inside the tail");
  return std::exp((std::log(r.back()) - std::log(r[first])) / static_cast<double>(count - 1));
}

/// First iterate index from which every iterate lies within `radius` of the fixed-point set.
inline std::optional<std::size_t> terminal_region_start(const IterationTrace& t, double radius)
{
  require(t.dist_to_fix.has_value(), Errc::invalid_argument, "terminal region needs distances");
  const auto& d = *t.dist_to_fix;
  std::optional<std::size_t> start;
  for (std::size_t k = d.size(); k-- > 0;) {
    if (d[k] <= radius) start = k;
    else break;
  }
  return start;
}

/// Largest residual ratio r_{k+1} / r_k over steps starting inside the terminal region.
inline std::optional<double> terminal_contraction(const IterationTrace& t, double radius, double floor = 1e-300)
{
  const auto start = terminal_region_start(t, radius);
  if (!start) return std::nullopt;
  std::optional<double> worst;
  for (std::size_t k = *start; k + 1 < t.residuals.size(); ++k) {
    if (t.residuals[k] <= floor) continue;
    const double q = t.residuals[k + 1] / t.residuals[k];
    worst = worst ? std::max(*worst, q) : q;
  }
  return worst;
}

/// Geometric-mean residual contraction over the terminal region, ignoring residuals
/// below `floor` (round-off). A residual that drops below the floor counts as reaching it.
inline std::optional<double> fit_terminal_rate(const IterationTrace& t, double radius, double floor)
{
  require(floor > 0.0, Errc::invalid_argument, "fit_terminal_rate: floor must be positive");
  const auto start = terminal_region_start(t, radius);
  if (!start || *start >= t.residuals.size() || t.residuals[*start] <= floor) return std::nullopt;
  std::size_t end = *start;
  while (end + 1 < t.residuals.size() && t.residuals[end] > floor) ++end;
  if (end == *start) return std::nullopt;
  const double last = std::max(t.residuals[end], floor);
  return std::exp((std::log(last) - std::log(t.residuals[*start])) / static_cast<double>(end - *start));
}

/// Worst excess of the per-step linear-rate inequalities over the terminal region:
/// dist(x_{k+1}) - rho dist(x_k) and ||x_{k+1} - xbar|| - rho_hat ||x_k - xbar||.
struct LinearRateCheck {
  double worst_distance_excess = -std::numeric_limits<double>::infinity();
  double worst_sequence_excess = -std::numeric_limits<double>::infinity();
  std::size_t steps_checked = 0;
};

inline LinearRateCheck check_linear_rates(const IterationTrace& t, double rho, double rho_hat, double radius)
{
  LinearRateCheck c;
  const auto start = terminal_region_start(t, radius);
  if (!start) return c;
  const auto& d = *t.dist_to_fix;
  for (std::size_t k = *start; k + 1 < t.iterates.size(); ++k) {
    c.worst_distance_excess = std::max(c.worst_distance_excess, d[k + 1] - rho * d[k]);
    const double ek = (t.iterates[k] - t.limit).norm();
    const double ek1 = (t.iterates[k + 1] - t.limit).norm();
    c.worst_sequence_excess = std::max(c.worst_sequence_excess, ek1 - rho_hat * ek);
    ++c.steps_checked;
  }
  return c;
}

} // namespace plqfpi

#endif // PLQFPI_FPI_HPP
