#ifndef PLQFPI_RATES_HPP
#define PLQFPI_RATES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "plqfpi/error.hpp"

namespace plqfpi {

inline constexpr const char* kRadiusCaveat =
    "rates hold only within the local error-bound radius R, which depends on the problem data";

struct RateCertificate {
  double alpha = 0.0;
  double K = 0.0;
  double rho_dist = 0.0;
  double rho_dist_relaxed = 0.0;
  double rho_seq = 0.0;
  double rho_seq_relaxed = 0.0;
  std::string valid_radius_note = kRadiusCaveat;
};

/// Linear rates implied by an error bound with constant K for an alpha-averaged operator.
inline RateCertificate rates_from_K(double alpha, double K)
{
  require(alpha > 0.0 && alpha < 1.0, Errc::invalid_argument, "rates_from_K: alpha must lie in (0,1)");
  require(K > 0.0 && std::isfinite(K), Errc::invalid_argument, "rates_from_K: K must be positive and finite");
  const double floor = std::sqrt((1.0 - alpha) / alpha);
  require(K >= floor * (1.0 - 1e-12), Errc::k_too_small, "rates_from_K: K below sqrt((1 - alpha) / alpha)");
  RateCertificate r;
  r.alpha = alpha;
  r.K = K;
  const double t = (1.0 - alpha) / (alpha * K * K);
  r.rho_dist = std::sqrt(std::max(0.0, 1.0 - t));
  r.rho_dist_relaxed = 1.0 - t / 2.0;
  const double rho = r.rho_dist;
  r.rho_seq = std::sqrt(std::max(0.0, 1.0 - 0.5 * (1.0 + rho) * (1.0 - rho) * (1.0 - rho)));
  r.rho_seq_relaxed = 1.0 - (1.0 - alpha) * (1.0 - alpha) / (16.0 * alpha * alpha * K * K * K * K);
  return r;
}

/// Error-bound constant implied by a linear rate rho.
inline double K_from_rho(double rho)
{
  require(rho >= 0.0 && rho < 1.0, Errc::rho_out_of_range, "K_from_rho: rho must lie in [0,1)");
  return 1.0 / (1.0 - rho);
}

/// The four inequalities between the tightest rate and error-bound constants.
/// Slacks are (right side - left side); nonnegative when the inequality holds.
struct SandwichResult {
  double rho_lower = 0.0; // 1 - 1/K
  double rho_upper = 0.0; // sqrt(1 - (1-alpha)/(alpha K^2))
  double k_lower = 0.0;   // sqrt((1-alpha)/(alpha (1 - rho^2)))
  double k_upper = 0.0;   // 1/(1 - rho)
  double slack_rho_lower = 0.0;
  double slack_rho_upper = 0.0;
  double slack_k_lower = 0.0;
  double slack_k_upper = 0.0;
  bool rho_lower_ok = false;
  bool rho_upper_ok = false;
  bool k_lower_ok = false;
  bool k_upper_ok = false;

  bool all(double tol = 0.0) const
  {
    return slack_rho_lower >= -tol && slack_rho_upper >= -tol && slack_k_lower >= -tol && slack_k_upper >= -tol;
  }
};

inline SandwichResult sandwich(double alpha, double rho_tilde, double k_tilde, double tol = 0.0)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  SandwichResult s;
  s.rho_lower = k_tilde > 0.0 ? 1.0 - 1.0 / k_tilde : -inf;
  s.rho_upper = k_tilde > 0.0 ? std::sqrt(std::max(0.0, 1.0 - (1.0 - alpha) / (alpha * k_tilde * k_tilde))) : 0.0;
  s.k_lower = rho_tilde < 1.0 ? std::sqrt((1.0 - alpha) / (alpha * (1.0 - rho_tilde * rho_tilde))) : inf;
  s.k_upper = rho_tilde < 1.0 ? 1.0 / (1.0 - rho_tilde) : inf;
  s.slack_rho_lower = rho_tilde - s.rho_lower;
  s.slack_rho_upper = s.rho_upper - rho_tilde;
  s.slack_k_lower = k_tilde - s.k_lower;
  s.slack_k_upper = s.k_upper - k_tilde;
  s.rho_lower_ok = s.slack_rho_lower >= -tol;
  s.rho_upper_ok = s.slack_rho_upper >= -tol;
  s.k_lower_ok = s.slack_k_lower >= -tol;
  s.k_upper_ok = s.slack_k_upper >= -tol;
  return s;
}

/// Largest amount by which any of the four inequalities fails; zero when all hold.
inline double sandwich_violation(const SandwichResult& s)
{
  return std::max({0.0, -s.slack_rho_lower, -s.slack_rho_upper, -s.slack_k_lower, -s.slack_k_upper});
}

/// LP under DR: K = 1/(2 alpha).
inline RateCertificate lp_certificate(double alpha)
{
  require(alpha > 0.0 && alpha < 1.0, Errc::invalid_argument, "lp_certificate: alpha must lie in (0,1)");
  auto r = rates_from_K(alpha, 1.0 / (2.0 * alpha));
  r.valid_radius_note = std::string("LP: K = 1/(2 alpha); ") + kRadiusCaveat;
  return r;
}

struct QpCertificate {
  RateCertificate cert; // K is the closed-form bound, rates from it
  double gamma0 = 0.0;
  double kappa_plus = 0.0;
  double rho_bound = 0.0; // closed-form distance-rate bound
  std::optional<double> compact_K;   // 3 kappa / alpha, when gamma0 = 1/2
  std::optional<double> compact_rho; // 1 - alpha(1-alpha)/(18 kappa^2), when gamma0 = 1/2
};

/// QP under DR with gamma0 = gamma lambda_max(Q) < 1.
inline QpCertificate qp_certificate(double alpha, double gamma, double lambda_max, double kappa_plus)
{
  require(alpha > 0.0 && alpha < 1.0, Errc::invalid_argument, "qp_certificate: alpha must lie in (0,1)");
  require(kappa_plus >= 1.0, Errc::invalid_argument, "qp_certificate: kappa+ must be >= 1");
  const double g0 = gamma * lambda_max;
  require(g0 > 0.0 && g0 < 1.0, Errc::gamma0_out_of_range, "qp_certificate: gamma0 = gamma lambda_max must lie in (0,1)");
  QpCertificate q;
  q.gamma0 = g0;
  q.kappa_plus = kappa_plus;
  const double K = (1.0 / (2.0 * alpha)) * ((1.0 + g0) / ((1.0 - g0) * g0)) * (kappa_plus - g0);
  q.cert = rates_from_K(alpha, K);
  const double ratio = (1.0 - g0) * g0 / ((1.0 + g0) * (kappa_plus - g0));
  q.rho_bound = 1.0 - 2.0 * alpha * (1.0 - alpha) * ratio * ratio;
  q.cert.valid_radius_note = std::string("QP: closed-form K from gamma0 and kappa+; ") + kRadiusCaveat;
  if (std::abs(g0 - 0.5) <= 1e-12) {
    q.compact_K = 3.0 * kappa_plus / alpha;
    q.compact_rho = 1.0 - alpha * (1.0 - alpha) / (18.0 * kappa_plus * kappa_plus);
  }
  return q;
}

} // namespace plqfpi

#endif // PLQFPI_RATES_HPP
