#ifndef PLQFPI_EXPERIMENT_HPP
#define PLQFPI_EXPERIMENT_HPP

#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "plqfpi/fpi.hpp"
#include "plqfpi/problems.hpp"
#include "plqfpi/pwl.hpp"
#include "plqfpi/rates.hpp"

namespace plqfpi {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string source; // which result or estimator the check realizes
};

inline CheckResult check_le(std::string name, double value, double threshold, std::string source)
{
  return {std::move(name), value, threshold, value <= threshold, std::move(source)};
}

struct VerificationReport {
  std::string label;
  std::vector<CheckResult> checks;
  nlohmann::json details = nlohmann::json::object();
  double seconds = 0.0;

  bool pass() const
  {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline nlohmann::json to_json(const CheckResult& c)
{
  return {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}, {"source", c.source}};
}

inline nlohmann::json to_json(const VerificationReport& r)
{
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"label", r.label}, {"pass", r.pass()}, {"checks", checks}, {"details", r.details}, {"seconds", r.seconds}};
}

inline nlohmann::json to_json(const RateCertificate& c)
{
  return {{"alpha", c.alpha},       {"K", c.K},
          {"rho_dist", c.rho_dist}, {"rho_dist_relaxed", c.rho_dist_relaxed},
          {"rho_seq", c.rho_seq},   {"rho_seq_relaxed", c.rho_seq_relaxed},
          {"note", c.valid_radius_note}};
}

inline nlohmann::json to_json(const EmpiricalRates& e)
{
  return {{"rho_tilde", e.rho_tilde},   {"k_tilde", e.k_tilde}, {"sample_radius", e.sample_radius},
          {"sample_count", e.sample_count}, {"seed", e.seed},   {"estimator", "sampled supremum (lower bound)"}};
}

inline std::vector<double> default_radius_sweep() { return {1e-1, 1e-2, 1e-3, 1e-4}; }

// ---------------------------------------------------------------------------
// Analytic examples

/// (1 - lambda) x: measured K = 1/lambda and rho = 1 - lambda, lower chain tight.
inline VerificationReport verify_example3(double lambda, std::uint64_t seed = 0, std::size_t samples = 200)
{
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double tol = 1e-9;
  const auto F = make_scaled_identity(lambda);
  const auto fix = FixedPointSetDescription::single_point(Vector::Zero(1));
  const auto er = estimate_rates(F, fix, 1.0, samples, seed);
  const auto sw = sandwich(F.alpha(), er.rho_tilde, er.k_tilde);
  VerificationReport r;
  r.label = "example3 lambda=" + detail::fmt_double(lambda);
  r.checks.push_back(check_le("k_tilde == 1/lambda", std::abs(er.k_tilde - 1.0 / lambda), tol, "sampled, seed " + std::to_string(seed)));
  r.checks.push_back(check_le("rho_tilde == 1 - lambda", std::abs(er.rho_tilde - (1.0 - lambda)), tol, "sampled"));
  r.checks.push_back(check_le("lower chain tight: rho_tilde == 1 - 1/k_tilde", std::abs(sw.slack_rho_lower), tol, "sandwich"));
  r.checks.push_back(check_le("sandwich holds: worst violation", sandwich_violation(sw), 1e-12, "sandwich"));
  r.details = {{"alpha", F.alpha()}, {"lambda", lambda}, {"measured", to_json(er)},
               {"slacks", {sw.slack_rho_lower, sw.slack_rho_upper, sw.slack_k_lower, sw.slack_k_upper}}};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Rotation average: measured K = 1/sin(theta/2), rho = cos(theta/2), upper chain tight.
inline VerificationReport verify_example4(double theta, std::uint64_t seed = 0, std::size_t samples = 200)
{
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double tol = 1e-6;
  const auto F = make_rotation_average(theta);
  const auto fix = FixedPointSetDescription::single_point(Vector::Zero(2));
  const auto er = estimate_rates(F, fix, 1.0, samples, seed);
  const auto sw = sandwich(F.alpha(), er.rho_tilde, er.k_tilde);
  VerificationReport r;
  r.label = "example4 theta=" + detail::fmt_double(theta);
  r.checks.push_back(check_le("k_tilde == 1/sin(theta/2)", std::abs(er.k_tilde - 1.0 / std::sin(theta / 2.0)), tol,
                              "sampled, seed " + std::to_string(seed)));
  r.checks.push_back(check_le("rho_tilde == cos(theta/2)", std::abs(er.rho_tilde - std::cos(theta / 2.0)), tol, "sampled"));
  r.checks.push_back(check_le("upper chain tight: rho_tilde == sqrt(1 - 1/k_tilde^2)", std::abs(sw.slack_rho_upper), tol,
                              "sandwich"));
  r.checks.push_back(check_le("sandwich holds: worst violation", sandwich_violation(sw), 1e-12, "sandwich"));
  r.details = {{"alpha", F.alpha()}, {"theta", theta}, {"measured", to_json(er)},
               {"slacks", {sw.slack_rho_lower, sw.slack_rho_upper, sw.slack_k_lower, sw.slack_k_upper}}};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// LP / QP under Douglas-Rachford

struct VerifyOptions {
  double alpha = 0.5;
  std::optional<double> gamma; // default: 1 for LP, 1/(2 lambda_max) for QP
  double tol = 1e-12;
  std::size_t max_iters = 200000;
  std::uint64_t seed = 0;
  std::size_t samples = 2000;
  std::size_t local_starts = 8;
  bool radius_sweep = false;
};

inline double default_gamma(const ProblemInstance& p)
{
  if (p.kind == ProblemKind::qp) return 0.5 / lambda_max(*p.Q);
  return 1.0;
}

struct RunSummary {
  bool converged = false;
  std::size_t steps = 0;
  std::optional<double> terminal_rate; // fitted over the terminal region
  std::optional<double> max_ratio;     // largest single-step ratio there
  std::optional<double> fitted_rate;
  LinearRateCheck rates;
  double optimality_residual = 0.0;
};

/// Full pipeline: pieces, K_F, certificate, runs from a far start and from
/// points near the fixed-point set, sampled constants, and per-step rate checks.
inline VerificationReport verify_dr_instance(const ProblemInstance& p, const VerifyOptions& o = {})
{
  const auto t0 = std::chrono::steady_clock::now();
  require(p.kind == ProblemKind::lp || p.kind == ProblemKind::qp, Errc::invalid_argument,
          "verify: only lp and qp instances have a piecewise analysis");
  const bool qp = p.kind == ProblemKind::qp;
  const double alpha = o.alpha;
  const double gamma = o.gamma.value_or(default_gamma(p));
  const Polyhedron X = p.feasible_set();
  const auto analysis = analyze_dr(X, p.Q, p.c, gamma, alpha);
  const auto dr = make_dr(p.constraint_indicator(), p.smooth_part(), gamma, alpha);
  const double R = analysis.radius.radius;

  VerificationReport r;
  r.label = (p.name.empty() ? problem_kind_name(p.kind) : p.name) + (p.seed ? " seed=" + std::to_string(*p.seed) : "");

  // piece bounds
  double worst_piece = 0.0, null_inclusion = 0.0;
  nlohmann::json pieces = nlohmann::json::array();
  std::vector<char> meets(analysis.pieces.size(), 0);
  for (const auto& fp : analysis.fixset.pieces) meets[static_cast<std::size_t>(fp.source_piece)] = 1;
  for (std::size_t k = 0; k < analysis.pieces.size(); ++k) {
    const auto& piece = analysis.pieces[k];
    worst_piece = std::max(worst_piece, piece.hoffman_bound);
    const double l5 = qp ? null_space_inclusion_residual(piece, *p.Q) : 0.0;
    null_inclusion = std::max(null_inclusion, l5);
    pieces.push_back({{"J", piece.label()},
                      {"rank", piece.J.size()},
                      {"sigma_min_plus", piece.sigma_min_plus},
                      {"hoffman_bound", piece.hoffman_bound},
                      {"meets_fixed_set", static_cast<bool>(meets[k])}});
  }
  const double K = analysis.K;

  std::optional<QpCertificate> qcert;
  double kappa = 1.0, lmax = 0.0;
  if (qp) {
    lmax = lambda_max(*p.Q);
    kappa = condition_number_plus(*p.Q);
    qcert = qp_certificate(alpha, gamma, lmax, kappa);
  }

  if (!qp) {
    const double target = 1.0 / (2.0 * alpha);
    double dev = 0.0;
    for (const auto& piece : analysis.pieces)
      if (piece.hoffman_bound > 0.0) dev = std::max(dev, std::abs(piece.hoffman_bound - target));
    r.checks.push_back(check_le("every nonzero piece bound == 1/(2 alpha)", dev, 1e-12 * target, "LP pieces, 1/sigma_min^+"));
    r.checks.push_back(check_le("K_F == 1/(2 alpha)", std::abs(K - target), 1e-12 * target, "max over pieces meeting Fix"));
  } else {
    const double bound = qcert->compact_K.value_or(qcert->cert.K);
    r.checks.push_back(check_le("every piece 1/sigma_min^+ <= closed-form K", worst_piece, bound * (1.0 + 1e-9),
                                "QP closed form (6 kappa+ at gamma0 = alpha = 1/2)"));
    r.checks.push_back(check_le("null(M_J) in null(Q) and null(A_J)", null_inclusion, 1e-8, "QP null-space inclusion"));
  }

  // certificate from the computed K
  const auto cert = rates_from_K(alpha, K);

  // runs
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = p.n();
  auto unit = [&] {
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = gauss(rng);
    return Vector(u / u.norm());
  };
  std::vector<Vector> starts;
  {
    Vector far(n);
    for (Eigen::Index i = 0; i < n; ++i) far(i) = gauss(rng);
    starts.push_back(far * (1.0 + analysis.fixset.representative.norm()));
  }
  for (std::size_t s = 0; s < o.local_starts; ++s) {
    const auto& piece = analysis.fixset.pieces[s % analysis.fixset.pieces.size()];
    starts.push_back(piece.witness + R * unit());
  }

  std::vector<RunSummary> runs;
  LinearRateCheck worst_rates;
  std::optional<double> worst_terminal;
  std::size_t converged = 0;
  for (const auto& x0 : starts) {
    auto tr = iterate(dr.op, x0, o.tol, o.max_iters);
    attach_distances(tr, analysis.fixset);
    RunSummary s;
    s.converged = tr.stop_reason == StopReason::residual_tol;
    s.steps = tr.steps();
    const double noise = 1e-10 * (1.0 + tr.limit.norm());
    s.terminal_rate = fit_terminal_rate(tr, R, noise);
    s.max_ratio = terminal_contraction(tr, R, noise);
    try {
      s.fitted_rate = fit_asymptotic_rate(tr, 0.5);
    } catch (const Error&) {
    }
    s.optimality_residual = p.optimality_residual(dr.extract(tr.limit));
    converged += s.converged ? 1 : 0;
    if (s.converged) {
      s.rates = check_linear_rates(tr, cert.rho_dist, cert.rho_seq, R);
      worst_rates.worst_distance_excess = std::max(worst_rates.worst_distance_excess, s.rates.worst_distance_excess);
      worst_rates.worst_sequence_excess = std::max(worst_rates.worst_sequence_excess, s.rates.worst_sequence_excess);
      worst_rates.steps_checked += s.rates.steps_checked;
    }
    if (s.terminal_rate) worst_terminal = worst_terminal ? std::max(*worst_terminal, *s.terminal_rate) : *s.terminal_rate;
    runs.push_back(s);
  }

  const auto er = estimate_rates(dr.op, analysis.fixset, R, o.samples, o.seed);
  const auto sw = sandwich(alpha, er.rho_tilde, er.k_tilde);

  const double rate_bound = qp ? qcert->compact_rho.value_or(qcert->rho_bound) + 0.02 : 0.5 + 0.05;
  r.checks.push_back(check_le("fitted terminal residual contraction", worst_terminal.value_or(INFINITY), rate_bound,
                              qp ? "QP closed-form rate + 0.02" : "LP relaxed rate 1/2 + 0.05"));
  r.checks.push_back(check_le("sampled dist/residual <= K_F", er.k_tilde, K * (1.0 + 1e-6),
                              "sampled error bound within the reported radius"));
  r.checks.push_back(check_le("dist(x_{k+1}) <= rho dist(x_k)", worst_rates.worst_distance_excess, 1e-8,
                              "distance-form rate from K_F"));
  r.checks.push_back(check_le("|x_{k+1} - xbar| <= rho_hat |x_k - xbar|", worst_rates.worst_sequence_excess, 1e-8,
                              "sequence-form rate from K_F"));

  double worst_opt = 0.0;
  nlohmann::json run_json = nlohmann::json::array();
  for (const auto& s : runs) {
    worst_opt = std::max(worst_opt, s.optimality_residual);
    run_json.push_back({{"converged", s.converged},
                        {"steps", s.steps},
                        {"terminal_rate", s.terminal_rate ? nlohmann::json(*s.terminal_rate) : nlohmann::json()},
                        {"max_step_ratio", s.max_ratio ? nlohmann::json(*s.max_ratio) : nlohmann::json()},
                        {"fitted_rate", s.fitted_rate ? nlohmann::json(*s.fitted_rate) : nlohmann::json()},
                        {"optimality_residual", s.optimality_residual}});
  }
  r.checks.push_back(check_le("extracted point is optimal", worst_opt, 1e-6, "projected-gradient residual"));

  r.details = {{"n", n},
               {"m", p.m()},
               {"alpha", alpha},
               {"gamma", gamma},
               {"pieces", pieces},
               {"fixed_set_pieces", analysis.fixset.pieces.size()},
               {"K_F", K},
               {"max_piece_bound", worst_piece},
               {"certificate", to_json(cert)},
               {"radius", {{"value", R},
                           {"default", analysis.radius.default_radius},
                           {"min_epsilon", analysis.radius.min_epsilon ? nlohmann::json(*analysis.radius.min_epsilon)
                                                                        : nlohmann::json()},
                           {"note", "estimate: half of eps/(2 alpha), eps the smallest residual floor over pieces without fixed points"}}},
               {"measured", to_json(er)},
               {"sandwich_slacks", {sw.slack_rho_lower, sw.slack_rho_upper, sw.slack_k_lower, sw.slack_k_upper}},
               {"runs", run_json},
               {"runs_converged", converged},
               {"rate_steps_checked", worst_rates.steps_checked}};
  if (!qp) r.details["lp_certificate"] = to_json(lp_certificate(alpha));
  if (qp) {
    r.details["lambda_max"] = lmax;
    r.details["kappa_plus"] = kappa;
    r.details["gamma0"] = qcert->gamma0;
    r.details["qp_certificate"] = to_json(qcert->cert);
    r.details["qp_rho_bound"] = qcert->rho_bound;
    r.details["null_space_inclusion_residual"] = null_inclusion;
    if (qcert->compact_K) r.details["compact_K"] = *qcert->compact_K;
    if (qcert->compact_rho) r.details["compact_rho"] = *qcert->compact_rho;
  }
  if (o.radius_sweep) {
    nlohmann::json sweep = nlohmann::json::array();
    for (double Rs : default_radius_sweep()) sweep.push_back(to_json(estimate_rates(dr.op, analysis.fixset, Rs, o.samples, o.seed)));
    r.details["radius_sweep"] = sweep;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Instance shapes used by the batch verifiers: n in [1, 6], m in [n, 12].
inline std::pair<Eigen::Index, Eigen::Index> batch_shape(std::uint64_t seed)
{
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto n = std::uniform_int_distribution<Eigen::Index>(1, 6)(rng);
  const auto m = std::uniform_int_distribution<Eigen::Index>(n, 12)(rng);
  return {n, m};
}

inline ProblemInstance batch_lp(std::uint64_t seed)
{
  const auto [n, m] = batch_shape(seed);
  return generate_lp(n, m, seed).first;
}

/// QP batch: odd seeds get rank-deficient Q when n > 1.
inline ProblemInstance batch_qp(std::uint64_t seed)
{
  auto [n, m] = batch_shape(seed);
  n = std::max<Eigen::Index>(n, 2);
  m = std::min<Eigen::Index>(m, 10);
  const Eigen::Index rank_q = (seed % 2 == 1) ? std::max<Eigen::Index>(1, n / 2) : n;
  return generate_qp(n, m, rank_q, seed, 10.0).first;
}

} // namespace plqfpi

#endif // PLQFPI_EXPERIMENT_HPP
