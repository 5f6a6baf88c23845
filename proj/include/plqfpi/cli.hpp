#ifndef PLQFPI_CLI_HPP
#define PLQFPI_CLI_HPP

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "plqfpi/experiment.hpp"

namespace plqfpi::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kMaxIters = 3;
inline constexpr int kTooLarge = 4;
inline constexpr int kCheckFailed = 5;

struct Params {
  std::string problem;
  std::string algorithm = "dr";
  std::string builtin;
  std::string out;
  std::optional<double> alpha, gamma, rho, lambda, theta;
  double tol = 1e-10;
  std::size_t max_iters = 200000;
  std::uint64_t seed = 0;
  std::size_t seeds = 10;
  std::size_t samples = 2000;
  bool radius_sweep = false;
};

inline Algorithm parse_algorithm(const std::string& s)
{
  for (auto a : {Algorithm::gradient_descent, Algorithm::proximal_point, Algorithm::gradient_projection,
                 Algorithm::proximal_gradient, Algorithm::douglas_rachford, Algorithm::peaceman_rachford,
                 Algorithm::admm})
    if (algorithm_name(a) == s) return a;
  fail(Errc::invalid_argument, "algorithm: unknown '" + s + "' (gd, prox, gp, pg, dr, pr, admm)");
}

/// Parameters after defaults are filled in from the problem data.
struct Resolved {
  double alpha = 0.5;
  double gamma = 1.0;
  double rho = 1.0;
  double lambda = 1.0;
};

inline Resolved resolve(const ProblemInstance& p, const Params& prm)
{
  Resolved r;
  const double lmax = p.Q ? lambda_max(*p.Q) : 0.0;
  r.alpha = prm.alpha.value_or(0.5);
  r.gamma = prm.gamma.value_or(p.kind == ProblemKind::qp ? 0.5 / lmax : 1.0);
  r.rho = prm.rho.value_or(1.0 / r.gamma);
  r.lambda = prm.lambda.value_or(lmax > 1e-14 ? 1.0 / lmax : 1.0);
  return r;
}

struct Built {
  FixedPointOperator op;
  PrimalExtraction extract;
  std::optional<FixedPointSetDescription> fixset;
  std::string note;
};

inline PrimalExtraction identity_extraction()
{
  return {[](const Vector& x) { return x; }};
}

inline Built build_operator(const ProblemInstance& p, Algorithm alg, const Resolved& r)
{
  const Eigen::Index n = p.n();
  const bool constrained = p.kind == ProblemKind::lp || p.kind == ProblemKind::qp;
  auto quad = [&] { return PLQFunctionSpec::quadratic(p.Q ? *p.Q : Matrix::Zero(n, n), p.c); };
  auto unsupported = [&]() -> Built {
    fail(Errc::invalid_argument,
         "algorithm '" + algorithm_name(alg) + "' is not available for a " + problem_kind_name(p.kind) +
             (constrained && p.m() > 0 ? " with constraints" : ""));
  };

  if (constrained) {
    const auto ind = p.constraint_indicator();
    const auto smooth = p.smooth_part();
    switch (alg) {
      case Algorithm::douglas_rachford: {
        auto s = make_dr(ind, smooth, r.gamma, r.alpha);
        return {s.op, s.extract, std::nullopt, ""};
      }
      case Algorithm::peaceman_rachford: {
        auto P = std::make_shared<ProxMap>(ind, r.gamma);
        return {make_pr(ind, smooth, r.gamma), PrimalExtraction{[P](const Vector& w) { return (*P)(w); }}, std::nullopt,
                "no averaged-operator guarantee"};
      }
      case Algorithm::admm: {
        auto s = make_admm_xy_split(smooth, ind, r.rho);
        return {s.op, s.extract, std::nullopt, "x = y splitting; DR on W = x - u with gamma = 1/rho"};
      }
      case Algorithm::gradient_projection:
        return {make_gradient_projection(quad(), p.feasible_set(), r.lambda), identity_extraction(), std::nullopt, ""};
      case Algorithm::proximal_gradient:
        return {make_proximal_gradient(quad(), ind, r.lambda, r.lambda), identity_extraction(), std::nullopt, ""};
      case Algorithm::gradient_descent:
        if (p.m() > 0) return unsupported();
        return {make_gd(quad(), r.lambda), identity_extraction(), std::nullopt, ""};
      case Algorithm::proximal_point:
        if (p.m() > 0) return unsupported();
        return {make_proximal_point(smooth, r.gamma), identity_extraction(), std::nullopt, ""};
      default: return unsupported();
    }
  }
  if (p.kind == ProblemKind::lasso) {
    const auto f = quad();
    const auto g = PLQFunctionSpec::l1(*p.l1_weight, n);
    switch (alg) {
      case Algorithm::proximal_gradient:
        return {make_proximal_gradient(f, g, r.lambda, r.lambda), identity_extraction(), std::nullopt, ""};
      case Algorithm::douglas_rachford: {
        auto s = make_dr(g, f, r.gamma, r.alpha);
        return {s.op, s.extract, std::nullopt, ""};
      }
      case Algorithm::peaceman_rachford: {
        auto P = std::make_shared<ProxMap>(g, r.gamma);
        return {make_pr(g, f, r.gamma), PrimalExtraction{[P](const Vector& w) { return (*P)(w); }}, std::nullopt,
                "no averaged-operator guarantee"};
      }
      case Algorithm::admm: {
        auto s = make_admm_xy_split(f, g, r.rho);
        return {s.op, s.extract, std::nullopt, "x = y splitting; DR on W = x - u with gamma = 1/rho"};
      }
      default: return unsupported();
    }
  }
  // prox_demo
  const auto f = p.l1_weight ? PLQFunctionSpec::l1(*p.l1_weight, n) : quad();
  if (alg == Algorithm::proximal_point) return {make_proximal_point(f, r.gamma), identity_extraction(), std::nullopt, ""};
  if (alg == Algorithm::gradient_descent && !p.l1_weight) return {make_gd(f, r.lambda), identity_extraction(), std::nullopt, ""};
  return unsupported();
}

/// Fixed-point set for DR-type operators on lp/qp; empty when outside the budget.
inline std::optional<FixedPointSetDescription> fixed_set_for(const ProblemInstance& p, Algorithm alg, const Resolved& r)
{
  if (p.kind != ProblemKind::lp && p.kind != ProblemKind::qp) return std::nullopt;
  if (p.m() > kMaxEnumerationRows) return std::nullopt;
  double gamma = r.gamma;
  if (alg == Algorithm::admm) gamma = 1.0 / r.rho;
  else if (alg != Algorithm::douglas_rachford && alg != Algorithm::peaceman_rachford) return std::nullopt;
  // the fixed-point set of (1 - a) I + a N does not depend on a, so PR shares DR's
  return analyze_dr(p.feasible_set(), p.Q, p.c, gamma, 0.5).fixset;
}

inline std::string fmt(double v) { return detail::fmt_double(v); }

inline void write_file(const std::string& path, const std::string& text)
{
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Errc::invalid_argument, "cannot write '" + path + "'");
  f << text;
}

inline Vector start_point(Eigen::Index n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = g(rng);
  return x;
}

inline nlohmann::json echo_params(const Params& prm, const Resolved& r)
{
  return {{"alpha", r.alpha},   {"gamma", r.gamma}, {"rho", r.rho},
          {"lambda", r.lambda}, {"tol", prm.tol},   {"max_iters", prm.max_iters},
          {"seed", prm.seed},   {"radius_sweep", prm.radius_sweep}};
}

// ---------------------------------------------------------------------------

inline int cmd_solve(const Params& prm, std::ostream& out)
{
  const auto p = load(prm.problem);
  const auto alg = parse_algorithm(prm.algorithm);
  const auto r = resolve(p, prm);
  auto built = build_operator(p, alg, r);
  const auto fix = fixed_set_for(p, alg, r);

  auto tr = iterate(built.op, start_point(p.n(), prm.seed), prm.tol, prm.max_iters);
  if (fix) attach_distances(tr, *fix);
  else if (tr.stop_reason == StopReason::residual_tol) attach_limit_distances(tr);

  std::string csv = "iter,residual,dist_to_fix,objective\n";
  for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
    csv += std::to_string(k) + ",";
    if (k < tr.residuals.size()) csv += fmt(tr.residuals[k]);
    csv += ",";
    if (tr.dist_to_fix) csv += fmt((*tr.dist_to_fix)[k]);
    csv += "," + fmt(p.objective(built.extract(tr.iterates[k]))) + "\n";
  }
  write_file(prm.out + ".csv", csv);

  const Vector x = built.extract(tr.limit);
  nlohmann::json sol = {{"problem", p.name},
                        {"kind", problem_kind_name(p.kind)},
                        {"algorithm", algorithm_name(alg)},
                        {"params", echo_params(prm, r)},
                        {"alpha_declared", built.op.alpha()},
                        {"averaged", built.op.averaged()},
                        {"note", built.note},
                        {"stop_reason", stop_reason_name(tr.stop_reason)},
                        {"iterations", tr.steps()},
                        {"final_residual", tr.residuals.empty() ? 0.0 : tr.residuals.back()},
                        {"distance_source", tr.dist_to_fix ? tr.distance_source : "none"},
                        {"x", std::vector<double>(x.data(), x.data() + x.size())},
                        {"w", std::vector<double>(tr.limit.data(), tr.limit.data() + tr.limit.size())},
                        {"objective", p.objective(x)},
                        {"optimality_residual", p.optimality_residual(x)}};
  write_file(prm.out + ".solution.json", sol.dump(2) + "\n");

  out << "algorithm " << algorithm_name(alg) << " (alpha " << fmt(built.op.alpha()) << ")";
  if (!built.op.averaged()) out << ": no averaged-operator guarantee";
  out << "\nstop " << stop_reason_name(tr.stop_reason) << " after " << tr.steps() << " steps\n"
      << "objective " << fmt(p.objective(x)) << "\n"
      << "optimality residual " << fmt(p.optimality_residual(x)) << "\n";
  return tr.stop_reason == StopReason::residual_tol ? kOk : kMaxIters;
}

inline int cmd_analyze(const Params& prm, std::ostream& out)
{
  const auto p = load(prm.problem);
  require(p.kind == ProblemKind::lp || p.kind == ProblemKind::qp, Errc::invalid_argument,
          "analyze: only lp and qp problems have a piecewise analysis");
  const auto alg = parse_algorithm(prm.algorithm);
  require(alg == Algorithm::douglas_rachford || alg == Algorithm::admm, Errc::invalid_argument,
          "analyze: algorithm must be dr or admm");
  const auto r = resolve(p, prm);
  const double alpha = alg == Algorithm::admm ? 0.5 : r.alpha;
  const double gamma = alg == Algorithm::admm ? 1.0 / r.rho : r.gamma;
  const auto a = analyze_dr(p.feasible_set(), p.Q, p.c, gamma, alpha);
  const auto cert = rates_from_K(alpha, a.K);

  std::vector<char> meets(a.pieces.size(), 0);
  for (const auto& fp : a.fixset.pieces) meets[static_cast<std::size_t>(fp.source_piece)] = 1;

  std::ostringstream txt;
  nlohmann::json js;
  txt << "problem " << (p.name.empty() ? prm.problem : p.name) << " (" << problem_kind_name(p.kind) << ", n = " << p.n()
      << ", m = " << p.m() << ")\n"
      << "operator " << algorithm_name(alg) << ", alpha " << fmt(alpha) << ", gamma " << fmt(gamma) << "\n"
      << "pieces " << a.pieces.size() << "\n"
      << "  J  rank  sigma_min+  hoffman_bound  meets_fixed_set\n";
  nlohmann::json pieces = nlohmann::json::array();
  for (std::size_t k = 0; k < a.pieces.size(); ++k) {
    const auto& pc = a.pieces[k];
    txt << "  " << pc.label() << "  " << pc.J.size() << "  " << fmt(pc.sigma_min_plus) << "  " << fmt(pc.hoffman_bound)
        << "  " << (meets[k] ? "yes" : "no") << "\n";
    pieces.push_back({{"J", pc.J},
                      {"rank", pc.J.size()},
                      {"sigma_min_plus", pc.sigma_min_plus},
                      {"hoffman_bound", pc.hoffman_bound},
                      {"meets_fixed_set", static_cast<bool>(meets[k])}});
  }
  txt << "K_F " << fmt(a.K) << " (max hoffman bound over pieces meeting the fixed-point set)\n"
      << "certified (from K_F): rho " << fmt(cert.rho_dist) << ", relaxed " << fmt(cert.rho_dist_relaxed)
      << ", rho_hat " << fmt(cert.rho_seq) << ", relaxed " << fmt(cert.rho_seq_relaxed) << "\n";
  js["certificate"] = to_json(cert);
  if (p.kind == ProblemKind::lp) {
    const auto lc = lp_certificate(alpha);
    txt << "LP closed form: K_F = 1/(2 alpha) = " << fmt(lc.K) << ", relaxed rho <= " << fmt(lc.rho_dist_relaxed) << "\n";
    js["lp_certificate"] = to_json(lc);
  } else {
    const double lmax = lambda_max(*p.Q);
    const double kappa = condition_number_plus(*p.Q);
    txt << "lambda_max " << fmt(lmax) << ", kappa+ " << fmt(kappa) << ", gamma0 " << fmt(gamma * lmax) << "\n";
    js["lambda_max"] = lmax;
    js["kappa_plus"] = kappa;
    try {
      const auto qc = qp_certificate(alpha, gamma, lmax, kappa);
      txt << "QP closed form: K <= " << fmt(qc.cert.K) << ", rho <= " << fmt(qc.rho_bound) << "\n";
      if (qc.compact_K)
        txt << "gamma0 = 1/2 compact form: K <= 3 kappa+/alpha = " << fmt(*qc.compact_K) << ", rho <= " << fmt(*qc.compact_rho)
            << "\n";
      js["qp_closed_form"] = {{"K", qc.cert.K}, {"rho", qc.rho_bound}, {"gamma0", qc.gamma0}};
      if (qc.compact_K) js["qp_compact"] = {{"K", *qc.compact_K}, {"rho", *qc.compact_rho}};
    } catch (const Error& e) {
      txt << "QP closed form unavailable: " << e.what() << "\n";
    }
    double l5 = 0.0;
    for (const auto& pc : a.pieces) l5 = std::max(l5, null_space_inclusion_residual(pc, *p.Q));
    txt << "null(M_J) inclusion residual " << fmt(l5) << "\n";
    js["null_space_inclusion_residual"] = l5;
  }
  txt << "radius estimate " << fmt(a.radius.radius) << " (default " << fmt(a.radius.default_radius) << ")\n"
      << "note: " << cert.valid_radius_note << "\n";

  js["problem"] = p.name;
  js["kind"] = problem_kind_name(p.kind);
  js["algorithm"] = algorithm_name(alg);
  js["params"] = echo_params(prm, r);
  js["pieces"] = pieces;
  js["K_F"] = a.K;
  js["fixed_set_pieces"] = a.fixset.pieces.size();
  js["radius"] = {{"value", a.radius.radius}, {"default", a.radius.default_radius}, {"estimate", true}};
  out << txt.str();
  if (!prm.out.empty()) {
    write_file(prm.out + ".txt", txt.str());
    write_file(prm.out + ".json", js.dump(2) + "\n");
  }
  return kOk;
}

inline std::string render(const std::vector<VerificationReport>& reports)
{
  std::ostringstream s;
  for (const auto& r : reports) {
    s << (r.pass() ? "[PASS] " : "[FAIL] ") << r.label << "\n";
    for (const auto& c : r.checks)
      s << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << ": " << fmt(c.value) << " (limit " << fmt(c.threshold)
        << "; " << c.source << ")\n";
  }
  return s.str();
}

inline int cmd_verify(const Params& prm, std::ostream& out)
{
  std::vector<VerificationReport> reports;
  VerifyOptions o;
  o.alpha = prm.alpha.value_or(0.5);
  o.gamma = prm.gamma;
  o.seed = prm.seed;
  o.samples = prm.samples;
  o.max_iters = prm.max_iters;
  o.radius_sweep = prm.radius_sweep;
  if (prm.builtin == "example3") {
    const auto grid = prm.lambda ? std::vector<double>{*prm.lambda} : example3_lambdas();
    for (double l : grid) reports.push_back(verify_example3(l, prm.seed, prm.samples));
  } else if (prm.builtin == "example4") {
    const auto grid = prm.theta ? std::vector<double>{*prm.theta} : example4_thetas();
    for (double t : grid) reports.push_back(verify_example4(t, prm.seed, prm.samples));
  } else if (prm.builtin == "lp-batch" || prm.builtin == "qp-batch") {
    for (std::size_t s = 1; s <= prm.seeds; ++s) {
      const auto p = prm.builtin == "lp-batch" ? batch_lp(s) : batch_qp(s);
      reports.push_back(verify_dr_instance(p, o));
    }
  } else if (!prm.builtin.empty()) {
    fail(Errc::invalid_argument, "builtin: unknown '" + prm.builtin + "' (example3, example4, lp-batch, qp-batch)");
  } else {
    require(!prm.problem.empty(), Errc::invalid_argument, "verify: give a problem file or --builtin");
    reports.push_back(verify_dr_instance(load(prm.problem), o));
  }

  const std::string txt = render(reports);
  nlohmann::json js = nlohmann::json::array();
  for (const auto& r : reports) js.push_back(to_json(r));
  out << txt;
  if (!prm.out.empty()) {
    write_file(prm.out + ".txt", txt);
    write_file(prm.out + ".json", js.dump(2) + "\n");
  }
  std::vector<std::string> failed;
  for (const auto& r : reports)
    if (!r.pass()) failed.push_back(r.label);
  if (failed.empty()) return kOk;
  out << "failed:";
  for (const auto& f : failed) out << " [" << f << "]";
  out << "\n";
  return kCheckFailed;
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* cmd, Params& prm)
{
  cmd->add_option("--alpha", prm.alpha, "averaging parameter of DR");
  cmd->add_option("--gamma", prm.gamma, "prox scale");
  cmd->add_option("--rho", prm.rho, "ADMM penalty");
  cmd->add_option("--lambda", prm.lambda, "gradient step");
  cmd->add_option("--tol", prm.tol, "residual tolerance")->capture_default_str();
  cmd->add_option("--max-iters", prm.max_iters, "iteration cap")->capture_default_str();
  cmd->add_option("--seed", prm.seed, "seed for starts and sampling")->capture_default_str();
  cmd->add_flag("--radius-sweep", prm.radius_sweep, "also sample over R in {1e-1, 1e-2, 1e-3, 1e-4}");
  cmd->add_option("--out", prm.out, "output path prefix");
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  CLI::App app{"Fixed-point iterations and error-bound certificates for LP and QP"};
  app.require_subcommand(1);
  Params prm;

  auto* solve = app.add_subcommand("solve", "run a fixed-point iteration; writes <out>.csv and <out>.solution.json");
  solve->add_option("problem", prm.problem, "problem file")->required();
  solve->add_option("--algorithm", prm.algorithm, "gd, prox, gp, pg, dr, pr or admm")->required();
  add_common(solve, prm);
  solve->get_option("--out")->required();

  auto* analyze = app.add_subcommand("analyze", "piece table, K_F and certified rates");
  analyze->add_option("problem", prm.problem, "problem file")->required();
  analyze->add_option("--algorithm", prm.algorithm, "dr or admm")->capture_default_str();
  add_common(analyze, prm);

  auto* verify = app.add_subcommand("verify", "measured against certified constants; exit 5 on any failed check");
  verify->add_option("problem", prm.problem, "problem file");
  verify->add_option("--builtin", prm.builtin, "example3, example4, lp-batch or qp-batch");
  verify->add_option("--theta", prm.theta, "rotation angle for example4");
  verify->add_option("--seeds", prm.seeds, "instances in a batch")->capture_default_str();
  verify->add_option("--samples", prm.samples, "samples for the sampled constants")->capture_default_str();
  add_common(verify, prm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(prm, out);
    if (analyze->parsed()) return cmd_analyze(prm, out);
    return cmd_verify(prm, out);
  } catch (const Error& e) {
    err << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return e.code() == Errc::too_large ? kTooLarge : kValidation;
  }
}

} // namespace plqfpi::cli

#endif // PLQFPI_CLI_HPP
