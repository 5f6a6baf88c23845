// Certify and observe the linear rate of Douglas-Rachford on a random LP.
#include <cstdio>

#include "plqfpi/plqfpi.hpp"

using namespace plqfpi;

int main()
{
  const auto [p, truth] = generate_lp(3, 6, 7);
  const double gamma = 1.0, alpha = 0.5;
  const auto a = analyze_dr(p.feasible_set(), p.Q, p.c, gamma, alpha);
  const auto cert = rates_from_K(alpha, a.K);
  std::printf("pieces %zu, fixed-set pieces %zu, K_F = %.6f\n", a.pieces.size(), a.fixset.pieces.size(), a.K);
  std::printf("certified rho %.6f (relaxed %.6f) within radius %.3g\n", cert.rho_dist, cert.rho_dist_relaxed,
              a.radius.radius);

  const auto dr = make_dr(p.constraint_indicator(), p.smooth_part(), gamma, alpha);
  auto tr = iterate(dr.op, Vector::Constant(p.n(), 5.0), 1e-12, 10000);
  attach_distances(tr, a.fixset);
  for (std::size_t k = 0; k < tr.iterates.size(); ++k)
    std::printf("k %3zu  dist %.3e\n", k, (*tr.dist_to_fix)[k]);
  const Vector x = dr.extract(tr.limit);
  std::printf("|x - x*| = %.3e\n", (x - *truth.known_optimum).norm());
}
