// Measured rate and error-bound constants against the four-sided sandwich.
#include <cstdio>

#include "plqfpi/plqfpi.hpp"

using namespace plqfpi;

int main()
{
  std::printf("%-10s %6s %10s %10s %12s %12s\n", "operator", "alpha", "rho~", "K~", "1-1/K~", "rho upper");
  for (const auto& F : example_operators()) {
    const auto fix = FixedPointSetDescription::single_point(Vector::Zero(F.dimension()));
    const auto er = estimate_rates(F, fix, 1.0, 500, 1);
    const auto sw = sandwich(F.alpha(), er.rho_tilde, er.k_tilde);
    std::printf("%-10s %6.3f %10.6f %10.6f %12.6f %12.6f\n", algorithm_name(F.provenance().algorithm).c_str(), F.alpha(),
                er.rho_tilde, er.k_tilde, sw.rho_lower, sw.rho_upper);
  }
}
