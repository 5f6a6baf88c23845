#ifndef PLQFPI_ERROR_HPP
#define PLQFPI_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace plqfpi {

enum class Errc {
  invalid_argument,
  shape_mismatch,
  not_psd,
  zero_matrix,
  infeasible,
  no_certificate,
  step_too_large,
  not_averaged,
  non_finite,
  empty_fixed_set,
  no_fixed_points,
  too_short,
  too_large,
  k_too_small,
  rho_out_of_range,
  gamma0_out_of_range,
  singular_subproblem,
  parse_error,
};

inline std::string_view errc_name(Errc e)
{
  switch (e) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::not_psd: return "NotPSD";
    case Errc::zero_matrix: return "ZeroMatrix";
    case Errc::infeasible: return "Infeasible";
    case Errc::no_certificate: return "NoCertificate";
    case Errc::step_too_large: return "StepTooLarge";
    case Errc::not_averaged: return "NotAveraged";
    case Errc::non_finite: return "NonFinite";
    case Errc::empty_fixed_set: return "EmptyFixedSet";
    case Errc::no_fixed_points: return "NoFixedPoints";
    case Errc::too_short: return "TooShort";
    case Errc::too_large: return "TooLarge";
    case Errc::k_too_small: return "KTooSmall";
    case Errc::rho_out_of_range: return "RhoOutOfRange";
    case Errc::gamma0_out_of_range: return "Gamma0OutOfRange";
    case Errc::singular_subproblem: return "SingularSubproblem";
    case Errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the Errc kinds above.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
  {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what)
{
  if (!cond) fail(code, what);
}

} // namespace plqfpi

#endif // PLQFPI_ERROR_HPP
