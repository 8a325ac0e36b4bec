#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ckqr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind
{
  invalid_argument,
  rank_deficient,
  no_convergence,
  singular_hessian,
  degenerate_residuals,
  zero_bias,
  unsupported_design,
  all_weights_clamped,
  too_many_failures,
  io
};

std::string_view to_string(ErrorKind kind);

//! Every failure raised by the library carries one of the kinds above so
//! callers (the CLI, the Monte Carlo engine) can count or map them.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what)
    , kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void
fail(ErrorKind kind, const std::string& what)
{
  throw Error(kind, what);
}

// Working quantile range for smoothed fits.
inline constexpr double kTauMin = 0.01;
inline constexpr double kTauMax = 0.99;

} // namespace ckqr
