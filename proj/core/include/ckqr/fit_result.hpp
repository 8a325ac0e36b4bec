#pragma once

#include "ckqr/common.hpp"

#include <optional>

namespace ckqr {

//! Outcome of any of the QR fits. h == 0 marks an exact (unsmoothed) fit.
struct FitResult
{
  Vector beta;
  double tau = 0.5;
  double h = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<Matrix> hessian;
};

struct FitOptions
{
  int max_iter = 200;
  //! When false a non-converged fit is returned with converged == false
  //! instead of raising no_convergence.
  bool throw_on_failure = true;
};

} // namespace ckqr
