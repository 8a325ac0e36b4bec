#pragma once

#include "ckqr/inference.hpp"
#include "ckqr/qr_smooth.hpp"

namespace ckqr {

//! Same fields and validation as the convolution-smoothed problem.
using HorowitzSpec = SmoothSpec;

//! L(e) = e [tau - K(-e/h)], the check function with its indicator smoothed.
//! L' = tau - K(-e/h) + (e/h) k(e/h), L'' = kappa(e/h)/h, kappa = 2k + t k'.
class HorowitzLoss
{
public:
  HorowitzLoss(const Kernel& kernel, double tau, double h)
    : kernel_(&kernel)
    , tau_(tau)
    , h_(h)
  {}

  double value(double e) const { return e * (tau_ - kernel_->K(-e / h_)); }

  LossDerivs derivs(double e) const
  {
    const double t = e / h_;
    const auto v = kernel_->values(-t);
    return { e * (tau_ - v.K), tau_ - v.K + t * v.k, kernel_->kappa(t) / h_ };
  }

private:
  const Kernel* kernel_;
  double tau_;
  double h_;
};

double horowitz_objective(const Dataset& data, const HorowitzSpec& spec, const Vector& b);
Vector horowitz_gradient(const Dataset& data, const HorowitzSpec& spec, const Vector& b);
Matrix horowitz_hessian(const Dataset& data, const HorowitzSpec& spec, const Vector& b);

//! Damped Newton on the Horowitz objective. Without `init` it starts from the
//! convolution-smoothed fit at the same (kernel, h, tau).
FitResult fit_horowitz(const Dataset& data,
                       const HorowitzSpec& spec,
                       const std::optional<Vector>& init = std::nullopt,
                       const FitOptions& options = {});

//! kappa-sandwich: D = Horowitz Hessian, V = (1/n) sum X X' L'(e)^2. An
//! approximation standing in for Horowitz's own variance formula.
CovarianceEstimate horowitz_covariance(const Dataset& data,
                                       const HorowitzSpec& spec,
                                       const FitResult& fit);

} // namespace ckqr
