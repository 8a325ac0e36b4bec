#pragma once

#include "ckqr/dataset.hpp"
#include "ckqr/fit_result.hpp"
#include "ckqr/kernels.hpp"
#include "ckqr/newton.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ckqr {

struct BandwidthRule;

struct SmoothSpec
{
  Kernel kernel;
  double h;
  double tau;

  //! Throws invalid_argument unless h > 0 is finite and tau is in [0.01, 0.99].
  void validate() const;
};

//! Convolution of the check function with the scaled kernel,
//! l(e) = int rho_tau(e + h z) k(z) dz = tau e - e K(-e/h) - h J(-e/h),
//! J(t) = int_{-inf}^t z k(z) dz. Derivatives: l' = tau - K(-e/h),
//! l'' = k(e/h)/h.
class ConvolvedCheckLoss
{
public:
  ConvolvedCheckLoss(const Kernel& kernel, double tau, double h)
    : kernel_(&kernel)
    , tau_(tau)
    , h_(h)
  {}

  double value(double e) const
  {
    const double t = -e / h_;
    return tau_ * e - e * kernel_->K(t) - h_ * kernel_->partial_first_moment(t);
  }

  LossDerivs derivs(double e) const
  {
    const auto v = kernel_->values(-e / h_);
    return { tau_ * e - e * v.K - h_ * v.J, tau_ - v.K, v.k / h_ };
  }

private:
  const Kernel* kernel_;
  double tau_;
  double h_;
};

double smoothed_objective(const Dataset& data, const SmoothSpec& spec, const Vector& b);
Vector smoothed_gradient(const Dataset& data, const SmoothSpec& spec, const Vector& b);
Matrix smoothed_hessian(const Dataset& data, const SmoothSpec& spec, const Vector& b);

//! Damped Newton minimization of the smoothed objective. Starts from `init`
//! or, when absent, from OLS shifted by the tau-quantile of its residuals.
FitResult fit_smoothed(const Dataset& data,
                       const SmoothSpec& spec,
                       const std::optional<Vector>& init = std::nullopt,
                       const FitOptions& options = {});

//! Same objective with per-observation weights multiplying each loss term.
FitResult fit_smoothed_weighted(const Dataset& data,
                                const SmoothSpec& spec,
                                const Vector& weights,
                                const std::optional<Vector>& init = std::nullopt,
                                const FitOptions& options = {});

//! d beta_h(tau) / d tau = H^{-1} x-bar, H the smoothed Hessian at the fit.
//! Throws singular_hessian when min eig(H) <= 1e-10 trace(H)/d.
Vector quantile_path_derivative(const Dataset& data,
                                const SmoothSpec& spec,
                                const FitResult& fit);

struct QuantileProcess
{
  std::vector<double> taus;
  std::vector<Vector> betas;
  std::vector<Vector> dbetas;
  std::vector<double> h_used;
  std::vector<bool> converged;
  //! Empty when the grid point succeeded.
  std::vector<std::string> errors;

  size_t failures() const;
};

//! Fits every tau of an increasing grid in [0.01, 0.99], warm-starting each
//! fit from the previous solution. Grid points that fail are recorded; the
//! call throws too_many_failures when more than 20% of them fail.
QuantileProcess fit_process(const Dataset& data,
                            const std::vector<double>& taus,
                            const Kernel& kernel,
                            const BandwidthRule& rule);

//! tau, h, beta_0..beta_{d-1}, dbeta_0..dbeta_{d-1}, converged
void write_process_csv(std::ostream& out, const QuantileProcess& process);

} // namespace ckqr
