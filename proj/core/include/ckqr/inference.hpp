#pragma once

#include "ckqr/design.hpp"
#include "ckqr/fit_result.hpp"
#include "ckqr/qr_smooth.hpp"

namespace ckqr {

struct CovarianceEstimate
{
  Matrix D_hat;
  Matrix V_hat;
  Matrix Sigma_hat; // D^{-1} V D^{-1}
  Vector se;        // sqrt(diag Sigma / n)
};

struct ConfidenceInterval
{
  Eigen::Index k = 0;
  double level = 0.95;
  double lo = 0.0;
  double hi = 0.0;
};

//! Assembles D^{-1} V D^{-1} and standard errors for a sample of size n.
//! Throws singular_hessian when D fails the eigenvalue floor.
CovarianceEstimate sandwich(const Matrix& d_hat, const Matrix& v_hat, Eigen::Index n);

//! D = smoothed Hessian at the fit, V = (1/n) sum X X' [K(-e/h) - tau]^2.
CovarianceEstimate covariance(const Dataset& data, const SmoothSpec& spec, const FitResult& fit);

//! V replaced by tau(1-tau) (1/n) sum X X'.
CovarianceEstimate naive_covariance(const Dataset& data,
                                    const SmoothSpec& spec,
                                    const FitResult& fit);

//! beta_k +/- z_{(1-level)/2} se_k.
ConfidenceInterval confidence_interval(const FitResult& fit,
                                       const CovarianceEstimate& cov,
                                       Eigen::Index k,
                                       double level);

//! Sigma(tau) - c_k h D^{-1}(tau), population quantities by quadrature.
Matrix variance_expansion_oracle(const DgpSpec& design, double tau, const Kernel& kernel, double h);

} // namespace ckqr
