#include "ckqr/inference.hpp"

#include "ckqr/newton.hpp"
#include "ckqr/special.hpp"

#include <cmath>

namespace ckqr {

CovarianceEstimate
sandwich(const Matrix& d_hat, const Matrix& v_hat, Eigen::Index n)
{
  if (!passes_eigen_floor(d_hat)) {
    fail(ErrorKind::singular_hessian, "D-hat fails the eigenvalue floor");
  }
  CovarianceEstimate out;
  out.D_hat = d_hat;
  out.V_hat = v_hat;
  const Matrix d_inv = d_hat.ldlt().solve(Matrix::Identity(d_hat.rows(), d_hat.cols()));
  const Matrix s = d_inv * v_hat * d_inv;
  out.Sigma_hat = 0.5 * (s + s.transpose());
  out.se = (out.Sigma_hat.diagonal().array().max(0.0) / static_cast<double>(n)).sqrt();
  return out;
}

namespace {

Matrix
hessian_at(const Dataset& data, const SmoothSpec& spec, const FitResult& fit)
{
  if (fit.hessian && std::abs(fit.h - spec.h) <= 1e-15 * spec.h) {
    return *fit.hessian;
  }
  return smoothed_hessian(data, spec, fit.beta);
}

} // namespace

CovarianceEstimate
covariance(const Dataset& data, const SmoothSpec& spec, const FitResult& fit)
{
  spec.validate();
  const Vector e = data.residuals(fit.beta);
  Vector c(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double g = spec.kernel.K(-e(i) / spec.h) - spec.tau;
    c(i) = g * g;
  }
  Matrix v = data.x().transpose() * c.asDiagonal() * data.x();
  v /= static_cast<double>(data.n());
  return sandwich(hessian_at(data, spec, fit), 0.5 * (v + v.transpose()), data.n());
}

CovarianceEstimate
naive_covariance(const Dataset& data, const SmoothSpec& spec, const FitResult& fit)
{
  spec.validate();
  Matrix v = data.x().transpose() * data.x();
  v *= spec.tau * (1.0 - spec.tau) / static_cast<double>(data.n());
  return sandwich(hessian_at(data, spec, fit), v, data.n());
}

ConfidenceInterval
confidence_interval(const FitResult& fit, const CovarianceEstimate& cov, Eigen::Index k, double level)
{
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorKind::invalid_argument, "confidence level must lie in (0, 1)");
  }
  if (k < 0 || k >= fit.beta.size()) {
    fail(ErrorKind::invalid_argument, "coefficient index out of range");
  }
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double half = z * cov.se(k);
  return { k, level, fit.beta(k) - half, fit.beta(k) + half };
}

Matrix
variance_expansion_oracle(const DgpSpec& design, double tau, const Kernel& kernel, double h)
{
  if (!(h >= 0.0)) {
    fail(ErrorKind::invalid_argument, "bandwidth must be nonnegative");
  }
  const auto pm = population_moments(design, tau);
  const Matrix d_inv = pm.d.inverse();
  return tau * (1.0 - tau) * d_inv * pm.exx * d_inv - kernel.smoothing_constant() * h * d_inv;
}

} // namespace ckqr
