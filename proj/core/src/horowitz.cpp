#include "ckqr/horowitz.hpp"

namespace ckqr {

double
horowitz_objective(const Dataset& data, const HorowitzSpec& spec, const Vector& b)
{
  spec.validate();
  HorowitzLoss loss(spec.kernel, spec.tau, spec.h);
  return ResidualObjective<HorowitzLoss>{ data, loss }.value(b);
}

Vector
horowitz_gradient(const Dataset& data, const HorowitzSpec& spec, const Vector& b)
{
  spec.validate();
  HorowitzLoss loss(spec.kernel, spec.tau, spec.h);
  return ResidualObjective<HorowitzLoss>{ data, loss }.gradient(b);
}

Matrix
horowitz_hessian(const Dataset& data, const HorowitzSpec& spec, const Vector& b)
{
  spec.validate();
  HorowitzLoss loss(spec.kernel, spec.tau, spec.h);
  return ResidualObjective<HorowitzLoss>{ data, loss }.hessian(b);
}

FitResult
fit_horowitz(const Dataset& data,
             const HorowitzSpec& spec,
             const std::optional<Vector>& init,
             const FitOptions& options)
{
  spec.validate();
  Vector start;
  if (init) {
    if (init->size() != data.d()) {
      fail(ErrorKind::invalid_argument, "initial vector has wrong dimension");
    }
    start = *init;
  } else {
    FitOptions soft = options;
    soft.throw_on_failure = false;
    start = fit_smoothed(data, spec, std::nullopt, soft).beta;
  }
  HorowitzLoss loss(spec.kernel, spec.tau, spec.h);
  ResidualObjective<HorowitzLoss> obj{ data, loss };
  NewtonOptions nopt;
  nopt.max_iter = options.max_iter;
  auto out = newton_minimize(obj, std::move(start), nopt);
  if (!out.converged && options.throw_on_failure) {
    fail(ErrorKind::no_convergence,
         "Horowitz smoothed QR did not converge (tau=" + std::to_string(spec.tau) +
           ", h=" + std::to_string(spec.h) + ")");
  }
  FitResult r;
  r.beta = std::move(out.beta);
  r.tau = spec.tau;
  r.h = spec.h;
  r.objective = out.objective;
  r.grad_norm = out.grad_norm;
  r.iterations = out.iterations;
  r.converged = out.converged;
  r.hessian = std::move(out.hessian);
  return r;
}

CovarianceEstimate
horowitz_covariance(const Dataset& data, const HorowitzSpec& spec, const FitResult& fit)
{
  spec.validate();
  HorowitzLoss loss(spec.kernel, spec.tau, spec.h);
  const Vector e = data.residuals(fit.beta);
  Vector c1(e.size());
  Vector c2(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const LossDerivs r = loss.derivs(e(i));
    c1(i) = r.d1 * r.d1;
    c2(i) = r.d2;
  }
  const double n = static_cast<double>(data.n());
  Matrix v = data.x().transpose() * c1.asDiagonal() * data.x() / n;
  Matrix d = data.x().transpose() * c2.asDiagonal() * data.x() / n;
  return sandwich(0.5 * (d + d.transpose()), 0.5 * (v + v.transpose()), data.n());
}

} // namespace ckqr
