#include "ckqr/qr_smooth.hpp"

#include "ckqr/bandwidth.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace ckqr {

void
SmoothSpec::validate() const
{
  if (!(h > 0.0) || !std::isfinite(h)) {
    fail(ErrorKind::invalid_argument, "bandwidth h must be positive and finite");
  }
  if (!(tau >= kTauMin && tau <= kTauMax)) {
    fail(ErrorKind::invalid_argument, "tau must lie in [0.01, 0.99]");
  }
}

double
smoothed_objective(const Dataset& data, const SmoothSpec& spec, const Vector& b)
{
  spec.validate();
  ConvolvedCheckLoss loss(spec.kernel, spec.tau, spec.h);
  return ResidualObjective<ConvolvedCheckLoss>{ data, loss }.value(b);
}

Vector
smoothed_gradient(const Dataset& data, const SmoothSpec& spec, const Vector& b)
{
  spec.validate();
  ConvolvedCheckLoss loss(spec.kernel, spec.tau, spec.h);
  return ResidualObjective<ConvolvedCheckLoss>{ data, loss }.gradient(b);
}

Matrix
smoothed_hessian(const Dataset& data, const SmoothSpec& spec, const Vector& b)
{
  spec.validate();
  ConvolvedCheckLoss loss(spec.kernel, spec.tau, spec.h);
  return ResidualObjective<ConvolvedCheckLoss>{ data, loss }.hessian(b);
}

namespace {

FitResult
fit_smoothed_impl(const Dataset& data,
                  const SmoothSpec& spec,
                  const Vector* weights,
                  const std::optional<Vector>& init,
                  const FitOptions& options)
{
  spec.validate();
  if (init && init->size() != data.d()) {
    fail(ErrorKind::invalid_argument, "initial vector has wrong dimension");
  }
  ConvolvedCheckLoss loss(spec.kernel, spec.tau, spec.h);
  ResidualObjective<ConvolvedCheckLoss> obj{ data, loss, weights };

  Vector start = init ? *init : ols_quantile_start(data, spec.tau);
  NewtonOptions nopt;
  nopt.max_iter = options.max_iter;
  auto out = newton_minimize(obj, std::move(start), nopt);

  if (!out.converged && options.throw_on_failure) {
    fail(ErrorKind::no_convergence,
         "smoothed QR did not converge (tau=" + std::to_string(spec.tau) +
           ", h=" + std::to_string(spec.h) + ", |grad|=" +
           std::to_string(out.grad_norm) + ")");
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

} // namespace

FitResult
fit_smoothed(const Dataset& data,
             const SmoothSpec& spec,
             const std::optional<Vector>& init,
             const FitOptions& options)
{
  return fit_smoothed_impl(data, spec, nullptr, init, options);
}

FitResult
fit_smoothed_weighted(const Dataset& data,
                      const SmoothSpec& spec,
                      const Vector& weights,
                      const std::optional<Vector>& init,
                      const FitOptions& options)
{
  if (weights.size() != data.n()) {
    fail(ErrorKind::invalid_argument, "weights length differs from n");
  }
  return fit_smoothed_impl(data, spec, &weights, init, options);
}

Vector
quantile_path_derivative(const Dataset& data, const SmoothSpec& spec, const FitResult& fit)
{
  const Matrix h = fit.hessian ? *fit.hessian : smoothed_hessian(data, spec, fit.beta);
  if (!passes_eigen_floor(h)) {
    fail(ErrorKind::singular_hessian,
         "Hessian at the fit fails the eigenvalue floor (tau=" + std::to_string(spec.tau) + ")");
  }
  return h.ldlt().solve(data.x_mean());
}

size_t
QuantileProcess::failures() const
{
  size_t count = 0;
  for (const auto& e : errors) {
    count += e.empty() ? 0 : 1;
  }
  return count;
}

QuantileProcess
fit_process(const Dataset& data,
            const std::vector<double>& taus,
            const Kernel& kernel,
            const BandwidthRule& rule)
{
  if (taus.empty()) {
    fail(ErrorKind::invalid_argument, "empty tau grid");
  }
  for (size_t j = 0; j < taus.size(); ++j) {
    if (!(taus[j] >= kTauMin - 1e-12 && taus[j] <= kTauMax + 1e-12)) {
      fail(ErrorKind::invalid_argument, "tau grid must lie in [0.01, 0.99]");
    }
    if (j > 0 && !(taus[j] > taus[j - 1])) {
      fail(ErrorKind::invalid_argument, "tau grid must be strictly increasing");
    }
  }

  QuantileProcess proc;
  const auto d = data.d();
  std::optional<Vector> warm;
  for (double tau_raw : taus) {
    const double tau = std::clamp(tau_raw, kTauMin, kTauMax);
    proc.taus.push_back(tau_raw);
    Vector beta = Vector::Constant(d, std::nan(""));
    Vector dbeta = Vector::Constant(d, std::nan(""));
    double h = std::nan("");
    bool ok = false;
    std::string err;
    try {
      h = resolve_bandwidth(rule, data, tau, kernel);
      SmoothSpec spec{ kernel, h, tau };
      auto fit = fit_smoothed(data, spec, warm);
      beta = fit.beta;
      warm = fit.beta;
      dbeta = quantile_path_derivative(data, spec, fit);
      ok = true;
    } catch (const Error& e) {
      err = std::string(to_string(e.kind())) + ": " + e.what();
    }
    proc.betas.push_back(beta);
    proc.dbetas.push_back(dbeta);
    proc.h_used.push_back(h);
    proc.converged.push_back(ok);
    proc.errors.push_back(err);
  }
  if (5 * proc.failures() > taus.size()) {
    fail(ErrorKind::too_many_failures,
         std::to_string(proc.failures()) + " of " + std::to_string(taus.size()) +
           " grid points failed");
  }
  return proc;
}

void
write_process_csv(std::ostream& out, const QuantileProcess& process)
{
  const auto d = process.betas.empty() ? 0 : process.betas.front().size();
  out << "tau,h";
  for (Eigen::Index j = 0; j < d; ++j) {
    out << ",beta_" << j;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    out << ",dbeta_" << j;
  }
  out << ",converged\n";
  out << std::setprecision(10);
  for (size_t i = 0; i < process.taus.size(); ++i) {
    out << process.taus[i] << ',' << process.h_used[i];
    for (Eigen::Index j = 0; j < d; ++j) {
      out << ',' << process.betas[i](j);
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      out << ',' << process.dbetas[i](j);
    }
    out << ',' << (process.converged[i] ? 1 : 0) << '\n';
  }
}

} // namespace ckqr
