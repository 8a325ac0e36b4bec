#include "ckqr/density_eff.hpp"

#include "ckqr/newton.hpp"
#include "ckqr/qr_exact.hpp"
#include "ckqr/rng.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace ckqr {

double
qdf_estimate(const Dataset& data, const SmoothSpec& spec, const FitResult& fit, const Vector& x)
{
  if (x.size() != data.d()) {
    fail(ErrorKind::invalid_argument, "covariate has wrong dimension");
  }
  return x.dot(quantile_path_derivative(data, spec, fit));
}

PdfCurve
pdf_curve_from_process(const QuantileProcess& process, const Vector& x)
{
  PdfCurve curve;
  curve.x = x;
  for (size_t j = 0; j < process.taus.size(); ++j) {
    curve.taus.push_back(process.taus[j]);
    if (!process.converged[j]) {
      curve.q_hat.push_back(std::nan(""));
      curve.f_hat.push_back(std::nan(""));
      curve.flagged.push_back(true);
      continue;
    }
    if (process.betas[j].size() != x.size()) {
      fail(ErrorKind::invalid_argument, "covariate has wrong dimension");
    }
    const double q = x.dot(process.dbetas[j]);
    curve.q_hat.push_back(x.dot(process.betas[j]));
    curve.f_hat.push_back(1.0 / q);
    curve.flagged.push_back(!(q > 0.0));
  }
  return curve;
}

PdfCurve
pdf_curve(const Dataset& data,
          const Kernel& kernel,
          const BandwidthRule& rule,
          const std::vector<double>& taus,
          const Vector& x)
{
  if (x.size() != data.d()) {
    fail(ErrorKind::invalid_argument, "covariate has wrong dimension");
  }
  return pdf_curve_from_process(fit_process(data, taus, kernel, rule), x);
}

double
pdf_curve_mass(const PdfCurve& curve)
{
  double mass = 0.0;
  for (size_t j = 0; j + 1 < curve.taus.size(); ++j) {
    if (curve.flagged[j] || curve.flagged[j + 1]) {
      continue;
    }
    mass += curve.f_hat[j] * (curve.q_hat[j + 1] - curve.q_hat[j]);
  }
  return mass;
}

void
write_pdf_curve_csv(std::ostream& out, const PdfCurve& curve)
{
  out << "tau,q_hat,f_hat,flagged\n" << std::setprecision(10);
  for (size_t j = 0; j < curve.taus.size(); ++j) {
    out << curve.taus[j] << ',' << curve.q_hat[j] << ',' << curve.f_hat[j] << ','
        << (curve.flagged[j] ? 1 : 0) << '\n';
  }
}

Eigen::Index
default_split(Eigen::Index n, Eigen::Index d)
{
  auto m = static_cast<Eigen::Index>(std::floor(std::pow(static_cast<double>(n), 0.4) + 1e-9));
  return std::max(m, d + 1);
}

EfficientFit
efficient_fit(const Dataset& data,
              double tau,
              const Kernel& kernel,
              const BandwidthRule& rule,
              std::optional<Eigen::Index> m_opt,
              std::uint64_t seed)
{
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  const Eigen::Index m = m_opt ? *m_opt : default_split(n, d);
  if (m <= d || m < 2) {
    fail(ErrorKind::invalid_argument, "stage-1 size m must exceed the number of coefficients");
  }
  if (n - m <= d) {
    fail(ErrorKind::invalid_argument, "stage-2 sample must exceed the number of coefficients");
  }

  std::vector<Eigen::Index> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{ 0 });
  Rng rng(seed, 0);
  for (size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  const std::vector<Eigen::Index> first(perm.begin(), perm.begin() + m);
  const std::vector<Eigen::Index> rest(perm.begin() + m, perm.end());
  const Dataset stage1 = data.subset(first);
  const Dataset stage2 = data.subset(rest);

  EfficientFit out;
  out.tau = tau;
  out.m = m;
  out.h_stage1 = resolve_bandwidth(rule, stage1, tau, kernel);
  const SmoothSpec spec{ kernel, out.h_stage1, tau };
  const FitResult pilot = fit_smoothed(stage1, spec);
  const Vector dbeta = quantile_path_derivative(stage1, spec, pilot);

  const Eigen::Index n2 = stage2.n();
  const Vector qc = stage2.x() * dbeta;
  out.q_check.assign(qc.data(), qc.data() + n2);
  std::vector<double> positive;
  for (double q : out.q_check) {
    if (q > 0.0) {
      positive.push_back(1.0 / q);
    }
  }
  if (positive.empty()) {
    fail(ErrorKind::all_weights_clamped, "stage-1 quantile densities are all nonpositive");
  }
  const double med = sample_quantile(positive, 0.5);
  const double lo = 0.05 * med;
  const double hi = 20.0 * med;
  Vector w(n2);
  for (Eigen::Index i = 0; i < n2; ++i) {
    const double q = out.q_check[static_cast<size_t>(i)];
    // q <= 0 is the limit q -> 0+, i.e. an unbounded weight.
    double wi = q > 0.0 ? 1.0 / q : hi;
    if (!(q > 0.0) || wi < lo || wi > hi) {
      ++out.clamped_count;
      wi = std::clamp(wi, lo, hi);
    }
    w(i) = wi;
  }
  if (2 * out.clamped_count > n2) {
    fail(ErrorKind::all_weights_clamped,
         std::to_string(out.clamped_count) + " of " + std::to_string(n2) +
           " stage-2 weights hit the clamp");
  }
  out.weights.assign(w.data(), w.data() + n2);
  out.beta = fit_exact_weighted(stage2, tau, w).beta;

  Matrix dq = stage2.x().transpose() * w.array().square().matrix().asDiagonal() * stage2.x();
  dq /= static_cast<double>(n2);
  const Matrix cov = tau * (1.0 - tau) * dq.ldlt().solve(Matrix::Identity(d, d));
  out.se = (cov.diagonal().array().max(0.0) / static_cast<double>(n2)).sqrt();
  return out;
}

Matrix
efficient_covariance_oracle(const DgpSpec& design, double tau)
{
  const auto pm = population_moments(design, tau);
  return tau * (1.0 - tau) * pm.dq.inverse();
}

} // namespace ckqr
