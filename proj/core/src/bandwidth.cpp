#include "ckqr/bandwidth.hpp"

#include "ckqr/newton.hpp"
#include "ckqr/qr_exact.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

namespace ckqr {

BandwidthRule
BandwidthRule::fixed_at(double h)
{
  if (!(h > 0.0) || !std::isfinite(h)) {
    fail(ErrorKind::invalid_argument, "fixed bandwidth must be positive and finite");
  }
  BandwidthRule r;
  r.kind = Kind::fixed;
  r.value = h;
  return r;
}

BandwidthRule
BandwidthRule::oracle(const DgpSpec& design, std::optional<Vector> lambda)
{
  BandwidthRule r;
  r.kind = Kind::optimal_oracle;
  r.design = design;
  r.lambda = std::move(lambda);
  return r;
}

BandwidthRule
BandwidthRule::parse(std::string_view text)
{
  if (text == "rot") {
    return rot();
  }
  if (text == "oracle") {
    BandwidthRule r;
    r.kind = Kind::optimal_oracle;
    return r;
  }
  if (text.starts_with("fixed:")) {
    text.remove_prefix(6);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      fail(ErrorKind::invalid_argument, "cannot parse bandwidth value '" + std::string(text) + "'");
    }
    return fixed_at(v);
  }
  fail(ErrorKind::invalid_argument,
       "bandwidth must be 'rot', 'fixed:<value>' or 'oracle', got '" + std::string(text) + "'");
}

std::string
BandwidthRule::to_string() const
{
  switch (kind) {
    case Kind::rule_of_thumb:
      return "rot";
    case Kind::fixed: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
      (void)ec;
      return "fixed:" + std::string(buf, ptr);
    }
    case Kind::optimal_oracle:
      return "oracle";
  }
  return "rot";
}

double
rule_of_thumb(const std::vector<double>& residuals, Eigen::Index n)
{
  if (residuals.size() < 2) {
    fail(ErrorKind::invalid_argument, "rule of thumb needs at least two residuals");
  }
  if (n < 1) {
    fail(ErrorKind::invalid_argument, "sample size must be positive");
  }
  const double count = static_cast<double>(residuals.size());
  const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / count;
  double ss = 0.0;
  double max_abs = 0.0;
  for (double r : residuals) {
    ss += (r - mean) * (r - mean);
    max_abs = std::max(max_abs, std::abs(r));
  }
  const double sd = std::sqrt(ss / (count - 1.0));
  const double iqr = sample_quantile(residuals, 0.75) - sample_quantile(residuals, 0.25);
  const double scale = std::min(sd, iqr / 1.38898);
  if (!(scale >= 1e-12 * (max_abs + 1.0))) {
    fail(ErrorKind::degenerate_residuals, "residuals carry no scale for the rule of thumb");
  }
  return 1.06 * scale * std::pow(static_cast<double>(n), -0.2);
}

double
rule_of_thumb(const Vector& residuals, Eigen::Index n)
{
  return rule_of_thumb(std::vector<double>(residuals.data(), residuals.data() + residuals.size()),
                       n);
}

OptimalBandwidth
optimal_bandwidth(const Vector& lambda,
                  const Matrix& d_inv,
                  const Vector& b,
                  double c_k,
                  int s,
                  Eigen::Index n)
{
  if (n < 1 || !(c_k > 0.0) || s < 1) {
    fail(ErrorKind::invalid_argument, "optimal bandwidth needs n >= 1, c_k > 0, s >= 1");
  }
  const double lb = lambda.dot(b);
  if (!(std::abs(lb) >= 1e-14)) {
    fail(ErrorKind::zero_bias, "lambda'B vanishes; the AMSE-optimal bandwidth is undefined");
  }
  const double ldl = lambda.dot(d_inv * lambda);
  const double nd = static_cast<double>(n);
  const double h = std::pow(c_k * ldl / (2.0 * nd * (s + 1) * lb * lb), 1.0 / (2 * s + 1));
  return { h, std::pow(h, 2 * s + 2) * lb * lb - c_k * h * ldl / nd };
}

double
amse(double h,
     const Vector& lambda,
     const Matrix& sigma,
     const Matrix& d_inv,
     const Vector& b,
     double c_k,
     int s,
     Eigen::Index n)
{
  const double lb = lambda.dot(b);
  const double nd = static_cast<double>(n);
  return std::pow(h, 2 * s + 2) * lb * lb +
         (lambda.dot(sigma * lambda) - c_k * h * lambda.dot(d_inv * lambda)) / nd;
}

BiasConstant
bias_constant_oracle(const DgpSpec& design, double tau, const Kernel& kernel)
{
  const int s = kernel.s();
  const Eigen::Index d = design.dim();
  Vector ef = Vector::Zero(d);
  Matrix dmat = Matrix::Zero(d, d);
  for (const auto& node : covariate_nodes(design)) {
    ef += node.weight * conditional_density(design, tau, node.x, s) * node.x;
    dmat += node.weight * conditional_density(design, tau, node.x) * node.x * node.x.transpose();
  }
  const double factorial = std::tgamma(static_cast<double>(s) + 2.0);
  BiasConstant out;
  out.B = kernel.moment(s + 1) / factorial * dmat.ldlt().solve(ef);
  out.s = s;
  out.tau = tau;
  out.d = dmat;
  return out;
}

double
resolve_bandwidth(const BandwidthRule& rule, const Dataset& data, double tau, const Kernel& kernel)
{
  switch (rule.kind) {
    case BandwidthRule::Kind::fixed:
      if (!(rule.value > 0.0)) {
        fail(ErrorKind::invalid_argument, "fixed bandwidth must be positive");
      }
      return rule.value;
    case BandwidthRule::Kind::rule_of_thumb: {
      const FitResult exact = fit_exact(data, tau);
      return rule_of_thumb(data.residuals(exact.beta), data.n());
    }
    case BandwidthRule::Kind::optimal_oracle: {
      if (!rule.design) {
        fail(ErrorKind::invalid_argument, "oracle bandwidth needs a simulation design");
      }
      const DgpSpec& dgp = *rule.design;
      if (dgp.dim() != data.d()) {
        fail(ErrorKind::invalid_argument, "oracle design dimension differs from the data");
      }
      Vector lambda = Vector::Zero(data.d());
      for (const auto& node : covariate_nodes(dgp)) {
        lambda += node.weight * node.x;
      }
      if (rule.lambda) {
        lambda = *rule.lambda;
      }
      const BiasConstant bc = bias_constant_oracle(dgp, tau, kernel);
      return optimal_bandwidth(
               lambda, bc.d.inverse(), bc.B, kernel.smoothing_constant(), bc.s, data.n())
        .h;
    }
  }
  fail(ErrorKind::invalid_argument, "unknown bandwidth rule");
}

} // namespace ckqr
