#include "ckqr/design.hpp"

#include "ckqr/kernels.hpp"
#include "ckqr/rng.hpp"
#include "ckqr/special.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>
#include <numbers>

namespace ckqr {

namespace {

using std::numbers::pi;
using Law = DgpSpec::Law;

constexpr double kT3Norm = 2.0 / (pi * 1.7320508075688772935); // 2/(pi sqrt 3)
constexpr double kQr41Denom = 2.0 * pi + 8.0;

// Raw error law and its standardization eps = a (raw - m).
struct Standardization
{
  double a;
  double m;
};

Standardization
standardization(Law law)
{
  switch (law) {
    case Law::exponential:
      return { std::numbers::sqrt2, std::numbers::ln2 };
    case Law::gumbel:
      return { std::sqrt(12.0) / pi, -std::log(std::numbers::ln2) };
    case Law::chi2_3:
      return { 1.0, kChi2Median3 };
    case Law::t3:
      return { std::sqrt(2.0 / 3.0), 0.0 };
    case Law::uniform:
    case Law::normal:
      return { 1.0, 0.0 };
    default:
      fail(ErrorKind::unsupported_design, "design has no location error law");
  }
}

double
raw_quantile(Law law, double tau)
{
  switch (law) {
    case Law::exponential:
      return -std::log1p(-tau);
    case Law::gumbel:
      return -std::log(-std::log(tau));
    case Law::chi2_3:
      return chi_squared_quantile(3.0, tau);
    case Law::t3:
      return student_t_quantile(3.0, tau);
    case Law::uniform:
      return tau - 0.5;
    case Law::normal:
      return normal_quantile(tau);
    default:
      fail(ErrorKind::unsupported_design, "design has no location error law");
  }
}

double
raw_cdf(Law law, double x)
{
  switch (law) {
    case Law::exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-x);
    case Law::gumbel:
      return std::exp(-std::exp(-x));
    case Law::chi2_3:
      return x <= 0.0 ? 0.0 : boost::math::gamma_p(1.5, 0.5 * x);
    case Law::t3:
      return boost::math::cdf(boost::math::students_t_distribution<double>(3.0), x);
    case Law::uniform:
      return std::clamp(x + 0.5, 0.0, 1.0);
    case Law::normal:
      return normal_cdf(x);
    default:
      fail(ErrorKind::unsupported_design, "design has no location error law");
  }
}

// He_j(x), probabilists' Hermite polynomial.
double
hermite(int j, double x)
{
  double prev = 1.0;
  if (j == 0) {
    return prev;
  }
  double cur = x;
  for (int k = 1; k < j; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double
normal_pdf_derivative(int j, double x)
{
  return ((j % 2 == 0) ? 1.0 : -1.0) * hermite(j, x) * normal_pdf(x);
}

[[noreturn]] void
unsupported_order(Law law, int j)
{
  fail(ErrorKind::unsupported_design,
       "no closed-form density derivative of order " + std::to_string(j) + " for design " +
         DgpSpec{ law }.name());
}

double
raw_pdf(Law law, double x, int j)
{
  switch (law) {
    case Law::exponential:
      return x < 0.0 ? 0.0 : ((j % 2 == 0) ? 1.0 : -1.0) * std::exp(-x);
    case Law::uniform:
      return (x > -0.5 && x < 0.5 && j == 0) ? 1.0 : 0.0;
    case Law::normal:
      return normal_pdf_derivative(j, x);
    case Law::gumbel: {
      const double ex = std::exp(-x);
      const double f = ex * std::exp(-ex);
      if (j == 0) {
        return f;
      }
      if (j == 1) {
        return f * (ex - 1.0);
      }
      unsupported_order(law, j);
    }
    case Law::chi2_3: {
      const double f = chi_squared_pdf(3.0, x);
      if (j == 0) {
        return f;
      }
      if (j == 1) {
        return x <= 0.0 ? 0.0 : f * (0.5 / x - 0.5);
      }
      unsupported_order(law, j);
    }
    case Law::t3: {
      const double base = 1.0 + x * x / 3.0;
      const double f = kT3Norm / (base * base);
      if (j == 0) {
        return f;
      }
      if (j == 1) {
        return f * (-4.0 * x / 3.0) / base;
      }
      unsupported_order(law, j);
    }
    default:
      fail(ErrorKind::unsupported_design, "design has no location error law");
  }
}

double
raw_draw(Law law, Rng& rng)
{
  switch (law) {
    case Law::exponential:
      return rng.exponential();
    case Law::gumbel:
      return -std::log(-std::log(rng.uniform()));
    case Law::chi2_3: {
      double c = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double z = rng.normal();
        c += z * z;
      }
      return c;
    }
    case Law::t3: {
      const double z = rng.normal();
      double c = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double v = rng.normal();
        c += v * v;
      }
      return z / std::sqrt(c / 3.0);
    }
    case Law::uniform:
      return rng.uniform() - 0.5;
    case Law::normal:
      return rng.normal();
    default:
      fail(ErrorKind::unsupported_design, "design has no location error law");
  }
}

// qr41 coefficient functions and their first two derivatives.
struct Coef
{
  double v, d1, d2;
};

Coef
qr41_b0(double t)
{
  const double r = 1.0 - t;
  return { 1.0 - std::pow(r, 1.0 / 16.0),
           std::pow(r, -15.0 / 16.0) / 16.0,
           15.0 / 256.0 * std::pow(r, -31.0 / 16.0) };
}

Coef
qr41_b1(double t)
{
  const double q = beta_quantile(32.0, 32.0, t);
  const double f = beta_pdf(32.0, 32.0, q);
  const double df = beta_pdf_derivative(32.0, 32.0, q);
  return { q, 1.0 / f, -df / (f * f * f) };
}

Coef
qr41_b3(double t)
{
  const double w = 2.0 * pi * t;
  return { (kQr41Denom * t - (std::cos(w) - 1.0)) / kQr41Denom,
           (kQr41Denom + 2.0 * pi * std::sin(w)) / kQr41Denom,
           4.0 * pi * pi * std::cos(w) / kQr41Denom };
}

void
check_tau(double tau)
{
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorKind::invalid_argument, "tau must lie in (0, 1)");
  }
}

std::vector<std::pair<double, double>>
legendre_rule(double lo, double hi)
{
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& abs = Rule::abscissa();
  const auto& wts = Rule::weights();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  std::vector<std::pair<double, double>> out;
  for (size_t k = 0; k < abs.size(); ++k) {
    out.emplace_back(mid - half * abs[k], half * wts[k]);
    out.emplace_back(mid + half * abs[k], half * wts[k]);
  }
  return out;
}

} // namespace

DgpSpec
DgpSpec::from_name(std::string_view name, Eigen::Index n)
{
  DgpSpec spec;
  spec.n = n;
  if (name.ends_with("-io")) {
    spec.intercept_only = true;
    name.remove_suffix(3);
  }
  static const std::array<std::pair<std::string_view, Law>, 8> table{ {
    { "exponential", Law::exponential },
    { "gumbel", Law::gumbel },
    { "chi2_3", Law::chi2_3 },
    { "t3", Law::t3 },
    { "heteroskedastic", Law::heteroskedastic },
    { "qr41", Law::qr41 },
    { "uniform", Law::uniform },
    { "normal", Law::normal },
  } };
  bool found = false;
  for (const auto& [key, law] : table) {
    if (key == name) {
      spec.law = law;
      found = true;
    }
  }
  if (!found) {
    fail(ErrorKind::invalid_argument, "unknown design '" + std::string(name) + "'");
  }
  if (spec.intercept_only && !spec.is_location()) {
    fail(ErrorKind::invalid_argument, "intercept-only variant exists for location designs only");
  }
  if (n <= spec.dim()) {
    fail(ErrorKind::invalid_argument, "design needs n > d");
  }
  return spec;
}

std::string
DgpSpec::name() const
{
  std::string base;
  switch (law) {
    case Law::exponential: base = "exponential"; break;
    case Law::gumbel: base = "gumbel"; break;
    case Law::chi2_3: base = "chi2_3"; break;
    case Law::t3: base = "t3"; break;
    case Law::heteroskedastic: base = "heteroskedastic"; break;
    case Law::qr41: base = "qr41"; break;
    case Law::uniform: base = "uniform"; break;
    case Law::normal: base = "normal"; break;
  }
  return intercept_only ? base + "-io" : base;
}

bool
DgpSpec::is_location() const
{
  return law != Law::heteroskedastic && law != Law::qr41;
}

Eigen::Index
DgpSpec::dim() const
{
  if (law == Law::qr41) {
    return 4;
  }
  return intercept_only ? 1 : 2;
}

std::vector<DgpSpec>
coverage_designs(Eigen::Index n)
{
  std::vector<DgpSpec> out;
  for (const char* name : { "exponential", "gumbel", "chi2_3", "t3", "heteroskedastic" }) {
    out.push_back(DgpSpec::from_name(name, n));
  }
  return out;
}

Dataset
sample(const DgpSpec& dgp, std::uint64_t seed, std::uint64_t index)
{
  const Eigen::Index n = dgp.n;
  const Eigen::Index d = dgp.dim();
  if (n <= d) {
    fail(ErrorKind::invalid_argument, "design needs n > d");
  }
  Rng rng(seed, index);
  Vector y(n);
  Matrix x(n, d);
  std::vector<std::string> names{ "intercept" };
  for (Eigen::Index j = 1; j < d; ++j) {
    names.push_back("x" + std::to_string(j));
  }

  if (dgp.law == Law::qr41) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x1 = rng.uniform();
      const double x2 = rng.uniform();
      const double x3 = rng.uniform();
      const double u = rng.uniform();
      x.row(i) << 1.0, x1, x2, x3;
      y(i) = qr41_b0(u).v + beta_quantile(32.0, 32.0, u) * x1 + x2 + qr41_b3(u).v * x3;
    }
  } else if (dgp.law == Law::heteroskedastic) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xt = rng.uniform(1.0, 5.0);
      const double z = rng.normal();
      x.row(i) << 1.0, xt;
      y(i) = 1.0 + xt + 0.25 * (1.0 + xt) * z;
    }
  } else {
    const auto [a, m] = standardization(dgp.law);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      double mean = 1.0;
      if (!dgp.intercept_only) {
        const double xt = rng.uniform(1.0, 5.0);
        x(i, 1) = xt;
        mean += xt;
      }
      y(i) = mean + a * (raw_draw(dgp.law, rng) - m);
    }
  }
  return Dataset(std::move(y), std::move(x), std::move(names));
}

Vector
true_beta(const DgpSpec& dgp, double tau)
{
  check_tau(tau);
  Vector b(dgp.dim());
  if (dgp.law == Law::qr41) {
    b << qr41_b0(tau).v, qr41_b1(tau).v, 1.0, qr41_b3(tau).v;
  } else if (dgp.law == Law::heteroskedastic) {
    const double c = 1.0 + 0.25 * normal_quantile(tau);
    b << c, c;
  } else {
    const auto [a, m] = standardization(dgp.law);
    b(0) = 1.0 + a * (raw_quantile(dgp.law, tau) - m);
    if (!dgp.intercept_only) {
      b(1) = 1.0;
    }
  }
  return b;
}

Vector
true_dbeta(const DgpSpec& dgp, double tau)
{
  check_tau(tau);
  Vector b = Vector::Zero(dgp.dim());
  if (dgp.law == Law::qr41) {
    b << qr41_b0(tau).d1, qr41_b1(tau).d1, 0.0, qr41_b3(tau).d1;
  } else if (dgp.law == Law::heteroskedastic) {
    const double c = 0.25 / normal_pdf(normal_quantile(tau));
    b << c, c;
  } else {
    const auto [a, m] = standardization(dgp.law);
    (void)m;
    b(0) = a / raw_pdf(dgp.law, raw_quantile(dgp.law, tau), 0);
  }
  return b;
}

double
conditional_density(const DgpSpec& dgp, double tau, const Vector& x, int deriv)
{
  check_tau(tau);
  if (deriv < 0) {
    fail(ErrorKind::invalid_argument, "negative derivative order");
  }
  if (x.size() != dgp.dim()) {
    fail(ErrorKind::invalid_argument, "covariate has wrong dimension");
  }
  if (dgp.law == Law::qr41) {
    const Coef b0 = qr41_b0(tau);
    const Coef b1 = qr41_b1(tau);
    const Coef b3 = qr41_b3(tau);
    const double q = b0.d1 + x(1) * b1.d1 + x(3) * b3.d1;
    if (deriv == 0) {
      return 1.0 / q;
    }
    if (deriv == 1) {
      const double dq = b0.d2 + x(1) * b1.d2 + x(3) * b3.d2;
      return -dq / (q * q * q);
    }
    unsupported_order(dgp.law, deriv);
  }
  if (dgp.law == Law::heteroskedastic) {
    const double sigma = 0.25 * (1.0 + x(1));
    return normal_pdf_derivative(deriv, normal_quantile(tau)) / std::pow(sigma, deriv + 1);
  }
  const auto [a, m] = standardization(dgp.law);
  (void)m;
  return raw_pdf(dgp.law, raw_quantile(dgp.law, tau), deriv) / std::pow(a, deriv + 1);
}

std::vector<CovariateNode>
covariate_nodes(const DgpSpec& dgp)
{
  std::vector<CovariateNode> out;
  if (dgp.intercept_only) {
    out.push_back({ 1.0, Vector::Ones(1) });
    return out;
  }
  if (dgp.law == Law::qr41) {
    const auto rule = legendre_rule(0.0, 1.0);
    for (const auto& [x1, w1] : rule) {
      for (const auto& [x2, w2] : rule) {
        for (const auto& [x3, w3] : rule) {
          Vector x(4);
          x << 1.0, x1, x2, x3;
          out.push_back({ w1 * w2 * w3, x });
        }
      }
    }
    return out;
  }
  for (const auto& [xt, w] : legendre_rule(1.0, 5.0)) {
    Vector x(2);
    x << 1.0, xt;
    out.push_back({ w / 4.0, x });
  }
  return out;
}

PopulationMoments
population_moments(const DgpSpec& dgp, double tau)
{
  const Eigen::Index d = dgp.dim();
  PopulationMoments pm{ Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d) };
  for (const auto& node : covariate_nodes(dgp)) {
    const Matrix xx = node.x * node.x.transpose();
    const double f = conditional_density(dgp, tau, node.x);
    pm.exx += node.weight * xx;
    pm.d += node.weight * f * xx;
    pm.dq += node.weight * f * f * xx;
  }
  return pm;
}

Matrix
asymptotic_covariance(const DgpSpec& dgp, double tau)
{
  const auto pm = population_moments(dgp, tau);
  const Matrix dinv = pm.d.inverse();
  return tau * (1.0 - tau) * dinv * pm.exx * dinv;
}

namespace {

void
require_intercept_only(const DgpSpec& dgp)
{
  if (!dgp.intercept_only) {
    fail(ErrorKind::unsupported_design, "marginal response law needs an intercept-only design");
  }
}

} // namespace

double
response_cdf(const DgpSpec& dgp, double y)
{
  require_intercept_only(dgp);
  const auto [a, m] = standardization(dgp.law);
  return raw_cdf(dgp.law, m + (y - 1.0) / a);
}

double
response_pdf(const DgpSpec& dgp, double y)
{
  require_intercept_only(dgp);
  const auto [a, m] = standardization(dgp.law);
  return raw_pdf(dgp.law, m + (y - 1.0) / a, 0) / a;
}

std::vector<double>
response_kinks(const DgpSpec& dgp)
{
  require_intercept_only(dgp);
  const auto [a, m] = standardization(dgp.law);
  switch (dgp.law) {
    case Law::exponential:
    case Law::chi2_3:
      return { 1.0 - a * m };
    case Law::uniform:
      return { 1.0 - 0.5 * a, 1.0 + 0.5 * a };
    default:
      return {};
  }
}

} // namespace ckqr
