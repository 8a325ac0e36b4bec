#include "ckqr/kernels.hpp"

#include "ckqr/common.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cassert>
#include <cmath>
#include <numbers>

namespace ckqr {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684759;

using Poly = Kernel::Poly;

double
horner(const Poly& c, double u)
{
  double acc = 0.0;
  for (int i = Kernel::kMaxDegree; i >= 0; --i) {
    acc = acc * u + c[static_cast<size_t>(i)];
  }
  return acc;
}

// Closed form of int_{-inf}^u x^m phi(x) dx as A_m Phi(u) + P_m(u) phi(u).
struct GaussPartial
{
  double phi_coeff;
  Poly poly;
};

GaussPartial
gauss_partial(int m)
{
  GaussPartial cur{ 1.0, {} };  // m = 0
  GaussPartial odd{ 0.0, {} };  // m = 1
  odd.poly[0] = -1.0;
  if (m == 0) {
    return cur;
  }
  if (m == 1) {
    return odd;
  }
  GaussPartial prev = (m % 2 == 0) ? cur : odd;
  for (int j = (m % 2 == 0) ? 2 : 3; j <= m; j += 2) {
    GaussPartial next{ (j - 1) * prev.phi_coeff, {} };
    for (size_t i = 0; i < next.poly.size(); ++i) {
      next.poly[i] = (j - 1) * prev.poly[i];
    }
    next.poly[static_cast<size_t>(j - 1)] -= 1.0;
    prev = next;
  }
  return prev;
}

double
double_factorial_odd(int m)
{
  // (m-1)!! for even m, i.e. E[Z^m] of a standard normal.
  double r = 1.0;
  for (int j = m - 1; j > 1; j -= 2) {
    r *= j;
  }
  return r;
}

double
gauss_moment(int m)
{
  return (m % 2 == 1) ? 0.0 : double_factorial_odd(m);
}

} // namespace

double
normal_pdf(double u)
{
  return kInvSqrt2Pi * std::exp(-0.5 * u * u);
}

double
normal_cdf(double u)
{
  return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

Kernel::Kernel(int order, std::string name, const Poly& p, double c_k)
  : order_(order)
  , name_(std::move(name))
  , p_(p)
  , c_k_(c_k)
{
  K_phi_coeff_ = 0.0;
  for (int j = 0; j <= kMaxDegree; ++j) {
    const double c = p_[static_cast<size_t>(j)];
    if (c == 0.0) {
      continue;
    }
    auto even = gauss_partial(j);
    K_phi_coeff_ += c * even.phi_coeff;
    for (size_t i = 0; i < K_poly_.size(); ++i) {
      K_poly_[i] += c * even.poly[i];
    }
    if (j + 1 <= kMaxDegree) {
      auto odd = gauss_partial(j + 1);
      for (size_t i = 0; i < J_poly_.size(); ++i) {
        J_poly_[i] += c * odd.poly[i];
      }
    }
  }
  // k' = (p' - u p) phi
  for (int j = 1; j <= kMaxDegree; ++j) {
    dk_poly_[static_cast<size_t>(j - 1)] += j * p_[static_cast<size_t>(j)];
  }
  for (int j = 0; j < kMaxDegree; ++j) {
    dk_poly_[static_cast<size_t>(j + 1)] -= p_[static_cast<size_t>(j)];
  }

  auto abs_zk = [this](double z) { return std::abs(z * k(z)); };
  abs_m1_ = 2.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                    abs_zk, 0.0, 12.0, 15, 1e-12);

#ifndef NDEBUG
  for (double u : { -3.0, -1.0, -0.25, 0.5, 2.0 }) {
    auto kk = [this](double z) { return k(z); };
    const double q = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      kk, -12.0, u, 15, 1e-13);
    assert(std::abs(q - K(u)) < 1e-10);
  }
#endif
}

Kernel
Kernel::gaussian(int order)
{
  static const Kernel g2(2, "gaussian2", Poly{ 1.0 }, 1.0 / std::sqrt(std::numbers::pi));
  static const Kernel g4(4,
                         "gaussian4",
                         Poly{ 1.5, 0.0, -0.5 },
                         7.0 / (16.0 * std::sqrt(std::numbers::pi)));
  static const Kernel g6(6,
                         "gaussian6",
                         Poly{ 15.0 / 8.0, 0.0, -5.0 / 4.0, 0.0, 1.0 / 8.0 },
                         321.0 / (1024.0 * std::sqrt(std::numbers::pi)));
  static const Kernel g8(
    8,
    "gaussian8",
    Poly{ 35.0 / 16.0, 0.0, -35.0 / 16.0, 0.0, 7.0 / 16.0, 0.0, -1.0 / 48.0 },
    4175.0 / (16384.0 * std::sqrt(std::numbers::pi)));
  switch (order) {
    case 2:
      return g2;
    case 4:
      return g4;
    case 6:
      return g6;
    case 8:
      return g8;
    default:
      fail(ErrorKind::invalid_argument,
           "kernel order must be 2, 4, 6 or 8 (got " + std::to_string(order) + ")");
  }
}

Kernel
Kernel::from_name(std::string_view name)
{
  if (name == "gaussian2") {
    return gaussian(2);
  }
  if (name == "gaussian4") {
    return gaussian(4);
  }
  if (name == "gaussian6") {
    return gaussian(6);
  }
  if (name == "gaussian8") {
    return gaussian(8);
  }
  fail(ErrorKind::invalid_argument,
       "unknown kernel '" + std::string(name) +
         "' (expected gaussian2, gaussian4, gaussian6 or gaussian8)");
}

double
Kernel::k(double u) const
{
  return horner(p_, u) * normal_pdf(u);
}

double
Kernel::K(double u) const
{
  // Evaluate on the negative half-line and reflect, so K(u) + K(-u) = 1
  // holds to rounding and the upper tail keeps full relative precision.
  if (u > 0.0) {
    return 1.0 - K(-u);
  }
  return K_phi_coeff_ * normal_cdf(u) + horner(K_poly_, u) * normal_pdf(u);
}

Kernel::Values
Kernel::values(double u) const
{
  const double phi = normal_pdf(u);
  Values v{};
  v.k = horner(p_, u) * phi;
  if (u > 0.0) {
    v.K = 1.0 - (K_phi_coeff_ * normal_cdf(-u) + horner(K_poly_, -u) * phi);
  } else {
    v.K = K_phi_coeff_ * normal_cdf(u) + horner(K_poly_, u) * phi;
  }
  v.J = horner(J_poly_, u) * phi;
  return v;
}

double
Kernel::partial_first_moment(double u) const
{
  return horner(J_poly_, u) * normal_pdf(u);
}

double
Kernel::dk(double u) const
{
  return horner(dk_poly_, u) * normal_pdf(u);
}

double
Kernel::kappa(double t) const
{
  const double phi = normal_pdf(t);
  return (2.0 * horner(p_, t) + t * horner(dk_poly_, t)) * phi;
}

double
Kernel::moment(int j) const
{
  if (j < 0) {
    fail(ErrorKind::invalid_argument, "kernel moment index must be >= 0");
  }
  double m = 0.0;
  for (int i = 0; i <= kMaxDegree; ++i) {
    m += p_[static_cast<size_t>(i)] * gauss_moment(i + j);
  }
  return m;
}

} // namespace ckqr
