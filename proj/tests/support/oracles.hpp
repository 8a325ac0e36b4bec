#pragma once

// Independent reference computations used only by the tests.

#include "ckqr/dataset.hpp"
#include "ckqr/qr_exact.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace ckqr::testing {

inline double
quad(const std::function<double(double)>& f, double a, double b)
{
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

// Integral over [-12, 12] split at 0 (kernels are smooth; the split keeps the
// adaptive rule honest around the mode).
inline double
quad_line(const std::function<double(double)>& f)
{
  return quad(f, -12.0, 0.0) + quad(f, 0.0, 12.0);
}

// Minimum of the (weighted) check objective over all basic solutions: every
// minimizer set contains a point interpolating d observations. d <= 2 only.
inline double
enumeration_min_objective(const Dataset& data, double tau, const Vector* w = nullptr)
{
  const auto n = data.n();
  const auto d = data.d();
  auto obj = [&](const Vector& b) {
    return w ? weighted_check_objective(data, b, tau, *w) : check_objective(data, b, tau);
  };
  double best = std::numeric_limits<double>::infinity();
  if (d == 1) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector b(1);
      b(0) = data.y()(i) / data.x()(i, 0);
      best = std::min(best, obj(b));
    }
    return best;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::Matrix2d a;
      a << data.x()(i, 0), data.x()(i, 1), data.x()(j, 0), data.x()(j, 1);
      if (std::abs(a.determinant()) < 1e-12) {
        continue;
      }
      const Eigen::Vector2d rhs(data.y()(i), data.y()(j));
      const Eigen::Vector2d sol = a.inverse() * rhs;
      best = std::min(best, obj(Vector(sol)));
    }
  }
  return best;
}

// Random small instance: n in [5, 30], d in {1, 2}; a third of them carry
// ties in y and integer-valued covariates to exercise degenerate vertices.
inline Dataset
random_small_instance(std::mt19937_64& gen, int d)
{
  std::uniform_int_distribution<int> nd(5, 30);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  const int n = nd(gen);
  const bool ties = u(gen) < 1.0 / 3.0;
  for (;;) {
    Vector y(n);
    Matrix x(n, d);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      double mean = 0.5;
      if (d == 2) {
        x(i, 1) = ties ? std::floor(5.0 * u(gen)) : 4.0 * u(gen) - 1.0;
        mean += 0.8 * x(i, 1);
      }
      y(i) = mean + z(gen);
      if (ties) {
        y(i) = std::round(2.0 * y(i)) / 2.0;
      }
    }
    if (has_full_column_rank(x)) {
      return Dataset(y, x);
    }
  }
}

// Central finite-difference gradient of f at b.
template<class F>
Vector
fd_gradient(F&& f, const Vector& b, double step)
{
  Vector g(b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    Vector bp = b;
    Vector bm = b;
    bp(j) += step;
    bm(j) -= step;
    g(j) = (f(bp) - f(bm)) / (2.0 * step);
  }
  return g;
}

// Central finite-difference Jacobian of a vector function.
template<class G>
Matrix
fd_jacobian(G&& g, const Vector& b, double step)
{
  Matrix h(b.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    Vector bp = b;
    Vector bm = b;
    bp(j) += step;
    bm(j) -= step;
    h.col(j) = (g(bp) - g(bm)) / (2.0 * step);
  }
  return h;
}

inline double
rel_err(const Matrix& a, const Matrix& b)
{
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline double
sample_variance(const std::vector<double>& v)
{
  double mean = 0.0;
  for (double x : v) {
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return ss / static_cast<double>(v.size() - 1);
}

} // namespace ckqr::testing
