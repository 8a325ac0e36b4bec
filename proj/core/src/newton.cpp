#include "ckqr/newton.hpp"

#include <algorithm>

namespace ckqr {

Vector
regularized_newton_direction(const Matrix& h, const Vector& g)
{
  const auto d = h.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Vector& lambda = eig.eigenvalues();
  double floor = 1e-8 * std::abs(h.trace()) / static_cast<double>(d);
  if (floor <= 0.0) {
    floor = 1e-12;
  }
  // Eigen-decomposed solve with every eigenvalue lifted by the same gamma.
  const double gamma = std::max(0.0, floor - lambda.minCoeff());
  const Matrix& v = eig.eigenvectors();
  const Vector coef = (v.transpose() * g).array() / (lambda.array() + gamma);
  return -(v * coef);
}

bool
passes_eigen_floor(const Matrix& h, double rel_floor)
{
  const double tr = h.trace();
  if (!(tr > 0.0)) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > rel_floor * tr / static_cast<double>(h.rows());
}

double
sample_quantile(std::vector<double> values, double p)
{
  if (values.empty()) {
    fail(ErrorKind::invalid_argument, "quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Vector
ols_quantile_start(const Dataset& data, double tau)
{
  const auto& x = data.x();
  Vector b = x.colPivHouseholderQr().solve(data.y());
  const Vector r = data.residuals(b);
  const double q = sample_quantile(std::vector<double>(r.data(), r.data() + r.size()), tau);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if ((x.col(j).array() == 1.0).all()) {
      b(j) += q;
      break;
    }
  }
  return b;
}

} // namespace ckqr
