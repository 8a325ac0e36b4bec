#include "ckqr/population.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace ckqr {

namespace {

constexpr double kZMax = 12.0;

// int_{-12}^{12} g(z) dz split at the given breakpoints.
double
integrate_pieces(const std::function<double(double)>& g, std::vector<double> cuts)
{
  cuts.push_back(-kZMax);
  cuts.push_back(kZMax);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double lo = std::max(cuts[j], -kZMax);
    const double hi = std::min(cuts[j + 1], kZMax);
    if (hi > lo) {
      acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, hi, 15, 1e-15);
    }
  }
  return acc;
}

double
solve_near_truth(const DgpSpec& design,
                 double tau,
                 double h,
                 const std::function<double(double)>& moment)
{
  if (!design.intercept_only) {
    fail(ErrorKind::unsupported_design, "population minimizers need an intercept-only design");
  }
  if (!(h > 0.0)) {
    fail(ErrorKind::invalid_argument, "bandwidth must be positive");
  }
  const double beta = true_beta(design, tau)(0);
  auto g = [&](double b) { return moment(b) - tau; };
  double width = std::max(h, 0.05);
  double lo = beta - width;
  double hi = beta + width;
  for (int k = 0; k < 20 && g(lo) * g(hi) > 0.0; ++k) {
    width *= 2.0;
    lo = beta - width;
    hi = beta + width;
  }
  if (g(lo) * g(hi) > 0.0) {
    fail(ErrorKind::no_convergence, "no sign change around the true quantile");
  }
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
    g, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

std::vector<double>
kink_cuts(const DgpSpec& design, double b, double h, double sign)
{
  std::vector<double> cuts;
  for (double y : response_kinks(design)) {
    cuts.push_back(sign * (y - b) / h);
  }
  return cuts;
}

} // namespace

double
population_smoothed_minimizer(const DgpSpec& design, double tau, const Kernel& kernel, double h)
{
  return solve_near_truth(design, tau, h, [&](double b) {
    return integrate_pieces([&](double z) { return response_cdf(design, b - h * z) * kernel.k(z); },
                            kink_cuts(design, b, h, -1.0));
  });
}

double
population_horowitz_minimizer(const DgpSpec& design, double tau, const Kernel& kernel, double h)
{
  return solve_near_truth(design, tau, h, [&](double b) {
    const double smooth = integrate_pieces(
      [&](double z) { return response_cdf(design, b - h * z) * kernel.k(z); },
      kink_cuts(design, b, h, -1.0));
    const double extra = integrate_pieces(
      [&](double z) { return z * kernel.k(z) * response_pdf(design, b + h * z); },
      kink_cuts(design, b, h, 1.0));
    return smooth - h * extra;
  });
}

} // namespace ckqr
