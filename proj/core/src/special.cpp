#include "ckqr/special.hpp"

#include "ckqr/common.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

namespace ckqr {

namespace {

void
require_open_unit(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::invalid_argument, "probability must lie in (0, 1)");
  }
}

} // namespace

double
normal_quantile(double p)
{
  require_open_unit(p);
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double
beta_quantile(double a, double b, double p)
{
  require_open_unit(p);
  return boost::math::ibeta_inv(a, b, p);
}

double
beta_pdf(double a, double b, double x)
{
  if (x <= 0.0 || x >= 1.0) {
    return 0.0;
  }
  return boost::math::ibeta_derivative(a, b, x);
}

double
beta_pdf_derivative(double a, double b, double x)
{
  if (x <= 0.0 || x >= 1.0) {
    return 0.0;
  }
  return beta_pdf(a, b, x) * ((a - 1.0) / x - (b - 1.0) / (1.0 - x));
}

double
chi_squared_quantile(double dof, double p)
{
  require_open_unit(p);
  return 2.0 * boost::math::gamma_p_inv(0.5 * dof, p);
}

double
chi_squared_pdf(double dof, double x)
{
  if (x <= 0.0) {
    return 0.0;
  }
  return boost::math::pdf(boost::math::chi_squared_distribution<double>(dof), x);
}

double
student_t_quantile(double dof, double p)
{
  require_open_unit(p);
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

} // namespace ckqr
