#pragma once

#include "ckqr/dataset.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ckqr {

//! Median of the chi-squared law with 3 degrees of freedom.
inline constexpr double kChi2Median3 = 2.3659738843753382661;

//! Simulation designs.
//!
//! Location designs (exponential, gumbel, chi2_3, t3, plus uniform and normal
//! used by tests): Y = 1 + X~ + eps, X~ ~ U[1,5], eps with median 0.
//! heteroskedastic: eps = (1 + X~) Z / 4, Z ~ N(0,1).
//! qr41: Y = b0(U) + b1(U) X1 + X2 + b3(U) X3, U, X1..X3 iid U[0,1], with b0
//! and b1 the Beta(1,16) and Beta(32,32) quantile functions.
//! With intercept_only set, a location design drops X~: Y = 1 + eps.
struct DgpSpec
{
  enum class Law
  {
    exponential,
    gumbel,
    chi2_3,
    t3,
    heteroskedastic,
    qr41,
    uniform,
    normal
  };

  Law law = Law::exponential;
  Eigen::Index n = 100;
  bool intercept_only = false;

  //! Names as above; "<name>-io" selects the intercept-only variant.
  static DgpSpec from_name(std::string_view name, Eigen::Index n = 100);
  std::string name() const;
  Eigen::Index dim() const;
  bool is_location() const;
};

//! The five designs of the coverage experiments.
std::vector<DgpSpec> coverage_designs(Eigen::Index n);

//! Draws n observations from stream (seed, index).
Dataset sample(const DgpSpec& dgp, std::uint64_t seed, std::uint64_t index = 0);

//! beta(tau): the coefficients of the conditional tau-quantile.
Vector true_beta(const DgpSpec& dgp, double tau);
//! d beta(tau) / d tau; x'true_dbeta is the conditional quantile density.
Vector true_dbeta(const DgpSpec& dgp, double tau);

//! j-th derivative in y of the conditional density f(y|x) at y = x'beta(tau).
//! Throws unsupported_design for orders without a closed form.
double conditional_density(const DgpSpec& dgp, double tau, const Vector& x, int deriv = 0);

//! Quadrature rule for expectations over the covariate law.
struct CovariateNode
{
  double weight;
  Vector x;
};
std::vector<CovariateNode> covariate_nodes(const DgpSpec& dgp);

struct PopulationMoments
{
  Matrix exx; // E[XX']
  Matrix d;   // E[XX' f]
  Matrix dq;  // E[XX' f^2] = E[XX' / q^2]
};
PopulationMoments population_moments(const DgpSpec& dgp, double tau);

//! Sigma(tau) = tau(1-tau) D^{-1} E[XX'] D^{-1}.
Matrix asymptotic_covariance(const DgpSpec& dgp, double tau);

//! Marginal law of Y for intercept-only location designs.
double response_cdf(const DgpSpec& dgp, double y);
double response_pdf(const DgpSpec& dgp, double y);
//! Points where the response density is not smooth (support edges).
std::vector<double> response_kinks(const DgpSpec& dgp);

} // namespace ckqr
