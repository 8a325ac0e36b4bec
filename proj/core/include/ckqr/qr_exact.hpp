#pragma once

#include "ckqr/dataset.hpp"
#include "ckqr/fit_result.hpp"

#include <cstdint>
#include <vector>

namespace ckqr {

inline double
check_loss(double u, double tau)
{
  return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}

//! (1/n) sum rho_tau(y_i - x_i'b)
double check_objective(const Dataset& data, const Vector& b, double tau);

//! (1/n) sum w_i rho_tau(y_i - x_i'b)
double weighted_check_objective(const Dataset& data,
                                const Vector& b,
                                double tau,
                                const Vector& weights);

//! Optimality certificate of a basic solution: b interpolates the d basis
//! observations and the directional derivative of the (weighted) check
//! objective along each of the 2d edge directions leaving the basis is
//! non-negative up to tolerance.
struct ExactCertificate
{
  bool optimal = false;
  //! Most negative directional derivative found (0 when optimal).
  double min_directional_derivative = 0.0;
  std::vector<Eigen::Index> basis;
};

ExactCertificate certify_exact(const Dataset& data,
                               const Vector& b,
                               double tau,
                               const std::vector<Eigen::Index>& basis,
                               const Vector* weights = nullptr);

struct ExactOptions
{
  //! Cap on edge-descent pivots after the continuation ladder.
  int max_pivots = 5000;
  //! Newton iterations allowed per continuation level.
  int newton_iter_per_level = 30;
};

//! Global minimizer of the check objective. The smoothed problem is solved on
//! a halving bandwidth ladder (Gaussian kernel, warm starts); after each level
//! the basic solution through the d smallest residuals is tested with the
//! subgradient certificate. If the ladder ends uncertified, edge descent over
//! basic solutions finishes the job. Returns h = 0 and converged = true.
//! Throws rank_deficient or no_convergence.
FitResult fit_exact(const Dataset& data, double tau, const ExactOptions& options = {});

//! Weighted variant, minimizing (1/n) sum w_i rho_tau(y_i - x_i'b), w_i > 0.
FitResult fit_exact_weighted(const Dataset& data,
                             double tau,
                             const Vector& weights,
                             const ExactOptions& options = {});

//! Per-coefficient standard deviation of fit_exact over `reps` pairs-bootstrap
//! resamples. Replicate r draws from its own stream keyed on (seed, r), so the
//! result does not depend on `threads`.
Vector pairs_bootstrap_se(const Dataset& data,
                          double tau,
                          int reps,
                          std::uint64_t seed,
                          unsigned threads = 1);

} // namespace ckqr
