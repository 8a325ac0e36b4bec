#pragma once

#include "ckqr/bandwidth.hpp"
#include "ckqr/design.hpp"
#include "ckqr/qr_smooth.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace ckqr {

//! q-hat(tau|x) = x' H^{-1} x-bar at the fit.
double qdf_estimate(const Dataset& data, const SmoothSpec& spec, const FitResult& fit, const Vector& x);

struct PdfCurve
{
  std::vector<double> taus;
  std::vector<double> q_hat; // x'beta_h(tau)
  std::vector<double> f_hat; // 1 / x'dbeta_h(tau)
  //! Nonpositive quantile density or failed grid point.
  std::vector<bool> flagged;
  Vector x;
};

//! Runs fit_process over `taus` and maps each point to (x'beta, 1/x'dbeta).
PdfCurve pdf_curve(const Dataset& data,
                   const Kernel& kernel,
                   const BandwidthRule& rule,
                   const std::vector<double>& taus,
                   const Vector& x);

//! Same mapping applied to an already fitted process.
PdfCurve pdf_curve_from_process(const QuantileProcess& process, const Vector& x);

//! sum_j f_j (Q_{j+1} - Q_j) over consecutive unflagged grid points; should
//! approximate tau_max - tau_min.
double pdf_curve_mass(const PdfCurve& curve);

//! tau, q_hat, f_hat, flagged
void write_pdf_curve_csv(std::ostream& out, const PdfCurve& curve);

struct EfficientFit
{
  Vector beta;
  double tau = 0.5;
  Eigen::Index m = 0;
  double h_stage1 = 0.0;
  //! Stage-1 quantile densities q-check(tau|X_i) on rows m+1..n (shuffled order).
  std::vector<double> q_check;
  //! Stage-2 weights 1/q-check after clamping to [0.05, 20] x median.
  std::vector<double> weights;
  Eigen::Index clamped_count = 0;
  //! Plug-in standard errors from tau(1-tau) D_q^{-1}, D_q = mean w^2 X X'.
  Vector se;
};

//! floor(n^0.4), raised to d + 1 when that leaves stage 1 underdetermined.
Eigen::Index default_split(Eigen::Index n, Eigen::Index d);

//! Shuffles rows with stream (seed, 0), fits the smoothed QR and its path
//! derivative on the first m rows, then minimizes the check objective
//! weighted by 1/q-check on the remaining rows. Throws all_weights_clamped
//! when more than half of the weights hit the clamp.
EfficientFit efficient_fit(const Dataset& data,
                           double tau,
                           const Kernel& kernel,
                           const BandwidthRule& rule,
                           std::optional<Eigen::Index> m,
                           std::uint64_t seed);

//! tau(1-tau) D_q^{-1}, D_q = E[XX' f^2(X'beta(tau)|X)].
Matrix efficient_covariance_oracle(const DgpSpec& design, double tau);

} // namespace ckqr
