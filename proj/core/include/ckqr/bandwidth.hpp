#pragma once

#include "ckqr/dataset.hpp"
#include "ckqr/design.hpp"
#include "ckqr/kernels.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ckqr {

struct BandwidthRule
{
  enum class Kind
  {
    rule_of_thumb,
    fixed,
    optimal_oracle
  };

  Kind kind = Kind::rule_of_thumb;
  //! Bandwidth for Kind::fixed.
  double value = 0.0;
  //! Design and direction for Kind::optimal_oracle; lambda defaults to E[X],
  //! i.e. the conditional quantile at the mean covariate.
  std::optional<DgpSpec> design;
  std::optional<Vector> lambda;

  static BandwidthRule rot() { return {}; }
  static BandwidthRule fixed_at(double h);
  static BandwidthRule oracle(const DgpSpec& design, std::optional<Vector> lambda = std::nullopt);

  //! "rot" | "fixed:<v>" | "oracle". Oracle rules still need a design attached.
  static BandwidthRule parse(std::string_view text);
  std::string to_string() const;
};

//! 1.06 min(sd, IQR / 1.38898) n^{-1/5}; sd with divisor n-1, IQR type 7.
//! Throws degenerate_residuals when the scale is below 1e-12 (max|r| + 1).
double rule_of_thumb(const std::vector<double>& residuals, Eigen::Index n);
double rule_of_thumb(const Vector& residuals, Eigen::Index n);

struct OptimalBandwidth
{
  double h;
  //! h^{2s+2} (l'B)^2 - c_k h l'D^{-1}l / n, the h-dependent part of the AMSE.
  double amse_excess;
};

//! (c_k l'D^{-1}l / (2n(s+1)(l'B)^2))^{1/(2s+1)}. Throws zero_bias when
//! |l'B| < 1e-14.
OptimalBandwidth optimal_bandwidth(const Vector& lambda,
                                   const Matrix& d_inv,
                                   const Vector& b,
                                   double c_k,
                                   int s,
                                   Eigen::Index n);

//! h^{2s+2}(l'B)^2 + (l'Sigma l - c_k h l'D^{-1}l) / n.
double amse(double h,
            const Vector& lambda,
            const Matrix& sigma,
            const Matrix& d_inv,
            const Vector& b,
            double c_k,
            int s,
            Eigen::Index n);

struct BiasConstant
{
  Vector B;
  int s = 1;
  double tau = 0.5;
  Matrix d; // D(tau) used in the computation
};

//! B = mu_{s+1}/(s+1)! D^{-1} E[X f^{(s)}(X'beta(tau)|X)] by quadrature over
//! the covariate law. Throws unsupported_design when f^{(s)} has no closed form.
BiasConstant bias_constant_oracle(const DgpSpec& design, double tau, const Kernel& kernel);

//! Bandwidth the rule yields for a fit at tau: h_ROT from exact-QR residuals,
//! the fixed value, or the oracle AMSE-optimal h at the data's n.
double resolve_bandwidth(const BandwidthRule& rule,
                         const Dataset& data,
                         double tau,
                         const Kernel& kernel);

} // namespace ckqr
