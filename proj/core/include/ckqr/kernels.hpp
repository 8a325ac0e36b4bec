#pragma once

#include <array>
#include <string>
#include <string_view>

namespace ckqr {

double normal_pdf(double u);
double normal_cdf(double u);

//! Gaussian-type kernel k(u) = p(u) phi(u) of order 2, 4, 6 or 8, where p is
//! an even polynomial chosen so that the moments of k vanish up to order s.
//!
//! The integrated kernel K(u) and the first partial moment
//! J(u) = int_{-inf}^u z k(z) dz are evaluated in closed form through the
//! recursion int_{-inf}^u x^m phi = -u^{m-1} phi(u) + (m-1) int_{-inf}^u x^{m-2} phi,
//! so every evaluation costs one erfc and one exp.
class Kernel
{
public:
  static constexpr int kMaxDegree = 8;
  using Poly = std::array<double, kMaxDegree + 1>;

  //! Accepts "gaussian2" | "gaussian4" | "gaussian6" | "gaussian8".
  static Kernel from_name(std::string_view name);
  static Kernel gaussian(int order);

  int order() const noexcept { return order_; }
  //! s, the largest index of a vanishing moment.
  int s() const noexcept { return order_ - 1; }
  const std::string& name() const noexcept { return name_; }
  //! Coefficients of p in increasing powers of u.
  const Poly& poly_coeffs() const noexcept { return p_; }

  struct Values
  {
    double k;
    double K;
    double J; // partial first moment
  };

  //! k, K and J at u sharing one exp and one erfc.
  Values values(double u) const;

  double k(double u) const;
  double K(double u) const;
  //! int_{-inf}^u z k(z) dz
  double partial_first_moment(double u) const;
  //! k'(u)
  double dk(double u) const;
  //! 2 k(t) + t k'(t): second derivative weight of Horowitz's smoothed loss.
  double kappa(double t) const;

  double smoothing_constant() const noexcept { return c_k_; }
  //! int z^j k(z) dz, exact Gaussian-moment algebra.
  double moment(int j) const;
  //! int |z k(z)| dz, the Lipschitz constant relating smoothed and check losses.
  double abs_first_moment() const noexcept { return abs_m1_; }

private:
  Kernel(int order, std::string name, const Poly& p, double c_k);

  int order_;
  std::string name_;
  Poly p_{};      // k = p * phi
  Poly K_poly_{}; // K = K_phi_coeff * Phi + K_poly * phi
  double K_phi_coeff_ = 1.0;
  Poly J_poly_{}; // J = J_poly * phi
  Poly dk_poly_{}; // k' = dk_poly * phi
  double c_k_;
  double abs_m1_ = 0.0;
};

// Free-function surface mirroring the kernel operations.
inline double
eval_k(const Kernel& kernel, double u)
{
  return kernel.k(u);
}

inline double
eval_K(const Kernel& kernel, double u)
{
  return kernel.K(u);
}

inline double
smoothing_constant(const Kernel& kernel)
{
  return kernel.smoothing_constant();
}

inline double
kernel_moment(const Kernel& kernel, int j)
{
  return kernel.moment(j);
}

} // namespace ckqr
