#include "ckqr/bandwidth.hpp"
#include "ckqr/design.hpp"
#include "ckqr/inference.hpp"
#include "ckqr/parallel.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace ckqr;

namespace {
const Kernel g2 = Kernel::gaussian(2);
}

TEST_SUITE("inference")
{
  TEST_CASE("perfect fit has zero variance")
  {
    const Dataset data(Vector::Constant(10, 3.0), Matrix::Ones(10, 1));
    const SmoothSpec spec{ g2, 0.5, 0.5 };
    const FitResult fit = fit_smoothed(data, spec);
    const CovarianceEstimate cov = covariance(data, spec, fit);
    CHECK(cov.V_hat.norm() == 0.0);
    CHECK(cov.Sigma_hat.norm() == 0.0);
    const ConfidenceInterval ci = confidence_interval(fit, cov, 0, 0.95);
    CHECK(ci.lo == fit.beta(0));
    CHECK(ci.hi == fit.beta(0));
  }

  TEST_CASE("huge bandwidth starves the score")
  {
    const Dataset data = sample(DgpSpec::from_name("normal-io", 200), 1);
    const SmoothSpec spec{ g2, 1e6, 0.5 };
    const FitResult fit = fit_smoothed(data, spec);
    CHECK(covariance(data, spec, fit).V_hat(0, 0) < 1e-10);
  }

  TEST_CASE("interval widths and nesting")
  {
    const Dataset data = sample(DgpSpec::from_name("chi2_3", 300), 2);
    const SmoothSpec spec{ g2, resolve_bandwidth(BandwidthRule::rot(), data, 0.5, g2), 0.5 };
    const FitResult fit = fit_smoothed(data, spec);
    const CovarianceEstimate cov = covariance(data, spec, fit);
    for (Eigen::Index k = 0; k < 2; ++k) {
      const ConfidenceInterval a = confidence_interval(fit, cov, k, 0.95);
      const ConfidenceInterval b = confidence_interval(fit, cov, k, 0.99);
      CHECK((a.hi - a.lo) / 2.0 == doctest::Approx(1.959963984540054 * cov.se(k)).epsilon(1e-12));
      CHECK(b.lo < a.lo);
      CHECK(b.hi > a.hi);
      CHECK(cov.se(k) > 0.0);
    }
    CHECK((cov.Sigma_hat - cov.Sigma_hat.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cov.Sigma_hat.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() >= 0.0);
    CHECK_THROWS_AS(confidence_interval(fit, cov, 0, 1.0), Error);
    CHECK_THROWS_AS(confidence_interval(fit, cov, 5, 0.95), Error);
  }

  TEST_CASE("sandwich algebra")
  {
    Matrix d(1, 1);
    d << 2.0;
    Matrix v(1, 1);
    v << 0.25;
    const CovarianceEstimate c = sandwich(d, v, 100);
    CHECK(c.Sigma_hat(0, 0) == doctest::Approx(0.25 / 4.0));
    CHECK(c.se(0) == doctest::Approx(std::sqrt(0.0625 / 100.0)));
    Matrix bad(2, 2);
    bad << 1.0, 0.0, 0.0, -1.0;
    try {
      sandwich(bad, Matrix::Identity(2, 2), 10);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::singular_hessian);
    }
  }

  TEST_CASE("naive variant")
  {
    const Dataset data = sample(DgpSpec::from_name("t3-io", 150), 4);
    const SmoothSpec spec{ g2, 0.3, 0.5 };
    const FitResult fit = fit_smoothed(data, spec);
    const CovarianceEstimate nv = naive_covariance(data, spec, fit);
    CHECK(nv.V_hat(0, 0) == 0.25);
    const double dh = nv.D_hat(0, 0);
    CHECK(nv.Sigma_hat(0, 0) == doctest::Approx(0.25 / (dh * dh)).epsilon(1e-14));
  }

  TEST_CASE("variance expansion oracle")
  {
    const DgpSpec uni = DgpSpec::from_name("uniform-io");
    CHECK(variance_expansion_oracle(uni, 0.5, g2, 0.1)(0, 0) ==
          doctest::Approx(0.25 - 0.1 / std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(std::abs(variance_expansion_oracle(uni, 0.5, g2, 0.1)(0, 0) - 0.19358) < 1e-5);
    const DgpSpec het = DgpSpec::from_name("heteroskedastic");
    CHECK((variance_expansion_oracle(het, 0.3, g2, 0.0) - asymptotic_covariance(het, 0.3)).norm() == 0.0);
  }

  TEST_CASE("sandwich consistency on uniform data")
  {
    // V-hat estimates tau(1-tau) - c_k h f, so n Sigma-hat centres on the
    // finite-h variance rather than on 0.25 itself.
    const DgpSpec dgp = DgpSpec::from_name("uniform-io", 5000);
    std::vector<double> nsig(200);
    std::vector<double> target(200);
    parallel_for(200, default_threads(), [&](size_t r) {
      const Dataset data = sample(dgp, 5150, r);
      const SmoothSpec spec{ g2, resolve_bandwidth(BandwidthRule::rot(), data, 0.5, g2), 0.5 };
      const FitResult fit = fit_smoothed(data, spec);
      nsig[r] = covariance(data, spec, fit).Sigma_hat(0, 0);
      target[r] = variance_expansion_oracle(dgp, 0.5, g2, spec.h)(0, 0);
    });
    int near_h = 0;
    double mean = 0.0;
    for (size_t r = 0; r < 200; ++r) {
      near_h += std::abs(nsig[r] - target[r]) / target[r] <= 0.15;
      mean += nsig[r] / 200.0;
    }
    CHECK(near_h >= 180);
    CHECK(std::abs(mean - 0.25) / 0.25 <= 0.15);
  }

  TEST_CASE("sandwich intervals are shorter than the naive ones")
  {
    const DgpSpec dgp = DgpSpec::from_name("exponential", 500);
    std::vector<double> ratio(2000);
    parallel_for(2000, default_threads(), [&](size_t r) {
      const Dataset data = sample(dgp, 5151, r);
      const SmoothSpec spec{ g2, resolve_bandwidth(BandwidthRule::rot(), data, 0.5, g2), 0.5 };
      const FitResult fit = fit_smoothed(data, spec);
      ratio[r] = covariance(data, spec, fit).se(1) / naive_covariance(data, spec, fit).se(1);
    });
    double mean = 0.0;
    for (double v : ratio) {
      mean += v / 2000.0;
    }
    CHECK(mean < 1.0);
  }
}
