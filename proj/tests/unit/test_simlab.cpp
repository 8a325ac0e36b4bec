#include "ckqr/design.hpp"
#include "ckqr/simlab.hpp"
#include "ckqr/special.hpp"
#include "support/oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace ckqr;

namespace {

double
empirical_quantile(std::vector<double> v, double p)
{
  const auto k = static_cast<size_t>(p * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  return v[k];
}

std::vector<double>
errors_of(const char* name, Eigen::Index n)
{
  const Dataset data = sample(DgpSpec::from_name(name, n), 2024);
  std::vector<double> e(data.y().begin(), data.y().end());
  for (auto& v : e) {
    v -= 1.0;
  }
  return e;
}

} // namespace

TEST_SUITE("simlab")
{
  TEST_CASE("bandwidth grid")
  {
    const auto g = h_grid_default();
    CHECK(g.size() == 37);
    CHECK(g.front() == 0.08);
    CHECK(g.back() == 0.80);
  }

  TEST_CASE("true coefficients")
  {
    for (const auto& dgp : coverage_designs(100)) {
      CHECK((true_beta(dgp, 0.5) - Vector::Ones(2)).norm() < 1e-14);
    }
    const DgpSpec q = DgpSpec::from_name("qr41");
    CHECK(true_beta(q, 0.5)(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(true_beta(q, 0.5)(2) == 1.0);
    CHECK(true_beta(q, 0.3)(0) == doctest::Approx(1.0 - std::pow(0.7, 1.0 / 16.0)).epsilon(1e-13));
    const Vector fd = (true_beta(q, 0.6 + 1e-6) - true_beta(q, 0.6 - 1e-6)) / 2e-6;
    CHECK(ckqr::testing::rel_err(true_dbeta(q, 0.6), fd) < 1e-6);
  }

  TEST_CASE("chi-squared median constant")
  {
    const boost::math::chi_squared chi(3.0);
    CHECK(kChi2Median3 == doctest::Approx(boost::math::quantile(chi, 0.5)).epsilon(1e-15));
  }

  TEST_CASE("error quantiles match their closed forms")
  {
    for (const char* name : { "exponential-io", "gumbel-io", "chi2_3-io", "t3-io", "uniform-io", "normal-io" }) {
      const auto e = errors_of(name, 1000000);
      for (double p : { 0.1, 0.5, 0.9 }) {
        CAPTURE(name);
        CAPTURE(p);
        const DgpSpec dgp = DgpSpec::from_name(name);
        const double want = true_beta(dgp, p)(0) - 1.0;
        // chi2_3 at 0.9 has a sampling sd near 0.01 itself
        const double sd = std::sqrt(p * (1.0 - p) / 1e6) / response_pdf(dgp, want + 1.0);
        CHECK(std::abs(empirical_quantile(e, p) - want) < std::max(0.01, 4.0 * sd));
      }
    }
    const Dataset het = sample(DgpSpec::from_name("heteroskedastic", 1000000), 7);
    std::vector<double> z(static_cast<size_t>(het.n()));
    for (Eigen::Index i = 0; i < het.n(); ++i) {
      const double xt = het.x()(i, 1);
      z[static_cast<size_t>(i)] = 4.0 * (het.y()(i) - 1.0 - xt) / (1.0 + xt);
    }
    for (double p : { 0.1, 0.5, 0.9 }) {
      CHECK(std::abs(empirical_quantile(z, p) - normal_quantile(p)) < 0.01);
    }
  }

  TEST_CASE("variance two")
  {
    for (const char* name : { "exponential-io", "gumbel-io", "t3-io" }) {
      CAPTURE(name);
      const double v = ckqr::testing::sample_variance(errors_of(name, 1000000));
      CHECK(v >= 1.97);
      CHECK(v <= 2.03);
    }
  }

  TEST_CASE("sampling is keyed by (seed, index)")
  {
    const DgpSpec dgp = DgpSpec::from_name("qr41", 50);
    CHECK(sample(dgp, 1, 3).y() == sample(dgp, 1, 3).y());
    CHECK(sample(dgp, 1, 3).y() != sample(dgp, 1, 4).y());
    CHECK(sample(dgp, 2, 3).y() != sample(dgp, 1, 3).y());
    CHECK(sample(dgp, 1).names()[0] == "intercept");
    CHECK_THROWS_AS(DgpSpec::from_name("cauchy"), Error);
  }

  TEST_CASE("mc reports")
  {
    const DgpSpec dgp = DgpSpec::from_name("exponential", 100);
    const McReport a = run_mc(dgp, { "mr", "smr", "ckmr" }, { 0.2, 0.4 }, 40, { 0.5 }, 5, 1);
    const McReport b = run_mc(dgp, { "mr", "smr", "ckmr" }, { 0.2, 0.4 }, 40, { 0.5 }, 5, 3);
    std::ostringstream sa, sb;
    write_mc_csv(sa, a);
    write_mc_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(a.coefficient == 1);

    const McCell* mr = a.find("mr", 0.5, false);
    REQUIRE(mr != nullptr);
    CHECK(mr->rmse_ratio == 1.0);
    CHECK(mr->reps == 40);
    REQUIRE(a.find("ckmr", 0.5, false, 0.4) != nullptr);
    REQUIRE(a.find("ckmr", 0.5, true) != nullptr);
    CHECK(a.find("ckmr", 0.5, true)->coverage95 >= 0.0);

    const McReport one = run_mc(dgp, { "ckmr" }, {}, 1, { 0.5 }, 8, 1);
    const McReport again = run_mc(dgp, { "ckmr" }, {}, 1, { 0.5 }, 8, 1);
    std::ostringstream s1, s2;
    write_mc_csv(s1, one);
    write_mc_csv(s2, again);
    CHECK(s1.str() == s2.str());
  }

  TEST_CASE("mc config validation")
  {
    McConfig cfg;
    cfg.design = DgpSpec::from_name("t3", 60);
    cfg.reps = 5;
    cfg.estimators = { "bogus" };
    CHECK_THROWS_AS(run_mc(cfg), Error);
    cfg.estimators = { "ckmr" };
    cfg.reps = 0;
    CHECK_THROWS_AS(run_mc(cfg), Error);
  }
}
