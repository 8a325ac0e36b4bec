#include "ckqr/bandwidth.hpp"
#include "ckqr/design.hpp"
#include "ckqr/population.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace ckqr;

TEST_SUITE("bandwidth")
{
  TEST_CASE("rule of thumb")
  {
    std::vector<double> r{ -1.6, -0.7, 0.7, 1.6 };
    // type-7 quartiles are -+0.925
    const double sd = std::sqrt((2 * 1.6 * 1.6 + 2 * 0.7 * 0.7) / 3.0);
    const double iqr_scale = 1.85 / 1.38898;
    const double expect = 1.06 * std::min(sd, iqr_scale) * std::pow(100.0, -0.2);
    CHECK(rule_of_thumb(r, 100) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(1.06 * std::pow(100.0, -0.2) == doctest::Approx(0.42200).epsilon(1e-5));

    std::vector<double> twice = r;
    for (auto& v : twice) {
      v *= 2.0;
    }
    CHECK(rule_of_thumb(twice, 100) == doctest::Approx(2.0 * rule_of_thumb(r, 100)).epsilon(1e-14));
    CHECK(rule_of_thumb(r, 3200) == doctest::Approx(rule_of_thumb(r, 100) / 2.0).epsilon(1e-12));

    try {
      rule_of_thumb(std::vector<double>(10, 0.0), 10);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_residuals);
    }
  }

  TEST_CASE("rule of thumb on a large normal sample")
  {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> z;
    Vector r(200000);
    for (auto& v : r) {
      v = z(gen);
    }
    // population IQR of N(0,1) is 1.3489795, below 1.38898
    const double want = 1.06 * (1.3489795003921634 / 1.38898) * std::pow(100.0, -0.2);
    CHECK(std::abs(rule_of_thumb(r, 100) / want - 1.0) < 0.01);
  }

  TEST_CASE("optimal bandwidth")
  {
    const Vector one = Vector::Ones(1);
    const Matrix eye = Matrix::Identity(1, 1);
    const OptimalBandwidth h1 = optimal_bandwidth(one, eye, one, 1.0, 1, 1);
    CHECK(h1.h == doctest::Approx(std::cbrt(0.25)).epsilon(1e-14));
    CHECK(h1.h == doctest::Approx(0.62996).epsilon(1e-5));
    const OptimalBandwidth h16 = optimal_bandwidth(one, eye, one, 1.0, 1, 16);
    CHECK(h16.h / h1.h == doctest::Approx(std::pow(16.0, -1.0 / 3.0)).epsilon(1e-14));

    try {
      optimal_bandwidth(one, eye, Vector::Zero(1), 1.0, 1, 10);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::zero_bias);
    }
  }

  TEST_CASE("optimal bandwidth minimizes the AMSE")
  {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int i = 0; i < 20; ++i) {
      Matrix a(2, 2);
      a << u(gen), u(gen) - 1.0, u(gen) - 1.0, u(gen);
      const Matrix d_inv = a * a.transpose() + 0.1 * Matrix::Identity(2, 2);
      const Matrix sigma = 2.0 * d_inv;
      Vector b(2);
      b << u(gen), u(gen) - 1.0;
      Vector lambda(2);
      lambda << 1.0, u(gen);
      const int s = 1 + 2 * (i % 4);
      const Eigen::Index n = 50 + 100 * i;
      const double c_k = u(gen);
      if (std::abs(lambda.dot(b)) < 1e-3) {
        continue;
      }
      const OptimalBandwidth opt = optimal_bandwidth(lambda, d_inv, b, c_k, s, n);
      const double at = amse(opt.h, lambda, sigma, d_inv, b, c_k, s, n);
      CHECK(at <= amse(opt.h * 1.05, lambda, sigma, d_inv, b, c_k, s, n));
      CHECK(at <= amse(opt.h * 0.95, lambda, sigma, d_inv, b, c_k, s, n));
    }
  }

  TEST_CASE("bias constants")
  {
    const Kernel g2 = Kernel::gaussian(2);
    const BiasConstant loc = bias_constant_oracle(DgpSpec::from_name("exponential", 100), 0.5, g2);
    CHECK(std::abs(loc.B(1)) < 1e-12);
    CHECK(loc.B(0) != 0.0);
    CHECK(std::abs(bias_constant_oracle(DgpSpec::from_name("normal-io"), 0.5, g2).B(0)) < 1e-14);

    // f(y) = (1/sqrt2) exp(-(y/sqrt2 + ln2)) on the standardized scale:
    // f'/f = -1/sqrt2 at every point, B = (mu_2/2) f'/f.
    const BiasConstant ex = bias_constant_oracle(DgpSpec::from_name("exponential-io"), 0.3, g2);
    CHECK(ex.B(0) == doctest::Approx(-0.5 / std::sqrt(2.0)).epsilon(1e-10));

    CHECK_THROWS_AS(bias_constant_oracle(DgpSpec::from_name("gumbel-io"), 0.5, Kernel::gaussian(4)), Error);
  }

  TEST_CASE("population bias expansion")
  {
    const DgpSpec dgp = DgpSpec::from_name("gumbel-io");
    const Kernel g2 = Kernel::gaussian(2);
    const double beta = true_beta(dgp, 0.4)(0);
    const double B = bias_constant_oracle(dgp, 0.4, g2).B(0);
    std::vector<double> rem;
    for (double h : { 0.2, 0.1, 0.05, 0.025 }) {
      rem.push_back(std::abs(population_smoothed_minimizer(dgp, 0.4, g2, h) - beta + h * h * B));
    }
    // remainder is o(h^2): each halving shrinks it by more than 4
    for (size_t j = 1; j < rem.size(); ++j) {
      CHECK(rem[j] < rem[j - 1] / 6.0);
    }
  }

  TEST_CASE("rules")
  {
    CHECK(BandwidthRule::parse("rot").kind == BandwidthRule::Kind::rule_of_thumb);
    const BandwidthRule f = BandwidthRule::parse("fixed:0.25");
    CHECK(f.kind == BandwidthRule::Kind::fixed);
    CHECK(f.value == 0.25);
    CHECK(BandwidthRule::parse("oracle").kind == BandwidthRule::Kind::optimal_oracle);
    CHECK_THROWS_AS(BandwidthRule::parse("fixed:-1"), Error);
    CHECK_THROWS_AS(BandwidthRule::parse("silverman"), Error);
    CHECK(BandwidthRule::parse(f.to_string()).value == 0.25);

    const DgpSpec dgp = DgpSpec::from_name("exponential", 400);
    const Dataset data = sample(dgp, 3);
    const Kernel g2 = Kernel::gaussian(2);
    CHECK(resolve_bandwidth(BandwidthRule::fixed_at(0.3), data, 0.5, g2) == 0.3);
    const double h = resolve_bandwidth(BandwidthRule::oracle(dgp), data, 0.5, g2);
    CHECK(h > 0.0);
    const double h_big = resolve_bandwidth(BandwidthRule::oracle(dgp), sample(DgpSpec::from_name("exponential", 3200), 3), 0.5, g2);
    CHECK(h_big / h == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_THROWS_AS(resolve_bandwidth(BandwidthRule::parse("oracle"), data, 0.5, g2), Error);
  }
}
