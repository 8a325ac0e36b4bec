#include "ckqr/kernels.hpp"
#include "support/oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace ckqr;
using namespace ckqr::testing;

namespace {
const int kOrders[] = { 2, 4, 6, 8 };
const double kPhi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
}

TEST_SUITE("kernels")
{
  TEST_CASE("point values")
  {
    const Kernel g2 = Kernel::gaussian(2);
    const Kernel g4 = Kernel::gaussian(4);
    CHECK(g2.k(0.0) == doctest::Approx(kPhi0).epsilon(1e-15));
    CHECK(g4.k(0.0) == doctest::Approx(1.5 * kPhi0).epsilon(1e-15));
    CHECK(g4.k(2.0) < 0.0);
    CHECK(g4.k(2.0) == doctest::Approx(1.5 * (1.0 - 4.0 / 3.0) * normal_pdf(2.0)).epsilon(1e-14));
    CHECK(g2.K(0.0) == 0.5);
    CHECK(g2.K(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));

    const double oracle = quad([&](double z) { return g4.k(z); }, -12.0, 1.0);
    CHECK(std::abs(g4.K(1.0) - oracle) < 1e-12);
  }

  TEST_CASE("names")
  {
    CHECK(Kernel::from_name("gaussian6").order() == 6);
    CHECK(Kernel::from_name("gaussian8").s() == 7);
    CHECK_THROWS_AS(Kernel::from_name("epanechnikov"), Error);
    CHECK_THROWS_AS(Kernel::gaussian(3), Error);
  }

  TEST_CASE("K against quadrature, symmetry, derivative")
  {
    for (int order : kOrders) {
      const Kernel k = Kernel::gaussian(order);
      CAPTURE(order);
      CHECK(std::abs(quad_line([&](double z) { return k.k(z); }) - 1.0) < 1e-8);
      for (double u = -6.0; u <= 6.0; u += 0.37) {
        CHECK(std::abs(k.K(u) + k.K(-u) - 1.0) < 1e-12);
        CHECK(std::abs(k.K(u) - quad([&](double z) { return k.k(z); }, -12.0, u)) < 1e-11);
        const double j = quad([&](double z) { return z * k.k(z); }, -12.0, u);
        CHECK(std::abs(k.partial_first_moment(u) - j) < 1e-11);
        const double fd = (k.K(u + 1e-5) - k.K(u - 1e-5)) / 2e-5;
        CHECK(std::abs(fd - k.k(u)) < 1e-6);
        const double dfd = (k.k(u + 1e-5) - k.k(u - 1e-5)) / 2e-5;
        CHECK(std::abs(dfd - k.dk(u)) < 1e-6);
        const auto v = k.values(u);
        CHECK(v.k == doctest::Approx(k.k(u)).epsilon(1e-14));
        CHECK(v.K == doctest::Approx(k.K(u)).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("smoothing constants")
  {
    const double rpi = std::sqrt(std::numbers::pi);
    CHECK(smoothing_constant(Kernel::gaussian(2)) == doctest::Approx(0.564190).epsilon(1e-6));
    CHECK(smoothing_constant(Kernel::gaussian(4)) == doctest::Approx(7.0 / (16.0 * rpi)).epsilon(1e-12));
    CHECK(smoothing_constant(Kernel::gaussian(8)) == doctest::Approx(0.143766).epsilon(1e-5));
    for (int order : kOrders) {
      const Kernel k = Kernel::gaussian(order);
      const double num = 2.0 * quad([&](double z) { return k.K(z) * (1.0 - k.K(z)); }, 0.0, 12.0);
      CHECK(std::abs(num - k.smoothing_constant()) < 1e-6);
    }
  }

  TEST_CASE("moments")
  {
    const Kernel g2 = Kernel::gaussian(2);
    CHECK(kernel_moment(g2, 1) == 0.0);
    CHECK(kernel_moment(g2, 2) == doctest::Approx(1.0));
    CHECK(std::abs(kernel_moment(Kernel::gaussian(4), 2)) < 1e-14);
    for (int order : kOrders) {
      const Kernel k = Kernel::gaussian(order);
      for (int j = 1; j <= k.s() + 1; ++j) {
        const double exact = k.moment(j);
        const double num = quad_line([&](double z) { return std::pow(z, j) * k.k(z); });
        CHECK(std::abs(exact - num) < 1e-8);
        if (j <= k.s()) {
          CHECK(std::abs(exact) < 1e-12);
        }
      }
      CHECK(std::abs(k.moment(k.s() + 1)) > 0.1);
      const double m1 = quad_line([&](double z) { return std::abs(z * k.k(z)); });
      CHECK(std::abs(k.abs_first_moment() - m1) < 1e-8);
    }
  }

  TEST_CASE("kappa is a kernel of the same order")
  {
    for (int order : kOrders) {
      const Kernel k = Kernel::gaussian(order);
      CHECK(std::abs(quad_line([&](double t) { return k.kappa(t); }) - 1.0) < 1e-8);
      for (int j = 1; j <= k.s(); ++j) {
        CHECK(std::abs(quad_line([&](double t) { return std::pow(t, j) * k.kappa(t); })) < 1e-8);
      }
    }
  }
}
