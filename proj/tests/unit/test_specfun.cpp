#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gegenbauer.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "polyspec/errors.hpp"
#include "polyspec/specfun.hpp"

using namespace polyspec::specfun;
using polyspec::InvalidArgument;

namespace {

constexpr double kPi = std::numbers::pi;

// Ascending series in long double, used as an independent root-finding oracle.
long double j0_series(long double x) {
  long double term = 1.0L, sum = 1.0L;
  const long double y = -0.25L * x * x;
  for (int k = 1; k < 80; ++k) {
    term *= y / (static_cast<long double>(k) * k);
    sum += term;
  }
  return sum;
}

double hermite_monomial(int n, double t) {
  // n! sum_m (-1)^m t^{n-2m} / (m! (n-2m)! 2^m)
  double sum = 0.0;
  for (int m = 0; 2 * m <= n; ++m) {
    const double c = std::tgamma(n + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(n - 2.0 * m + 1.0) * std::pow(2.0, m));
    sum += (m % 2 == 0 ? 1.0 : -1.0) * c * std::pow(t, n - 2 * m);
  }
  return sum;
}

double gegenbauer_oracle(int d, int ell, double t) {
  const double lambda = 0.5 * (d - 1);
  return boost::math::gegenbauer(static_cast<unsigned>(ell), lambda, t) /
         boost::math::gegenbauer(static_cast<unsigned>(ell), lambda, 1.0);
}

}  // namespace

TEST_CASE("bessel_j agrees with boost on integer and half-integer orders") {
  for (int twice = 0; twice <= 14; ++twice) {
    const auto order = BesselOrder::from_twice(twice);
    for (double x = 0.05; x <= 80.0; x += 0.173) {
      const double ref = boost::math::cyl_bessel_j(order.value(), x);
      const double got = bessel_j(order, x);
      const double allowed = x <= 20.0 ? 1e-12 * std::abs(ref) + 2e-15 : 1e-12;
      INFO("nu=" << order.value() << " x=" << x);
      CHECK(std::abs(got - ref) <= allowed);
    }
  }
}

TEST_CASE("bessel_j special values") {
  CHECK(bessel_j(0.0, 0.0) == 1.0);
  CHECK(bessel_j(1.0, 0.0) == 0.0);
  CHECK(std::abs(bessel_j(0.5, kPi)) < 1e-15);
  for (double x : {0.3, 2.5, 7.0, 19.0, 33.0}) {
    const double pre = std::sqrt(2.0 / (kPi * x));
    CHECK(bessel_j(0.5, x) == doctest::Approx(pre * std::sin(x)).epsilon(1e-13));
    CHECK(bessel_j(1.5, x) == doctest::Approx(pre * (std::sin(x) / x - std::cos(x))).epsilon(1e-12));
  }
  long double lo = 2.0L, hi = 3.0L;
  for (int i = 0; i < 100; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (j0_series(lo) * j0_series(mid) <= 0 ? hi : lo) = mid;
  }
  CHECK(std::abs(bessel_j(0.0, static_cast<double>(lo))) < 1e-10);
  CHECK(std::abs(bessel_j(0.0, 2.404825557695773)) < 1e-10);
}

TEST_CASE("bessel_j rejects bad input") {
  CHECK_THROWS_AS(bessel_j(0.0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(bessel_j(0.3, 1.0), InvalidArgument);
  CHECK_THROWS_AS(bessel_j(0.0, std::nan("")), InvalidArgument);
}

TEST_CASE("jd kernel") {
  CHECK(jd(2, 0.0) == 1.0);
  CHECK(std::abs(jd(3, kPi)) < 1e-15);
  CHECK(jd(4, 0.5) == doctest::Approx(2.0 / 0.5 * boost::math::cyl_bessel_j(1.0, 0.5)).epsilon(1e-14));
  for (double r = 1e-3; r <= 50.0; r *= 1.07) {
    CHECK(std::abs(jd(3, r) - std::sin(r) / r) <= 1e-13);
  }
  for (int d = 2; d <= 8; ++d) {
    CHECK(jd(d, 0.0) == 1.0);
    for (double r = 1e-4; r <= 60.0; r *= 1.1) CHECK(std::abs(jd(d, r)) <= 1.0);
  }
}

TEST_CASE("jd asymptotic envelope") {
  CHECK(jd_asymptotic(3, 100.0).phase_shift == doctest::Approx(kPi / 2));
  CHECK(jd_asymptotic(2, 0.5).amplitude == doctest::Approx(std::sqrt(2.0 / kPi)));
  // Remainder of the cosine model decays like r^{-(d+1)/2}: scaled error stays bounded.
  for (int d : {2, 3, 4, 5}) {
    double worst = 0.0;
    for (double r = 20.0; r <= 400.0; r += 0.37) {
      const auto env = jd_asymptotic(d, r);
      const double err = std::abs(jd(d, r) - env.amplitude * std::cos(r - env.phase_shift));
      worst = std::max(worst, err * std::pow(r, 0.5 * (d + 1)));
    }
    const double K = worst;
    const auto env = jd_asymptotic(2, 50.0);
    if (d == 2) CHECK(std::abs(jd(2, 50.0) - env.amplitude * std::cos(50.0 - env.phase_shift)) <= K * std::pow(50.0, -1.5));
    CHECK(K < 5.0);
  }
}

TEST_CASE("hermite polynomials") {
  CHECK(hermite(2, 2.0) == 3.0);
  CHECK(hermite(3, 1.0) == -2.0);
  CHECK(hermite(0, 5.0) == 1.0);
  CHECK(hermite(6, 0.7) == doctest::Approx(hermite_monomial(6, 0.7)).epsilon(1e-13));
  for (int q = 0; q <= 10; ++q) {
    for (double t = -3.0; t <= 3.0; t += 0.25) CHECK(hermite(q, t) == doctest::Approx(hermite_monomial(q, t)).epsilon(1e-11).scale(1.0));
  }
  CHECK_THROWS_AS(hermite(-1, 0.0), InvalidArgument);
}

TEST_CASE("gegenbauer normalization, parity and bound") {
  CHECK(gegenbauer({2, 2}, 0.0) == doctest::Approx(-0.5));
  CHECK(gegenbauer({3, 5}, -0.3) == doctest::Approx(-gegenbauer({3, 5}, 0.3)).epsilon(1e-14));
  for (int d = 2; d <= 5; ++d) {
    for (int ell = 0; ell <= 60; ++ell) {
      CHECK(gegenbauer({d, ell}, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
      for (double t = 0.0; t <= 1.0; t += 0.05) {
        const double g = gegenbauer({d, ell}, t);
        CHECK(std::abs(gegenbauer({d, ell}, -t) - ((ell % 2) ? -g : g)) <= 1e-12);
        CHECK(std::abs(g) <= 1.0 + 1e-14);
      }
    }
  }
  for (int d = 2; d <= 6; ++d) {
    for (int ell : {1, 3, 7, 12, 20}) {
      for (double t = -0.95; t <= 0.95; t += 0.1) {
        CHECK(gegenbauer({d, ell}, t) == doctest::Approx(gegenbauer_oracle(d, ell, t)).epsilon(1e-10).scale(1.0));
      }
    }
  }
  CHECK_THROWS_AS(gegenbauer({2, 3}, 1.01), InvalidArgument);
}

TEST_CASE("hilb main term") {
  // Small angles approach G(1) = 1.
  CHECK(hilb_main_term({3, 20}, 1e-6) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(hilb_main_term({2, 40}, 0.5) - gegenbauer({2, 40}, std::cos(0.5))) < 1e-3);
  const double e30 = std::abs(hilb_main_term({2, 30}, 1.0) - gegenbauer({2, 30}, std::cos(1.0)));
  const double e60 = std::abs(hilb_main_term({2, 60}, 1.0) - gegenbauer({2, 60}, std::cos(1.0)));
  CHECK(e60 * 2.0 <= e30);
  // For d = 3 the main term is exact: sin(L theta) / (L sin theta).
  for (int ell : {30, 60, 200}) {
    for (double theta = 0.05; theta < 3.0; theta += 0.1) {
      CHECK(std::abs(hilb_main_term({3, ell}, theta) - gegenbauer({3, ell}, std::cos(theta))) < 1e-13);
    }
  }
  CHECK_THROWS_AS(hilb_main_term({2, 5}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(hilb_main_term({2, 5}, kPi), InvalidArgument);
}

TEST_CASE("hilb remainder scales like sqrt(theta) ell^{-3/2} times the amplification") {
  for (int d : {2, 4}) {
    const double a = 2.0;
    double k40 = 0.0, k80 = 0.0;
    for (int ell : {40, 80}) {
      double k = 0.0;
      for (double theta = 1.0 / ell + 1e-3; theta < a; theta += 0.01) {
        const double err = std::abs(hilb_main_term({d, ell}, theta) - gegenbauer({d, ell}, std::cos(theta)));
        const double shape = std::sqrt(theta) * std::pow(ell, -1.5) * std::pow(std::sin(theta), -0.5 * (d - 2));
        k = std::max(k, err / shape);
      }
      (ell == 40 ? k40 : k80) = k;
    }
    CHECK(k80 <= 1.5 * k40);
  }
}

TEST_CASE("eigenspace dimension") {
  CHECK(eigenspace_dim(2, 3) == 7);
  CHECK(eigenspace_dim(2, 1) == 3);
  CHECK(eigenspace_dim(3, 1) == 4);
  CHECK(eigenspace_dim(4, 2) == 14);
  CHECK_THROWS_AS(eigenspace_dim(2, 0), InvalidArgument);
  CHECK_THROWS_AS(eigenspace_dim(200, 1000000), std::overflow_error);
}

TEST_CASE("log gamma helpers") {
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)));
  CHECK(std::exp(log_binomial(1.0, 0.5)) == doctest::Approx(4.0 / kPi));
  CHECK_THROWS_AS(log_gamma(0.0), InvalidArgument);
}
