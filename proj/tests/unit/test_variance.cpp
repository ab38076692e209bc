#include <doctest.h>

#include <cmath>
#include <numbers>

#include "polyspec/errors.hpp"
#include "polyspec/geometry.hpp"
#include "polyspec/variance.hpp"

using namespace polyspec;
using namespace polyspec::variance;
using geometry::omega;
using std::numbers::pi;

namespace {

PolyspectrumSpec euclid(int d, int q, double R, double lambda) { return {{Geometry::Euclidean, d, lambda, 1}, q, R}; }
PolyspectrumSpec sphere(int d, int q, double R, int ell) { return {{Geometry::Spherical, d, 1.0, ell}, q, R}; }

// int_{-1}^{1} P_l(t)^3 dt = 2 (l l l; 0 0 0)^2 for even l.
double legendre_cube_integral(int l) {
  const int g = 3 * l / 2;
  const double log3j = 0.5 * (3 * std::lgamma(l + 1.0) - std::lgamma(3.0 * l + 2.0)) + std::lgamma(g + 1.0) -
                       3 * std::lgamma(g - l + 1.0);
  return 2.0 * std::exp(2.0 * log3j);
}

// int_0^2 cos(k r) P(r) dr for P(r) = (pi^2/3)(16 - 12 r + r^3), by parts.
double cos_moment_lens3(double k) {
  const double c = pi * pi / 3;
  auto P = [&](double r) { return c * (16 - 12 * r + r * r * r); };
  auto P1 = [&](double r) { return c * (-12 + 3 * r * r); };
  auto P2 = [&](double r) { return c * 6 * r; };
  const double P3 = c * 6;
  auto F = [&](double r) {
    return std::sin(k * r) * P(r) / k + std::cos(k * r) * P1(r) / (k * k) - std::sin(k * r) * P2(r) / (k * k * k) -
           std::cos(k * r) * P3 / (k * k * k * k);
  };
  return F(2.0) - F(0.0);
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(regime_of(sphere(2, 3, pi, 11)) == Regime::ParityZero);
  CHECK(regime_of(sphere(2, 3, pi, 12)) == Regime::Generic);
  CHECK(regime_of(sphere(2, 3, 1.0, 11)) == Regime::Generic);
  CHECK(regime_of(sphere(2, 4, pi, 11)) == Regime::D2Q4);
  CHECK(regime_of(euclid(3, 2, 1, 10)) == Regime::Q2);
  CHECK(regime_of(euclid(2, 4, 1, 10)) == Regime::D2Q4);
  CHECK(regime_of(euclid(3, 4, 1, 10)) == Regime::Generic);
  CHECK_THROWS_AS(variance_exact(euclid(2, 1, 1, 10)), InvalidArgument);
  CHECK_THROWS_AS(variance_asymptotic(euclid(2, 0, 1, 10)), InvalidArgument);
  CHECK_THROWS_AS(variance_exact(sphere(2, 3, 4.0, 3)), InvalidArgument);
}

TEST_CASE("Euclidean exact variance for d = 3, q = 2 against a closed form") {
  for (double lambda : {3.0, 10.0, 40.0}) {
    // 2 / lambda^2 * int_0^2 sin^2(lambda r) P(r) dr, P(r) = W_{3,1}(r)
    const double mass = pi * pi / 3 * (32 - 24 + 4);
    const double exact = 2.0 / (lambda * lambda) * 0.5 * (mass - cos_moment_lens3(2 * lambda));
    const auto v = variance_exact(euclid(3, 2, 1.0, lambda));
    CHECK(v.converged);
    CHECK(v.value == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("Euclidean scaling identity") {
  const double lambda = 5.0;
  const auto a = variance_exact(euclid(2, 3, 1.0, lambda));
  const auto b = variance_exact(euclid(2, 3, lambda, 1.0));
  CHECK(a.value == doctest::Approx(std::pow(lambda, -4) * b.value).epsilon(1e-8));
}

TEST_CASE("Euclidean asymptotics") {
  auto ratio = [](int d, int q, double lambda) {
    const auto s = euclid(d, q, 1.0, lambda);
    return variance_exact(s).value / variance_asymptotic(s).value;
  };
  const double p = variance_asymptotic(euclid(3, 3, 1.0, 10)).value;
  CHECK(p == doctest::Approx(6 * (pi / 4) * omega(2) * (omega(2) / 3) / 1000).epsilon(1e-13));

  double prev = 1.0;
  for (int k = 0; k <= 4; ++k) {
    const double dev = std::abs(ratio(3, 3, 25 * std::pow(2, k)) - 1);
    if (k >= 2) CHECK(dev < prev);
    prev = dev;
  }
  CHECK(variance_exact(euclid(2, 2, 1, 20)).value / variance_exact(euclid(2, 2, 1, 10)).value ==
        doctest::Approx(0.5).epsilon(0.15));
  CHECK(std::abs(ratio(2, 2, 200) - 1) < 0.01);
  CHECK(std::abs(ratio(3, 2, 200) - 1) < 0.01);
  const double r100 = ratio(2, 4, 100), r800 = ratio(2, 4, 800);
  CHECK(std::abs(r100 - 1) < 0.35);
  CHECK(std::abs(r800 - 1) < std::abs(r100 - 1));
  for (int q : {2, 4, 6}) CHECK(variance_exact(euclid(2, q, 0.7, 13)).value > 0);
}

TEST_CASE("spherical exact variance on the full sphere") {
  const double vol = omega(1) * omega(2);
  for (int l : {4, 12, 30}) {
    const auto v = variance_exact(sphere(2, 3, pi, l));
    CHECK(v.value == doctest::Approx(6 * vol * legendre_cube_integral(l)).epsilon(1e-9));
    const auto v2 = variance_exact(sphere(2, 2, pi, l));
    CHECK(v2.value == doctest::Approx(2 * vol * 2.0 / (2 * l + 1)).epsilon(1e-10));
  }
  ExactOptions brute;
  brute.parity_shortcut = false;
  const double even = variance_exact(sphere(2, 3, pi, 12)).value;
  CHECK(variance_exact(sphere(2, 3, pi, 11)).value == 0.0);
  CHECK(variance_exact(sphere(2, 3, pi, 11), brute).value <= 1e-12 * 6 * vol);
  CHECK(variance_exact(sphere(3, 5, pi, 9), brute).value <= 1e-12 * even);
  const double pred = 2 * 6 * vol * variance::idq_value(2, 3) / 144.0;
  CHECK(even / pred == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("spherical asymptotics") {
  const double vol = omega(1) * omega(2);
  const double i25 = idq_value(2, 5);
  CHECK(variance_asymptotic(sphere(2, 5, pi, 20)).value == doctest::Approx(2 * 120 * vol * i25 / 400).epsilon(1e-13));
  CHECK(variance_asymptotic(sphere(2, 3, pi, 21)).value == 0.0);

  // Breaking any one parity condition gives at least half the Generic prediction.
  for (auto s : {sphere(2, 3, 1.0, 31), sphere(2, 3, pi, 32), sphere(2, 5, 2.0, 31)}) {
    auto g = s;
    g.R = std::min(s.R, pi);
    const double v = variance_exact(s).value;
    CHECK(v >= 0.5 * variance_asymptotic(g).value);
  }
  // Caps wider than a hemisphere: the antipodal band enters with sign (-1)^{q ell}.
  for (auto s : {sphere(2, 3, 2.0, 41), sphere(2, 3, 2.0, 42), sphere(3, 3, 2.5, 41)}) {
    const double w = geometry::weight_spherical(s.field.d, s.R, 0.0) +
                     (s.field.ell % 2 ? -1.0 : 1.0) * geometry::weight_spherical(s.field.d, s.R, pi);
    const double pred = 6 * idq_value(s.field.d, 3) * w * std::pow(s.field.ell, -s.field.d);
    CHECK(variance_asymptotic(s).value == doctest::Approx(pred).epsilon(1e-12));
    CHECK(variance_exact(s).value / pred == doctest::Approx(1.0).epsilon(0.1));
  }
  const auto q2 = sphere(2, 2, 1.0, 120);
  CHECK(variance_exact(q2).value / variance_asymptotic(q2).value == doctest::Approx(1.0).epsilon(0.02));
  const auto q3 = sphere(3, 3, 1.0, 80);
  CHECK(variance_exact(q3).value / variance_asymptotic(q3).value == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("Hermite covariance identity") {
  CHECK(std::abs(hermite_covariance_identity_check(2, 0.0)) < 1e-10);
  CHECK(std::abs(hermite_covariance_identity_check(3, 1.0)) < 1e-10);
  CHECK(std::abs(hermite_covariance_identity_check(4, 0.6)) < 1e-8);
  for (int q = 1; q <= 8; ++q) {
    for (double rho : {-1.0, -0.9, -0.3, 0.0, 0.3, 0.9, 1.0}) CHECK(std::abs(hermite_covariance_identity_check(q, rho)) < 1e-8);
  }
  CHECK_THROWS_AS(hermite_covariance_identity_check(2, 1.5), InvalidArgument);
}
