#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "polyspec/errors.hpp"
#include "polyspec/quadrature.hpp"
#include "polyspec/walk.hpp"

using namespace polyspec;
using namespace polyspec::walk;
using std::numbers::pi;

namespace {

// rho^3_3 worked out by hand from psi^3_2(x) = 1/(2x): r^2/2 on (0,1], r(3-r)/4 on [1,3).
double rho33_exact(double r) {
  if (r <= 0.0 || r >= 3.0) return 0.0;
  return r <= 1.0 ? 0.5 * r * r : 0.25 * r * (3.0 - r);
}

double moment(WalkSpec spec, int power) {
  std::vector<double> pts = {0.0};
  for (int j = spec.n; j >= 0; j -= 2) pts.push_back(j);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto f = [&](double r) {
    if (r <= 0.0 || r >= spec.n) return 0.0;
    const double rho = spec.n == 2 ? rho2_closed(spec.d, r) : density_recursion(spec, r).value;
    return std::pow(r, power) * rho;
  };
  return quadrature::integrate_breakpoints(f, pts, quadrature::AdaptiveOptions{1e-9, 1e-9, 4000}).value;
}

}  // namespace

TEST_CASE("rho2_closed values") {
  CHECK(rho2_closed(3, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rho2_closed(2, 1.0) == doctest::Approx(2.0 / (pi * std::sqrt(3.0))).epsilon(1e-14));
  CHECK(rho2_closed(2, 2.5) == 0.0);
  for (double r : {0.1, 0.7, 1.3, 1.9}) CHECK(rho2_closed(3, r) == doctest::Approx(r / 2).epsilon(1e-14));
  // d = 4: (2 / (pi * 2)) r^2 sqrt(4 - r^2)
  for (double r : {0.3, 1.1, 1.8}) {
    CHECK(rho2_closed(4, r) == doctest::Approx(r * r * std::sqrt(4 - r * r) / pi).epsilon(1e-13));
  }
}

TEST_CASE("Kluyver integral against closed forms") {
  const auto k = density_kluyver({3, 2}, 1.0);
  CHECK(k.status == quadrature::QuadStatus::Converged);
  CHECK(std::abs(k.value - 0.5) < 1e-9);
  for (double r : {0.4, 1.0, 2.2}) {
    const auto v = density_kluyver({3, 3}, r);
    CHECK(std::abs(v.value - rho33_exact(r)) < 1e-9);
  }
  CHECK(density_kluyver({2, 4}, 5.0).value == 0.0);
}

TEST_CASE("Kluyver reports the planar three-step singularity as divergent") {
  const auto k = density_kluyver({2, 3}, 1.0);
  CHECK(k.status == quadrature::QuadStatus::Divergent);
  CHECK(near_singular_point({2, 3}, 1.0 + 1e-8, 1e-6));
  CHECK_FALSE(near_singular_point({2, 4}, 1.0, 1e-6));
}

TEST_CASE("recursion reproduces the hand-solved three-step density in d = 3") {
  CHECK(density_recursion({3, 3}, 0.5).value == doctest::Approx(0.125).epsilon(1e-10));
  for (double r : {0.05, 0.9, 1.0, 1.5, 2.7, 2.99}) {
    CHECK(std::abs(density_recursion({3, 3}, r).value - rho33_exact(r)) < 1e-11);
  }
}

TEST_CASE("recursion edge behaviour") {
  CHECK(density_recursion({2, 3}, 2.9).value > 0.0);
  const double near_end = density_recursion({4, 4}, 3.999).value;
  CHECK(near_end >= 0.0);
  CHECK(near_end < density_recursion({4, 4}, 3.9).value);
  CHECK(std::isinf(density_recursion({2, 3}, 1.0).value));
  CHECK(density_recursion({2, 3}, 1.0 + 1e-7).singular);
  CHECK_THROWS_AS(density_recursion({3, 9}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(density_recursion({3, 2}, 1.0), InvalidArgument);
}

TEST_CASE("Kluyver and recursion agree") {
  for (WalkSpec s : {WalkSpec{2, 4}, WalkSpec{3, 5}, WalkSpec{4, 4}, WalkSpec{5, 3}}) {
    for (int i = 0; i < 8; ++i) {
      const double r = s.n * (i + 0.5) / 8.0;
      const double a = density_kluyver(s, r).value;
      const double b = density_recursion(s, r).value;
      CHECK(std::abs(a - b) < 1e-9);
    }
  }
}

TEST_CASE("positivity on random interior points") {
  std::mt19937_64 rng(7);
  for (int d = 3; d <= 5; ++d) {
    for (int n = 3; n <= 5; ++n) {
      std::uniform_real_distribution<double> u(0.0, n);
      for (int i = 0; i < 10; ++i) {
        double r = u(rng);
        if (r == 0.0) r = 0.5;
        CHECK(density_recursion({d, n}, r).value > 0.0);
      }
    }
  }
}

TEST_CASE("normalization and second moment") {
  for (WalkSpec s : {WalkSpec{3, 2}, WalkSpec{4, 3}, WalkSpec{3, 4}, WalkSpec{5, 4}}) {
    CAPTURE(s.d);
    CAPTURE(s.n);
    CHECK(std::abs(moment(s, 0) - 1.0) < 1e-7);
    CHECK(std::abs(moment(s, 2) - s.n) < 1e-6);
  }
}

TEST_CASE("walk_cdf") {
  for (double r : {0.3, 1.0, 1.7}) CHECK(walk_cdf({3, 2}, r) == doctest::Approx(r * r / 4).epsilon(1e-12));
  // P(|X_3| <= r) in d = 3: r^3/6 on (0,1].
  CHECK(walk_cdf({3, 3}, 0.8) == doctest::Approx(0.8 * 0.8 * 0.8 / 6).epsilon(1e-9));
  CHECK(std::abs(walk_cdf({4, 4}, 4.0 - 1e-9) - 1.0) < 1e-8);
  CHECK(walk_cdf({2, 5}, 6.0) == 1.0);
}

TEST_CASE("classify_idq") {
  CHECK(classify_idq(2, 4) == Convergence::Divergent);
  for (int d = 2; d <= 6; ++d) CHECK(classify_idq(d, 2) == Convergence::Divergent);
  CHECK(classify_idq(3, 3) == Convergence::Conditional);
  CHECK(classify_idq(2, 3) == Convergence::Conditional);
  CHECK(classify_idq(5, 3) == Convergence::Absolute);
  CHECK(classify_idq(2, 5) == Convergence::Absolute);
  CHECK(classify_idq(4, 3) == Convergence::Absolute);
}

TEST_CASE("I^d_q routes") {
  const double quarter_pi = pi / 4;
  CHECK(idq(3, 3, IdqRoute::DirectIntegral).value.value() == doctest::Approx(quarter_pi).epsilon(1e-10));
  CHECK(idq(3, 3, IdqRoute::RecursionEndpoint).value.value() == doctest::Approx(quarter_pi).epsilon(1e-12));
  CHECK(idq(3, 3, IdqRoute::ClosedForm).value.value() == doctest::Approx(quarter_pi).epsilon(1e-14));

  const double i23 = 2.0 / (pi * std::sqrt(3.0));
  CHECK(idq(2, 3, IdqRoute::DirectIntegral).value.value() == doctest::Approx(i23).epsilon(1e-9));
  CHECK(idq(2, 3, IdqRoute::ClosedForm).value.value() == doctest::Approx(i23).epsilon(1e-14));

  // nu = 1: 12 (1!)^4 / 2! times 2/(pi sqrt 3)
  const double i43 = 6.0 * i23;
  CHECK(idq(4, 3, IdqRoute::DirectIntegral).value.value() == doctest::Approx(i43).epsilon(1e-10));
  CHECK(idq(4, 3, IdqRoute::RecursionEndpoint).value.value() == doctest::Approx(i43).epsilon(1e-12));

  const double i25 = std::sqrt(5.0) *
                     std::tgamma(1.0 / 15) * std::tgamma(2.0 / 15) * std::tgamma(4.0 / 15) * std::tgamma(8.0 / 15) /
                     (40.0 * std::pow(pi, 4));
  CHECK(idq(2, 5, IdqRoute::ClosedForm).value.value() == doctest::Approx(i25).epsilon(1e-13));
  CHECK(idq(2, 5, IdqRoute::DirectIntegral).value.value() == doctest::Approx(i25).epsilon(1e-9));
  CHECK(idq(2, 5, IdqRoute::RecursionEndpoint).value.value() == doctest::Approx(i25).epsilon(1e-9));

  for (auto [d, q] : {std::pair{3, 5}, std::pair{5, 4}, std::pair{6, 6}}) {
    const double a = idq(d, q, IdqRoute::DirectIntegral).value.value();
    const double b = idq(d, q, IdqRoute::RecursionEndpoint).value.value();
    CHECK(std::abs(a - b) < 1e-9 * std::abs(a));
  }

  const auto div = idq(2, 4, IdqRoute::DirectIntegral);
  CHECK(div.classification == Convergence::Divergent);
  CHECK_FALSE(div.value.has_value());
  CHECK_FALSE(div.error.has_value());
  CHECK_THROWS_AS(idq(3, 5, IdqRoute::ClosedForm), InvalidArgument);
}

TEST_CASE("partial integrals of I^2_4 grow logarithmically") {
  const double a = idq_partial_integral(2, 4, 100.0);
  const double b = idq_partial_integral(2, 4, 1000.0);
  const double c = idq_partial_integral(2, 4, 10000.0);
  // Increment per decade approaches (3 / (2 pi^2)) log 10 up to oscillation.
  const double slope = 3.0 / (2.0 * pi * pi) * std::log(10.0);
  CHECK(b - a == doctest::Approx(slope).epsilon(0.05));
  CHECK(c - b == doctest::Approx(slope).epsilon(0.05));
}

TEST_CASE("sample_walk") {
  const std::size_t n = 1000000;
  const auto radii = sample_walk({3, 2}, n, 42, 1);
  double m = 0, m2 = 0;
  for (double r : radii) {
    REQUIRE(r >= 0.0);
    REQUIRE(r <= 2.0);
    m += r * r;
    m2 += r * r * r * r;
  }
  m /= n;
  const double var = m2 / n - m * m;
  CHECK(std::abs(m - 2.0) < 4.0 * std::sqrt(var / n));

  auto sorted = radii;
  std::sort(sorted.begin(), sorted.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = sorted[i] * sorted[i] / 4.0;
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));

  const auto again = sample_walk({3, 2}, 100000, 42, 3);
  CHECK(std::equal(again.begin(), again.end(), radii.begin()));

  for (double r : sample_walk({5, 6}, 20000, 3)) {
    REQUIRE(r >= 0.0);
    REQUIRE(r <= 6.0);
  }
}

TEST_CASE("density_curve routes") {
  std::vector<double> grid;
  for (int i = 1; i < 40; ++i) grid.push_back(0.1 * i);
  const auto closed = density_curve({3, 2}, {0.5, 1.0, 2.5}, DensityRoute::ClosedForm2);
  CHECK(closed.values[1] == doctest::Approx(0.5));
  CHECK(closed.values[2] == 0.0);

  const auto rec = density_curve({2, 3}, {0.5, 1.0, 2.0}, DensityRoute::Recursion);
  CHECK(std::isinf(rec.values[1]));
  CHECK(rec.singular[1]);
  CHECK_FALSE(rec.singular[0]);

  const auto mc = density_curve({3, 4}, grid, DensityRoute::MonteCarlo, 1e-10, 42, 400000);
  const auto klu = density_curve({3, 4}, grid, DensityRoute::Kluyver);
  int outside = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(mc.values[i] - klu.values[i]) > 4.0 * mc.errors[i] + 0.01) ++outside;
  }
  CHECK(outside <= 1);
  const auto mc2 = density_curve({3, 4}, grid, DensityRoute::MonteCarlo, 1e-10, 42, 400000);
  CHECK(mc.values == mc2.values);
}
