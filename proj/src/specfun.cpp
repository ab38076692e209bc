#include "polyspec/specfun.hpp"

#include <math.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "polyspec/errors.hpp"

namespace polyspec::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite_nonnegative(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0) {
    throw InvalidArgument(std::string(what) + ": argument must be finite and >= 0");
  }
}

// Ascending series, used for x <= 2 where every term is smaller than the
// previous one and no cancellation occurs.
double bessel_series(double nu, double x) {
  const double y = 0.25 * x * x;
  double term = std::exp(nu * std::log(0.5 * x) - log_gamma(nu + 1.0));
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -y / (k * (k + nu));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Hankel expansion J = sqrt(2/(pi x)) (P cos chi - Q sin chi). Terminates for
// half-integer orders.
double bessel_hankel(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;  // a_k(nu) / x^k
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(a);
    if (mag == 0.0) break;
    if (mag > last) break;  // asymptotic series started to diverge
    last = mag;
    switch (k % 4) {
      case 1: q += a; break;
      case 2: p -= a; break;
      case 3: q -= a; break;
      case 0: p += a; break;
    }
    if (mag < 1e-17) break;
  }
  const double phase = (0.5 * nu + 0.25) * kPi;
  const double c = std::cos(x), s = std::sin(x);
  const double cp = std::cos(phase), sp = std::sin(phase);
  const double cos_chi = c * cp + s * sp;
  const double sin_chi = s * cp - c * sp;
  return std::sqrt(2.0 / (kPi * x)) * (p * cos_chi - q * sin_chi);
}

int miller_start(double nu, double x) {
  const double top = std::max(nu, x);
  int n = static_cast<int>(top) + 30 + static_cast<int>(6.0 * std::cbrt(x + 1.0));
  return n + (n % 2);
}

// Miller's backward recurrence for integer order n, normalized with
// J_0 + 2 sum_k J_{2k} = 1.
double bessel_miller_integer(int n, double x) {
  const int top = miller_start(n, x);
  double next = 0.0;   // J_{k+1}
  double cur = 1e-30;  // J_k
  double norm = 0.0;
  double result = 0.0;
  for (int k = top; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (k - 1 == n) result = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      result *= 1e-250;
    }
  }
  norm += cur;  // J_0
  if (n == top) result = 0.0;
  return result / norm;
}

// Spherical Bessel j_m via backward recurrence, normalized against the
// pair (j_0, j_{-1}) = (sin x / x, cos x / x), which never vanish together.
double spherical_bessel_miller(int m, double x) {
  const int top = miller_start(m + 0.5, x);
  double next = 0.0;
  double cur = 1e-30;
  double result = 0.0;
  for (int k = top; k >= 1; --k) {
    const double prev = ((2.0 * k + 1.0) / x) * cur - next;
    next = cur;
    cur = prev;
    if (k - 1 == m) result = cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      result *= 1e-250;
    }
  }
  const double jm1 = cur / x - next;  // recurrence at k = 0
  const double big = std::max(std::abs(cur), std::abs(jm1));
  const double j0 = cur / big, jm = jm1 / big;
  const double scale = (j0 * std::sin(x) + jm * std::cos(x)) / (x * (j0 * j0 + jm * jm));
  return (result / big) * scale;
}

double bessel_j_impl(BesselOrder order, double x) {
  const double nu = order.value();
  if (x == 0.0) return order.twice() == 0 ? 1.0 : 0.0;
  if (x <= 2.0) return bessel_series(nu, x);
  if (x >= 25.0 + nu * nu) return bessel_hankel(nu, x);
  if (order.is_integer()) return bessel_miller_integer(order.twice() / 2, x);
  const int m = (order.twice() - 1) / 2;
  return std::sqrt(2.0 * x / kPi) * spherical_bessel_miller(m, x);
}

}  // namespace

BesselOrder BesselOrder::from_dimension(int d) {
  if (d < 2) throw InvalidArgument("dimension must be >= 2");
  return BesselOrder(d - 2);
}

BesselOrder BesselOrder::from_twice(int twice_nu) {
  if (twice_nu < 0) throw InvalidArgument("Bessel order must be >= 0");
  return BesselOrder(twice_nu);
}

BesselOrder BesselOrder::from_value(double nu) {
  const double twice = 2.0 * nu;
  if (!(nu >= 0.0) || twice != std::round(twice) || twice > 1e6) {
    throw InvalidArgument("Bessel order must be a non-negative integer or half-integer");
  }
  return BesselOrder(static_cast<int>(twice));
}

double bessel_j(BesselOrder nu, double x) {
  require_finite_nonnegative(x, "bessel_j");
  return bessel_j_impl(nu, x);
}

double bessel_j(double nu, double x) { return bessel_j(BesselOrder::from_value(nu), x); }

double jd(int d, double r) {
  const auto order = BesselOrder::from_dimension(d);
  require_finite_nonnegative(r, "jd");
  const double nu = order.value();
  if (r <= 2.0) {
    // nu! sum_k (-r^2/4)^k / (k! (k+nu)!)
    const double y = -0.25 * r * r;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 100; ++k) {
      term *= y / (k * (k + nu));
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  const double log_prefactor = log_gamma(nu + 1.0) + nu * std::log(2.0 / r);
  return std::exp(log_prefactor) * bessel_j_impl(order, r);
}

double jd_envelope_constant(int d) {
  const double nu = BesselOrder::from_dimension(d).value();
  return std::exp(log_gamma(nu + 1.0) + nu * std::log(2.0)) * std::sqrt(2.0 / kPi);
}

CosineEnvelope jd_asymptotic(int d, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("jd_asymptotic: r must be > 0");
  const double amplitude = jd_envelope_constant(d) * std::pow(std::max(r, 1.0), -0.5 * (d - 1));
  return {amplitude, 0.25 * (d - 1) * kPi};
}

double hermite(int q, double t) {
  if (q < 0) throw InvalidArgument("hermite: degree must be >= 0");
  if (q == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int n = 1; n < q; ++n) {
    const double next = t * cur - n * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double gegenbauer(GegenbauerSpec spec, double t) {
  if (spec.d < 2 || spec.ell < 0) throw InvalidArgument("gegenbauer: need d >= 2, ell >= 0");
  if (!(std::abs(t) <= 1.0)) throw InvalidArgument("gegenbauer: |t| must be <= 1");
  if (spec.ell == 0) return 1.0;
  // Three-term recurrence for C^lambda_n(t) / C^lambda_n(1), lambda = nu + 1/2.
  const double lambda = 0.5 * (spec.d - 1);
  double prev = 1.0;
  double cur = t;
  for (int n = 1; n < spec.ell; ++n) {
    const double next = (2.0 * (n + lambda) * t * cur - n * prev) / (n + 2.0 * lambda);
    prev = cur;
    cur = next;
  }
  return cur;
}

double hilb_main_term(GegenbauerSpec spec, double theta) {
  if (spec.d < 2 || spec.ell < 0) throw InvalidArgument("hilb_main_term: need d >= 2, ell >= 0");
  if (!(theta > 0.0 && theta < kPi)) throw InvalidArgument("hilb_main_term: theta must lie in (0, pi)");
  const double nu = spec.nu();
  const double L = spec.L();
  const double ell = spec.ell;
  const double log_prefactor = nu * std::log(2.0) - log_binomial(ell + nu, ell) +
                               log_gamma(ell + 0.5 * spec.d) - nu * std::log(L) - log_gamma(ell + 1.0);
  const double s = std::sin(theta);
  return std::exp(log_prefactor - nu * std::log(s)) * std::sqrt(theta / s) *
         bessel_j(BesselOrder::from_dimension(spec.d), L * theta);
}

std::uint64_t eigenspace_dim(int d, int ell) {
  if (d < 2 || ell < 1) throw InvalidArgument("eigenspace_dim: need d >= 2, ell >= 1");
  // binom(ell + d - 2, ell - 1) = binom(n, k), built as binom(n-k+i, i).
  const std::uint64_t n = static_cast<std::uint64_t>(ell) + d - 2;
  const std::uint64_t k = std::min<std::uint64_t>(ell - 1, d - 1);
  unsigned __int128 b = 1;
  const unsigned __int128 limit = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t i = 1; i <= k; ++i) {
    b = b * (n - k + i) / i;
    if (b > limit) throw std::overflow_error("eigenspace_dim: result exceeds 64 bits");
  }
  const unsigned __int128 eta = b * (2u * static_cast<unsigned>(ell) + d - 1) / ell;
  if (eta > limit) throw std::overflow_error("eigenspace_dim: result exceeds 64 bits");
  return static_cast<std::uint64_t>(eta);
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw InvalidArgument("log_gamma: argument must be > 0");
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_binomial(double a, double b) {
  if (!(b >= 0.0) || !(a >= b)) throw InvalidArgument("log_binomial: need a >= b >= 0");
  return log_gamma(a + 1.0) - log_gamma(b + 1.0) - log_gamma(a - b + 1.0);
}

}  // namespace polyspec::specfun
