#pragma once

#include <cstdint>

namespace polyspec::specfun {

/// Bessel order nu restricted to integers and half-integers, stored as 2*nu.
///
/// Every ambient dimension d >= 2 maps to nu = d/2 - 1, which is the only
/// family of orders this library needs.
class BesselOrder {
 public:
  static BesselOrder from_dimension(int d);
  static BesselOrder from_twice(int twice_nu);
  /// Throws InvalidArgument unless nu >= 0 is an integer or half-integer.
  static BesselOrder from_value(double nu);

  double value() const { return 0.5 * twice_; }
  int twice() const { return twice_; }
  bool is_integer() const { return twice_ % 2 == 0; }

 private:
  explicit BesselOrder(int twice) : twice_(twice) {}
  int twice_;
};

/// Bessel function of the first kind J_nu(x), x >= 0.
double bessel_j(BesselOrder nu, double x);
double bessel_j(double nu, double x);

/// Normalized kernel j_d(r) = nu! 2^nu r^-nu J_nu(r), nu = d/2 - 1, j_d(0) = 1.
/// This is the covariance of Berry's random wave at unit frequency.
double jd(int d, double r);

/// Leading cosine envelope of j_d: j_d(r) ~ amplitude * cos(r - phase_shift).
struct CosineEnvelope {
  double amplitude;
  double phase_shift;
};

/// amplitude = C_d (max(r,1))^{-(d-1)/2} with C_d = nu! 2^nu sqrt(2/pi),
/// phase_shift = (d-1) pi / 4. The remainder is O(r^{1-d/2}).
CosineEnvelope jd_asymptotic(int d, double r);

/// C_d of the envelope above.
double jd_envelope_constant(int d);

/// Probabilists' Hermite polynomial He_q(t).
double hermite(int q, double t);

struct GegenbauerSpec {
  int d;
  int ell;

  double nu() const { return 0.5 * d - 1.0; }
  /// ell + (d-1)/2, the effective frequency in Hilb's formula.
  double L() const { return ell + 0.5 * (d - 1); }
};

/// Normalized Gegenbauer polynomial G_{d,l}(t) = P_l^{(nu,nu)}(t) / P_l^{(nu,nu)}(1),
/// so that G_{d,l}(1) = 1. Requires |t| <= 1.
double gegenbauer(GegenbauerSpec spec, double t);

/// Bessel main term of Hilb's approximation to G_{d,l}(cos theta),
/// theta in (0, pi).
double hilb_main_term(GegenbauerSpec spec, double theta);

/// Dimension of the degree-l eigenspace of the Laplacian on S^d.
/// Throws std::overflow_error if the result does not fit in 64 bits.
std::uint64_t eigenspace_dim(int d, int ell);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

/// log of binom(a, b) = Gamma(a+1) / (Gamma(b+1) Gamma(a-b+1)) for real a >= b >= 0.
double log_binomial(double a, double b);

}  // namespace polyspec::specfun
