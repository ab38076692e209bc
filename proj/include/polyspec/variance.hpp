#pragma once

#include "polyspec/geometry.hpp"

namespace polyspec::variance {

using geometry::Geometry;

/// Euclidean random wave with wavenumber lambda, or random hyperspherical
/// harmonic of degree ell on S^d.
struct FieldSpec {
  Geometry geometry = Geometry::Euclidean;
  int d = 2;
  double lambda = 1.0;  // Euclidean
  int ell = 1;          // Spherical
  double frequency() const { return geometry == Geometry::Euclidean ? lambda : static_cast<double>(ell); }
};

struct PolyspectrumSpec {
  FieldSpec field;
  int q = 2;
  double R = 1.0;
  geometry::BallSpec ball() const { return {field.geometry, field.d, R}; }
};

enum class Method { ExactQuadrature, Asymptotic, MonteCarlo };
enum class Regime { Q2, D2Q4, Generic, ParityZero };
const char* to_string(Method m);
const char* to_string(Regime r);

struct VarianceEstimate {
  PolyspectrumSpec spec;
  double value = 0.0;
  Method method = Method::ExactQuadrature;
  double error = 0.0;  // absolute error estimate
  double ci_lo = 0.0;  // value -/+ error, or a confidence interval
  double ci_hi = 0.0;
  Regime regime = Regime::Generic;
  bool converged = true;
};

/// Throws InvalidArgument for q < 2, bad frequencies or radii.
void validate(const PolyspectrumSpec& spec);

/// Q2 for q = 2; D2Q4 for d = 2, q = 4; ParityZero on the full sphere with q and ell odd.
Regime regime_of(const PolyspectrumSpec& spec);

struct ExactOptions {
  double rel_tol = 1e-10;
  std::size_t max_intervals = 400000;
  /// Return 0 for ParityZero without integrating.
  bool parity_shortcut = true;
};

/// q! int_0^{2R} j_d(lambda r)^q W_{d,R}(r) r^{d-1} dr.
VarianceEstimate variance_exact_euclidean(const PolyspectrumSpec& spec, const ExactOptions& opts = {});

/// q! int_0^pi G_{d,ell}(cos r)^q sin(r)^{d-1} W~_{d,R}(r) dr.
VarianceEstimate variance_exact_spherical(const PolyspectrumSpec& spec, const ExactOptions& opts = {});

VarianceEstimate variance_exact(const PolyspectrumSpec& spec, const ExactOptions& opts = {});

/// Leading-order prediction, f = lambda or ell:
///   Generic  q! I^d_q W* f^{-d}
///   Q2       2 (nu!)^2 4^nu / pi * int W * f^{1-d}   (f = L = ell + (d-1)/2 on S^d)
///   D2Q4     4! * 3 / (2 pi^2) * W* log f / f^2
///   ParityZero  0
/// W* = W(0) in R^d and W~(0) + (-1)^{q ell} W~(pi) on S^d; the second term
/// is nonzero only for caps with R > pi/2 (2 omega_{d-1} omega_d at R = pi).
VarianceEstimate variance_asymptotic(const PolyspectrumSpec& spec);

/// I^d_q, closed form where known and the direct integral otherwise. Cached.
double idq_value(int d, int q);

/// E[H_q(X) H_q(Y)] - q! rho^q for unit Gaussians with correlation rho,
/// by tensor Gauss-Hermite quadrature.
double hermite_covariance_identity_check(int q, double rho);

}  // namespace polyspec::variance
