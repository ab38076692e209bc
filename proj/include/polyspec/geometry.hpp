#pragma once

#include <functional>

namespace polyspec::geometry {

enum class Geometry { Euclidean, Spherical };
const char* to_string(Geometry g);

/// Ball of radius R in R^d, or geodesic cap of radius R in S^d (R <= pi).
struct BallSpec {
  Geometry geometry = Geometry::Euclidean;
  int d = 2;
  double R = 1.0;
};

/// Surface measure of S^d: 2 pi^{(d+1)/2} / Gamma((d+1)/2).
double omega(int d);

/// Lebesgue measure of a radius-R ball in R^d.
double ball_volume(int d, double R);

/// sigma_d of a geodesic cap of radius R in S^d: omega_{d-1} int_0^R sin^{d-1}.
double cap_volume(int d, double R);

/// Measure of the ball or cap.
double domain_volume(const BallSpec& spec);

/// omega_{d-1} |B(x,R) cap B(y,R)| for |x - y| = r. Zero for r >= 2R.
double weight_euclidean(int d, double R, double r);

/// omega_{d-1} sigma_d(B(x,R) cap B(y,R)) for geodesic distance r in [0, pi].
double weight_spherical(int d, double R, double r);

struct WeightFunction {
  BallSpec spec;
  std::function<double(double)> eval;
  double support_end = 0.0;  // 2R (Euclidean) or pi (spherical)
};

WeightFunction make_weight(const BallSpec& spec);

/// W'(r) by a Richardson-extrapolated central difference, r strictly inside the support.
double weight_derivative(const WeightFunction& w, double r);

void validate(const BallSpec& spec);

}  // namespace polyspec::geometry
