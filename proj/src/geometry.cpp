#include "polyspec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "polyspec/errors.hpp"
#include "polyspec/quadrature.hpp"
#include "polyspec/specfun.hpp"

namespace polyspec::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(int d, const char* what) {
  if (d < 2) throw InvalidArgument(std::string(what) + ": dimension must be >= 2");
}

// int_a^b sin^{k}(t) dt
double sine_power_integral(int k, double a, double b) {
  if (!(b > a)) return 0.0;
  if (k == 0) return b - a;
  if (k == 1) return std::cos(a) - std::cos(b);
  return quadrature::integrate_adaptive([k](double t) { return std::pow(std::sin(t), k); }, a, b,
                                        quadrature::AdaptiveOptions{1e-15, 1e-14, 2000})
      .value;
}

// Fraction of S^{d-1} with <u, e> >= c.
double upper_fraction(int d, double c) {
  if (c <= -1.0) return 1.0;
  if (c >= 1.0) return 0.0;
  const double a = 0.5 * (d - 1);
  return boost::math::ibeta(a, a, 0.5 * (1.0 - c));
}

}  // namespace

const char* to_string(Geometry g) { return g == Geometry::Euclidean ? "euclidean" : "spherical"; }

double omega(int d) {
  if (d < 0) throw InvalidArgument("omega: d must be >= 0");
  return 2.0 * std::exp(0.5 * (d + 1) * std::log(kPi) - specfun::log_gamma(0.5 * (d + 1)));
}

double ball_volume(int d, double R) {
  require_dim(d, "ball_volume");
  if (!(R > 0.0)) throw InvalidArgument("ball_volume: R must be > 0");
  return omega(d - 1) * std::pow(R, d) / d;
}

double cap_volume(int d, double R) {
  require_dim(d, "cap_volume");
  if (!(R > 0.0 && R <= kPi)) throw InvalidArgument("cap_volume: R must be in (0, pi]");
  if (R == kPi) return omega(d);
  // sigma_d(cap) = omega_d * P(angle <= R) with a Beta-distributed (1 - cos)/2.
  const double a = 0.5 * d;
  const double s = std::sin(0.5 * R);
  return omega(d) * boost::math::ibeta(a, a, s * s);
}

void validate(const BallSpec& spec) {
  require_dim(spec.d, "BallSpec");
  if (spec.geometry == Geometry::Euclidean) {
    if (!(spec.R > 0.0) || !std::isfinite(spec.R)) throw InvalidArgument("BallSpec: Euclidean R must be > 0");
  } else if (!(spec.R > 0.0 && spec.R <= kPi)) {
    throw InvalidArgument("BallSpec: spherical R must be in (0, pi]");
  }
}

double domain_volume(const BallSpec& spec) {
  validate(spec);
  return spec.geometry == Geometry::Euclidean ? ball_volume(spec.d, spec.R) : cap_volume(spec.d, spec.R);
}

double weight_euclidean(int d, double R, double r) {
  require_dim(d, "weight_euclidean");
  if (!(R > 0.0)) throw InvalidArgument("weight_euclidean: R must be > 0");
  r = std::abs(r);
  if (r >= 2.0 * R) return 0.0;
  // The lens is two caps of height R - r/2; each cap is
  // |B_R| / 2 * I_{1 - (r/2R)^2}((d+1)/2, 1/2).
  const double x = r / (2.0 * R);
  const double lens = ball_volume(d, R) * boost::math::ibetac(0.5, 0.5 * (d + 1), x * x);
  return omega(d - 1) * lens;
}

double weight_spherical(int d, double R, double r) {
  require_dim(d, "weight_spherical");
  if (!(R > 0.0 && R <= kPi)) throw InvalidArgument("weight_spherical: R must be in (0, pi]");
  if (!(r >= 0.0 && r <= kPi)) throw InvalidArgument("weight_spherical: r must be in [0, pi]");
  const double od1 = omega(d - 1);
  if (R == kPi) return od1 * omega(d);
  if (r == 0.0) return od1 * cap_volume(d, R);
  if (r == kPi) {
    // Antipodal centres: the band pi - R <= theta <= R.
    return od1 * od1 * sine_power_integral(d - 1, kPi - R, R);
  }
  if (r >= 2.0 * R) return 0.0;

  // Points at angle theta from x, with direction u in S^{d-1}; they lie in the
  // second cap iff <u, e> >= c(theta).
  const double cR = std::cos(R), cr = std::cos(r), sr = std::sin(r);
  auto f = [&](double theta) {
    const double st = std::sin(theta);
    if (st <= 0.0) return 0.0;
    const double c = (cR - std::cos(theta) * cr) / (st * sr);
    return std::pow(st, d - 1) * upper_fraction(d, c);
  };
  std::vector<double> pts = {0.0, R};
  for (double b : {std::abs(r - R), r + R, R - r, 2.0 * kPi - R - r}) {
    if (b > 0.0 && b < R) pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const auto res = quadrature::integrate_breakpoints(f, pts, quadrature::AdaptiveOptions{1e-15, 1e-13, 4000});
  return od1 * od1 * res.value;
}

WeightFunction make_weight(const BallSpec& spec) {
  validate(spec);
  WeightFunction w;
  w.spec = spec;
  const int d = spec.d;
  const double R = spec.R;
  if (spec.geometry == Geometry::Euclidean) {
    w.eval = [d, R](double r) { return weight_euclidean(d, R, r); };
    w.support_end = 2.0 * R;
  } else {
    w.eval = [d, R](double r) { return weight_spherical(d, R, std::clamp(r, 0.0, kPi)); };
    w.support_end = kPi;
  }
  return w;
}

double weight_derivative(const WeightFunction& w, double r) {
  if (!(r > 0.0 && r < w.support_end)) throw InvalidArgument("weight_derivative: r must be inside the support");
  const double h = std::min({1e-5 * w.support_end, 0.5 * r, 0.5 * (w.support_end - r)});
  auto central = [&](double step) { return (w.eval(r + step) - w.eval(r - step)) / (2.0 * step); };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace polyspec::geometry
