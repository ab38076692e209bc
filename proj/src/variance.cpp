#include "polyspec/variance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "piecewise_chebyshev.hpp"
#include "polyspec/errors.hpp"
#include "polyspec/quadrature.hpp"
#include "polyspec/specfun.hpp"
#include "polyspec/walk.hpp"

namespace polyspec::variance {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int q) { return std::tgamma(q + 1.0); }

// W~_{d,R} on [0, pi] as a graded Chebyshev table, one per (d, R).
std::shared_ptr<const detail::PiecewiseChebyshev> spherical_weight_table(int d, double R) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::shared_ptr<const detail::PiecewiseChebyshev>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{d, R}];
  if (!slot) {
    std::vector<double> breaks = {0.0};
    for (double b : {2.0 * R, 2.0 * kPi - 2.0 * R}) {
      if (b > 0.0 && b < kPi) breaks.push_back(b);
    }
    breaks.push_back(kPi);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    slot = std::make_shared<const detail::PiecewiseChebyshev>(
        [d, R](double r) { return geometry::weight_spherical(d, R, r); }, breaks, detail::PiecewiseChebyshev::Options{});
  }
  return slot;
}

double weight_at_zero(const PolyspectrumSpec& spec) {
  return spec.field.geometry == Geometry::Euclidean ? geometry::weight_euclidean(spec.field.d, spec.R, 0.0)
                                                    : geometry::weight_spherical(spec.field.d, spec.R, 0.0);
}

// Weight seen by the two concentration points of the covariance. On S^d the
// kernel also peaks at r = pi with sign (-1)^{q ell}; W~(pi) > 0 only for R > pi/2.
double peak_weight(const PolyspectrumSpec& spec) {
  if (spec.field.geometry == Geometry::Euclidean) return weight_at_zero(spec);
  const double sign = (spec.q % 2 == 1 && spec.field.ell % 2 == 1) ? -1.0 : 1.0;
  const int d = spec.field.d;
  return geometry::weight_spherical(d, spec.R, 0.0) + sign * geometry::weight_spherical(d, spec.R, kPi);
}

VarianceEstimate finish(const PolyspectrumSpec& spec, const quadrature::QuadResult& res, double scale) {
  VarianceEstimate out;
  out.spec = spec;
  out.method = Method::ExactQuadrature;
  out.regime = regime_of(spec);
  out.value = std::max(0.0, scale * res.value);
  out.error = scale * res.abs_error_estimate;
  out.ci_lo = std::max(0.0, out.value - out.error);
  out.ci_hi = out.value + out.error;
  out.converged = res.converged;
  return out;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::ExactQuadrature: return "exact";
    case Method::Asymptotic: return "asymptotic";
    case Method::MonteCarlo: return "mc";
  }
  return "?";
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Q2: return "Q2";
    case Regime::D2Q4: return "D2Q4";
    case Regime::Generic: return "Generic";
    case Regime::ParityZero: return "ParityZero";
  }
  return "?";
}

void validate(const PolyspectrumSpec& spec) {
  if (spec.q < 2) throw InvalidArgument("polyspectrum order q must be >= 2");
  geometry::validate(spec.ball());
  if (spec.field.geometry == Geometry::Euclidean) {
    if (!(spec.field.lambda > 0.0) || !std::isfinite(spec.field.lambda)) {
      throw InvalidArgument("Euclidean wavenumber lambda must be finite and > 0");
    }
  } else if (spec.field.ell < 1) {
    throw InvalidArgument("spherical degree ell must be >= 1");
  }
}

Regime regime_of(const PolyspectrumSpec& spec) {
  if (spec.field.geometry == Geometry::Spherical && spec.R == kPi && spec.q % 2 == 1 && spec.field.ell % 2 == 1) {
    return Regime::ParityZero;
  }
  if (spec.q == 2) return Regime::Q2;
  if (spec.field.d == 2 && spec.q == 4) return Regime::D2Q4;
  return Regime::Generic;
}

VarianceEstimate variance_exact_euclidean(const PolyspectrumSpec& spec, const ExactOptions& opts) {
  validate(spec);
  if (spec.field.geometry != Geometry::Euclidean) throw InvalidArgument("variance_exact_euclidean: spherical spec");
  const int d = spec.field.d, q = spec.q;
  const double lambda = spec.field.lambda, R = spec.R;
  auto f = [=](double r) {
    return std::pow(specfun::jd(d, lambda * r), q) * geometry::weight_euclidean(d, R, r) * std::pow(r, d - 1);
  };
  const auto res = quadrature::integrate_panels(f, 0.0, 2.0 * R, std::min(0.25 * kPi / lambda, 0.125 * R),
                                                quadrature::AdaptiveOptions{0.0, opts.rel_tol, opts.max_intervals});
  return finish(spec, res, factorial(q));
}

VarianceEstimate variance_exact_spherical(const PolyspectrumSpec& spec, const ExactOptions& opts) {
  validate(spec);
  if (spec.field.geometry != Geometry::Spherical) throw InvalidArgument("variance_exact_spherical: Euclidean spec");
  const int d = spec.field.d, q = spec.q;
  const specfun::GegenbauerSpec g{d, spec.field.ell};
  if (opts.parity_shortcut && regime_of(spec) == Regime::ParityZero) {
    VarianceEstimate out;
    out.spec = spec;
    out.regime = Regime::ParityZero;
    return out;
  }
  const auto table = spherical_weight_table(d, spec.R);
  auto f = [&](double r) {
    return std::pow(specfun::gegenbauer(g, std::cos(r)), q) * std::pow(std::sin(r), d - 1) * (*table)(r);
  };
  // Exact cancellation is what the parity case is about: no relative target.
  const bool parity = regime_of(spec) == Regime::ParityZero;
  const double abs_tol = parity ? 1e-15 * geometry::omega(d - 1) * geometry::omega(d) : 0.0;
  const auto res = quadrature::integrate_panels(f, 0.0, kPi, 0.25 * kPi / g.L(),
                                                quadrature::AdaptiveOptions{abs_tol, opts.rel_tol, opts.max_intervals});
  auto out = finish(spec, res, factorial(q));
  if (parity) out.value = std::abs(factorial(q) * res.value);
  return out;
}

VarianceEstimate variance_exact(const PolyspectrumSpec& spec, const ExactOptions& opts) {
  return spec.field.geometry == Geometry::Euclidean ? variance_exact_euclidean(spec, opts)
                                                    : variance_exact_spherical(spec, opts);
}

double idq_value(int d, int q) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({d, q});
    if (it != cache.end()) return it->second;
  }
  if (walk::classify_idq(d, q) == walk::Convergence::Divergent) {
    throw InvalidArgument("idq_value: I^d_q diverges for d=" + std::to_string(d) + ", q=" + std::to_string(q));
  }
  const auto route = walk::has_closed_form(d, q) ? walk::IdqRoute::ClosedForm : walk::IdqRoute::DirectIntegral;
  const double v = walk::idq(d, q, route).value.value();
  std::lock_guard<std::mutex> lock(mu);
  cache[{d, q}] = v;
  return v;
}

VarianceEstimate variance_asymptotic(const PolyspectrumSpec& spec) {
  validate(spec);
  VarianceEstimate out;
  out.spec = spec;
  out.method = Method::Asymptotic;
  out.regime = regime_of(spec);
  const int d = spec.field.d, q = spec.q;
  const bool full_sphere = spec.field.geometry == Geometry::Spherical && spec.R == kPi;
  const double f = spec.field.frequency();
  const double nu = 0.5 * d - 1.0;
  switch (out.regime) {
    case Regime::ParityZero:
      out.value = 0.0;
      break;
    case Regime::Generic: {
      out.value = factorial(q) * idq_value(d, q) * peak_weight(spec) * std::pow(f, -d);
      break;
    }
    case Regime::Q2: {
      double mass = 0.0, freq = f;
      if (spec.field.geometry == Geometry::Euclidean) {
        mass = quadrature::integrate_adaptive([&](double r) { return geometry::weight_euclidean(d, spec.R, r); }, 0.0,
                                              2.0 * spec.R, quadrature::AdaptiveOptions{0.0, 1e-12, 2000})
                   .value;
      } else {
        freq = specfun::GegenbauerSpec{d, spec.field.ell}.L();
        if (full_sphere) {
          mass = kPi * geometry::omega(d - 1) * geometry::omega(d);
        } else {
          const auto table = spherical_weight_table(d, spec.R);
          const double end = std::min(2.0 * spec.R, kPi);
          mass = quadrature::integrate_breakpoints([&](double r) { return (*table)(r); },
                                                   std::vector<double>{0.0, end, kPi},
                                                   quadrature::AdaptiveOptions{0.0, 1e-12, 2000})
                     .value;
        }
      }
      const double envelope = std::exp(2.0 * specfun::log_gamma(nu + 1.0) + nu * std::log(4.0)) / kPi;
      out.value = factorial(q) * envelope * mass * std::pow(freq, 1.0 - d);
      break;
    }
    case Regime::D2Q4: {
      out.value = factorial(4) * 3.0 / (2.0 * kPi * kPi) * peak_weight(spec) * std::log(f) / (f * f);
      break;
    }
  }
  out.ci_lo = out.ci_hi = out.value;
  return out;
}

double hermite_covariance_identity_check(int q, double rho) {
  if (q < 0) throw InvalidArgument("hermite_covariance_identity_check: q must be >= 0");
  if (!(std::abs(rho) <= 1.0)) throw InvalidArgument("hermite_covariance_identity_check: |rho| must be <= 1");
  // Exact for the degree-2q polynomial in each variable.
  const auto rule = quadrature::gauss_hermite_probabilists(q + 2);
  const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  long double total = 0.0L;
  for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
    const double x = rule->nodes[i];
    const double hx = specfun::hermite(q, x);
    long double inner = 0.0L;
    for (std::size_t j = 0; j < rule->nodes.size(); ++j) {
      inner += static_cast<long double>(rule->weights[j]) * specfun::hermite(q, rho * x + s * rule->nodes[j]);
    }
    total += static_cast<long double>(rule->weights[i]) * hx * inner;
  }
  return static_cast<double>(total - static_cast<long double>(factorial(q)) * std::pow(static_cast<long double>(rho), q));
}

}  // namespace polyspec::variance
