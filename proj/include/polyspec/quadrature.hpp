#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "polyspec/specfun.hpp"

namespace polyspec::quadrature {

using RealFunction = std::function<double(double)>;

enum class QuadStatus { Converged, NotConverged, Divergent };

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t n_evals = 0;
  bool converged = false;
  QuadStatus status = QuadStatus::NotConverged;
};

struct AdaptiveOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_intervals = 20000;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature on [a, b].
///
/// The rule never evaluates the endpoints, so integrable power or log
/// singularities at a or b are fine. Converged means the summed error
/// estimate is below max(abs_tol, rel_tol * |value|).
QuadResult integrate_adaptive(const RealFunction& f, double a, double b, double tol);
QuadResult integrate_adaptive(const RealFunction& f, double a, double b, const AdaptiveOptions& opts);

/// Same engine, starting from the partition given by `points` (sorted,
/// at least two entries). Interior singularities belong in `points`.
QuadResult integrate_breakpoints(const RealFunction& f, std::span<const double> points,
                                 const AdaptiveOptions& opts);

/// Starts from equal panels no wider than max_panel_width.
QuadResult integrate_panels(const RealFunction& f, double a, double b, double max_panel_width,
                            const AdaptiveOptions& opts);

/// Large-t model of an oscillatory integrand:
///   g(t) ~ Re sum_j exp(i w_j t) t^power sum_k c_jk t^{-k}.
struct OscillatoryExpansion {
  struct Component {
    double frequency = 0.0;
    std::vector<std::complex<double>> coeffs;
  };
  double power = 0.0;
  std::vector<Component> components;
  /// Smallest t from which the truncated model is trusted.
  double valid_from = 0.0;

  std::complex<double> evaluate(double t) const;
};

/// Product of two expansions, truncated to `order` inverse powers.
OscillatoryExpansion multiply(const OscillatoryExpansion& a, const OscillatoryExpansion& b, int order);

/// Asymptotic expansion of j_d(c t) in t (Hankel series, `order` terms).
OscillatoryExpansion jd_expansion(int d, double c, int order);

struct OscillatoryIntegrand {
  RealFunction evaluator;
  /// alpha in |g(t)| ~ t^{-alpha}.
  double decay_exponent = 0.0;
  /// Asymptotic spacing of sign changes (pi for powers of j_d).
  double phase_period = 0.0;
  /// Partition nodes sit at phase_offset + k * phase_period.
  double phase_offset = 0.0;
  /// First node used for the accelerated tail; earlier part is integrated directly.
  double asymptotic_start = 30.0;
  /// Forbids the plain-truncation fast path (conditionally convergent inputs).
  bool require_acceleration = false;
  /// When present, the tail beyond valid_from is integrated from this model.
  std::optional<OscillatoryExpansion> expansion;
};

/// Improper integral of g over [a, inf).
///
/// Without an expansion: partial integrals between consecutive nodes, summed
/// with the Levin u-transform (order <= 12) with iterated Aitken as fallback,
/// or plain truncation with an analytic tail bound when decay_exponent > 1.
/// With an expansion: direct quadrature up to valid_from plus term-by-term
/// tail integrals of the model. Divergent is reported when the envelope does
/// not decay or the averaged partial integrals keep drifting logarithmically.
QuadResult integrate_oscillatory_tail(const OscillatoryIntegrand& g, double a, double tol);

/// integral_T^inf t^s exp(i w t) dt for w != 0 and s < 0 (contour rotation).
std::complex<double> fourier_power_tail(double w, double s, double T);

/// Levin u-transform estimate from partial sums s[n..n+k] with terms a[...].
double levin_u(std::span<const double> partial_sums, std::span<const double> terms, std::size_t n,
               std::size_t k, double beta);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kMaxGaussNodes = 2048;

/// m-point Gauss rule for the weight (1 - s^2)^{nu - 1/2} on (-1, 1).
/// Rules are cached; the returned object is immutable.
std::shared_ptr<const QuadratureRule> gauss_jacobi_symmetric(specfun::BesselOrder nu, int m);

/// Gauss-Legendre on [a, b].
QuadratureRule gauss_legendre(int m, double a, double b);

/// m-point Gauss rule for the standard normal density (weights sum to 1).
std::shared_ptr<const QuadratureRule> gauss_hermite_probabilists(int m);

}  // namespace polyspec::quadrature
