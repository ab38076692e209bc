#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyspec/quadrature.hpp"

namespace polyspec::walk {

/// Uniform random flight: n i.i.d. unit steps uniform on S^{d-1}.
struct WalkSpec {
  int d = 2;
  int n = 2;
};

enum class DensityRoute { ClosedForm2, Kluyver, Recursion, MonteCarlo };
const char* to_string(DensityRoute route);

struct DensityCurve {
  WalkSpec spec;
  std::vector<double> grid;
  std::vector<double> values;  // +inf at a registered singular point
  std::vector<double> errors;
  std::vector<bool> singular;
  DensityRoute route = DensityRoute::ClosedForm2;
};

/// rho^d_2(r) = 2 / (pi binom(2nu, nu)) r^{2nu} (4 - r^2)^{nu - 1/2} on (0, 2), 0 elsewhere.
double rho2_closed(int d, double r);

/// Kluyver's Bessel integral for rho^d_n(r), n >= 2, r > 0. Divergent status
/// where the density is infinite (the frequencies of the integrand cancel
/// with a non-integrable envelope).
quadrature::QuadResult density_kluyver(WalkSpec spec, double r, double tol = 1e-10);

struct RecursionOptions {
  /// Nodes of the Gauss-Jacobi fast path; the adaptive fallback takes over
  /// whenever m and m/2 nodes disagree.
  int m_nodes = 64;
  int max_n = 8;
  /// Distance from a registered singular point inside which results are flagged.
  double singular_neighborhood = 1e-6;
};

struct RecursionValue {
  double value = 0.0;
  double error = 0.0;
  bool singular = false;
};

/// rho^d_n(r) for 3 <= n <= max_n, 0 < r < n, by iterating
///   psi_n(r) = c_nu int_{-1}^{1} psi_{n-1}(sqrt(1 + 2 s r + r^2)) (1 - s^2)^{nu - 1/2} ds,
/// psi = rho / r^{d-1}, down to the closed form at n = 2. Intermediate levels
/// are tabulated once per (d, level) and cached.
RecursionValue density_recursion(WalkSpec spec, double r, const RecursionOptions& opts = {});

/// True near a registered interior point of infinite density. The only one
/// is (d, n, r) = (2, 3, 1).
bool near_singular_point(WalkSpec spec, double r, double neighborhood);

/// Density by a fixed route on a grid. MonteCarlo uses histogram bins centred
/// on the grid points with `mc_samples` samples.
DensityCurve density_curve(WalkSpec spec, const std::vector<double>& grid, DensityRoute route, double tol = 1e-10,
                           std::uint64_t seed = 42, std::size_t mc_samples = 1000000, int threads = 0);

enum class Convergence { Absolute, Conditional, Divergent };
const char* to_string(Convergence c);

/// Analytic classification of I^d_q = int_0^inf j_d(t)^q t^{d-1} dt.
Convergence classify_idq(int d, int q);

enum class IdqRoute { DirectIntegral, RecursionEndpoint, ClosedForm };
const char* to_string(IdqRoute route);

struct IdqResult {
  int d = 2;
  int q = 2;
  Convergence classification = Convergence::Divergent;
  std::optional<double> value;
  std::optional<double> error;
  IdqRoute route = IdqRoute::DirectIntegral;
};

/// True where a closed form is known: q = 3 (any d) and (d, q) = (2, 5).
bool has_closed_form(int d, int q);

/// I^d_q by the requested route. Divergent inputs return no value. The
/// recursion route uses I^d_q = (nu!)^2 4^nu rho^d_{q-1}(1).
/// Throws InvalidArgument for ClosedForm outside its coverage and
/// NumericalError when the integral does not converge.
IdqResult idq(int d, int q, IdqRoute route, double tol = 1e-11);

/// int_0^T j_d(t)^q t^{d-1} dt, used to exhibit divergence.
double idq_partial_integral(int d, int q, double T);

/// Radii |U_1 + ... + U_n| with steps from normalized Gaussian vectors.
/// Deterministic for a given seed regardless of the worker count.
std::vector<double> sample_walk(WalkSpec spec, std::size_t n_samples, std::uint64_t seed, int threads = 0);

/// P(|X_n| <= r) from the analytic density.
double walk_cdf(WalkSpec spec, double r);

}  // namespace polyspec::walk
