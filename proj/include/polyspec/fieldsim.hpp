#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "polyspec/geometry.hpp"
#include "polyspec/variance.hpp"
#include "polyspec/walk.hpp"

namespace polyspec::fieldsim {

using geometry::Geometry;
using variance::FieldSpec;
using variance::PolyspectrumSpec;

/// Points stored row-major: d coordinates in R^d, d + 1 on S^d.
struct PointSet {
  int dim = 0;
  std::vector<double> coords;
  std::size_t size() const { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
  const double* operator[](std::size_t i) const { return coords.data() + i * static_cast<std::size_t>(dim); }
};

enum class SamplerMethod { PlaneWaves, CovarianceFactor };
const char* to_string(SamplerMethod m);

struct FieldSampler {
  FieldSpec spec;
  SamplerMethod method = SamplerMethod::CovarianceFactor;
  int n_waves = 1024;              // PlaneWaves, >= 64
  double nugget = 0.0;             // initial diagonal shift, in [0, 1e-8]
  std::size_t point_budget = 4096; // CovarianceFactor
  std::uint64_t seed = 42;
};

/// E[U(x) U(y)]: j_d(lambda |x - y|) or G_{d,ell}(<x, y>).
double field_covariance(const FieldSpec& spec, const double* x, const double* y);

/// One joint draw of the field at `points`.
std::vector<double> sample_field_values(const FieldSampler& sampler, const PointSet& points);

/// `draws` independent joint draws, row-major (draw, point). Draw k is a
/// function of (seed, k) only.
std::vector<double> sample_field_batch(const FieldSampler& sampler, const PointSet& points, std::size_t draws,
                                       int threads = 0);

struct QuadratureDomain {
  Geometry geometry = Geometry::Euclidean;
  int d = 2;
  double R = 1.0;
  PointSet points;
  std::vector<double> weights;
};

/// Product rule over the ball or cap: `resolution` Gauss-Legendre nodes in
/// the radius (or polar angle), 2 * resolution per polar angle of S^{d-1}
/// beyond the first, 4 * resolution equispaced azimuths.
QuadratureDomain build_domain(Geometry geometry, int d, double R, int resolution);

/// q! sum_ij w_i w_j C(x_i, x_j)^q: the exact variance of the discretized
/// functional for a Gaussian field, i.e. what the Monte Carlo estimate targets.
double discretized_variance(const PolyspectrumSpec& spec, const QuadratureDomain& domain, int threads = 0);

struct MCVariance {
  std::size_t trials = 0;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t seed = 0;
  double nugget_used = 0.0;
};

/// Sample variance of sum_i w_i H_q(U(x_i)) over independent trials, with a
/// 95% normal-approximation interval using the fourth sample moment.
MCVariance mc_polyspectrum_variance(const PolyspectrumSpec& spec, const FieldSampler& sampler,
                                    const QuadratureDomain& domain, std::size_t trials, int threads = 0);

struct ChiSquareResult {
  double chi2 = 0.0;
  double pvalue = 0.0;
  int dof = 0;
  int bins_used = 0;
};

/// Chi-square test of sample_walk radii against analytic bin masses on
/// equal-mass bins. For (2, 3) the bin holding r = 1 is merged with its neighbours.
ChiSquareResult mc_walk_density_check(walk::WalkSpec spec, std::size_t n_samples, int bins, std::uint64_t seed = 42,
                                      int threads = 0);

}  // namespace polyspec::fieldsim
