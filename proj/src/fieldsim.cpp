#include "polyspec/fieldsim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/special_functions/gamma.hpp>

#include "polyspec/errors.hpp"
#include "polyspec/parallel.hpp"
#include "polyspec/quadrature.hpp"
#include "polyspec/specfun.hpp"

namespace polyspec::fieldsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kDrawBlock = 32;

struct SphereRule {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

// Product rule on S^k in R^{k+1}; weights sum to omega_k.
SphereRule sphere_rule(int k, int resolution) {
  SphereRule out;
  if (k == 1) {
    const int m = 4 * resolution;
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * kPi * j / m;
      out.points.push_back({std::cos(phi), std::sin(phi)});
      out.weights.push_back(2.0 * kPi / m);
    }
    return out;
  }
  // Height t = last coordinate, weight (1 - t^2)^{(k-2)/2}.
  const auto rule = quadrature::gauss_jacobi_symmetric(specfun::BesselOrder::from_twice(k - 1), 2 * resolution);
  const auto sub = sphere_rule(k - 1, resolution);
  for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
    const double t = rule->nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (std::size_t j = 0; j < sub.points.size(); ++j) {
      std::vector<double> p;
      for (double v : sub.points[j]) p.push_back(s * v);
      p.push_back(t);
      out.points.push_back(std::move(p));
      out.weights.push_back(rule->weights[i] * sub.weights[j]);
    }
  }
  return out;
}

struct Factor {
  Eigen::MatrixXd L;
  double nugget = 0.0;
};

std::shared_ptr<const Factor> factorize(const FieldSampler& sampler, const PointSet& points, int threads) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (points.size() > sampler.point_budget) {
    throw InvalidArgument("covariance factorization: " + std::to_string(points.size()) +
                          " points exceed the point budget of " + std::to_string(sampler.point_budget));
  }
  Eigen::MatrixXd K(n, n);
  parallel_for(points.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double c = field_covariance(sampler.spec, points[i], points[j]);
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
      K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
    }
  });
  auto out = std::make_shared<Factor>();
  std::vector<double> ladder = {sampler.nugget};
  for (double v : {1e-12, 1e-10, 1e-8}) {
    if (v > sampler.nugget) ladder.push_back(v);
  }
  for (double nugget : ladder) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += nugget;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      out->L = llt.matrixL();
      out->nugget = nugget;
      return out;
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  const double min_pivot = ldlt.vectorD().minCoeff();
  throw FactorizationError("covariance factorization failed after nugget 1e-8 (smallest LDLT pivot " +
                               std::to_string(min_pivot) + ")",
                           min_pivot);
}

void validate_sampler(const FieldSampler& sampler, const PointSet& points) {
  const auto& s = sampler.spec;
  if (s.d < 2) throw InvalidArgument("field dimension must be >= 2");
  if (s.geometry == Geometry::Euclidean && !(s.lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (s.geometry == Geometry::Spherical && s.ell < 0) throw InvalidArgument("ell must be >= 0");
  const int dim = s.geometry == Geometry::Euclidean ? s.d : s.d + 1;
  if (points.size() > 0 && points.dim != dim) {
    throw InvalidArgument("points have dimension " + std::to_string(points.dim) + ", expected " + std::to_string(dim));
  }
  if (sampler.method == SamplerMethod::PlaneWaves) {
    if (s.geometry != Geometry::Euclidean) throw InvalidArgument("plane waves exist for the Euclidean field only");
    if (sampler.n_waves < 64) throw InvalidArgument("plane-wave count must be >= 64");
  } else if (!(sampler.nugget >= 0.0 && sampler.nugget <= 1e-8)) {
    throw InvalidArgument("nugget must lie in [0, 1e-8]");
  }
}

// Fills out[k * n .. (k+1) * n) for draws k in [first, first + count).
void draw_block(const FieldSampler& sampler, const PointSet& points, const Factor* factor, std::size_t first,
                std::size_t count, double* out) {
  const std::size_t n = points.size();
  const int d = sampler.spec.d;
  if (sampler.method == SamplerMethod::PlaneWaves) {
    const int N = sampler.n_waves;
    const double amp = std::sqrt(2.0 / N);
    const double lambda = sampler.spec.lambda;
    std::vector<double> dirs(static_cast<std::size_t>(N) * d), phases(N);
    for (std::size_t k = 0; k < count; ++k) {
      std::mt19937_64 engine(substream_seed(sampler.seed, first + k));
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);
      for (int i = 0; i < N; ++i) {
        double norm2 = 0.0;
        do {
          norm2 = 0.0;
          for (int c = 0; c < d; ++c) {
            const double v = normal(engine);
            dirs[static_cast<std::size_t>(i) * d + c] = v;
            norm2 += v * v;
          }
        } while (norm2 == 0.0);
        const double scale = lambda / std::sqrt(norm2);
        for (int c = 0; c < d; ++c) dirs[static_cast<std::size_t>(i) * d + c] *= scale;
        phases[i] = uniform(engine);
      }
      double* row = out + k * n;
      for (std::size_t p = 0; p < n; ++p) {
        const double* x = points[p];
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
          const double* y = &dirs[static_cast<std::size_t>(i) * d];
          double dot = phases[i];
          for (int c = 0; c < d; ++c) dot += x[c] * y[c];
          sum += std::cos(dot);
        }
        row[p] = amp * sum;
      }
    }
    return;
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd Z(nn, static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    std::mt19937_64 engine(substream_seed(sampler.seed, first + k));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < nn; ++i) Z(i, static_cast<Eigen::Index>(k)) = normal(engine);
  }
  const Eigen::MatrixXd U = factor->L.triangularView<Eigen::Lower>() * Z;
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t p = 0; p < n; ++p) out[k * n + p] = U(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
  }
}

}  // namespace

const char* to_string(SamplerMethod m) { return m == SamplerMethod::PlaneWaves ? "planewaves" : "cholesky"; }

double field_covariance(const FieldSpec& spec, const double* x, const double* y) {
  if (spec.geometry == Geometry::Euclidean) {
    double s = 0.0;
    for (int c = 0; c < spec.d; ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
    return specfun::jd(spec.d, spec.lambda * std::sqrt(s));
  }
  double dot = 0.0;
  for (int c = 0; c <= spec.d; ++c) dot += x[c] * y[c];
  return specfun::gegenbauer({spec.d, spec.ell}, std::clamp(dot, -1.0, 1.0));
}

std::vector<double> sample_field_batch(const FieldSampler& sampler, const PointSet& points, std::size_t draws,
                                       int threads) {
  validate_sampler(sampler, points);
  const int workers = resolve_threads(threads);
  std::shared_ptr<const Factor> factor;
  if (sampler.method == SamplerMethod::CovarianceFactor) factor = factorize(sampler, points, workers);
  std::vector<double> out(draws * points.size());
  const std::size_t blocks = (draws + kDrawBlock - 1) / kDrawBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::size_t first = b * kDrawBlock;
    const std::size_t count = std::min(kDrawBlock, draws - first);
    draw_block(sampler, points, factor.get(), first, count, out.data() + first * points.size());
  });
  return out;
}

std::vector<double> sample_field_values(const FieldSampler& sampler, const PointSet& points) {
  return sample_field_batch(sampler, points, 1, 1);
}

QuadratureDomain build_domain(Geometry geometry, int d, double R, int resolution) {
  geometry::validate({geometry, d, R});
  if (resolution < 8) throw InvalidArgument("build_domain: resolution must be >= 8");
  QuadratureDomain dom;
  dom.geometry = geometry;
  dom.d = d;
  dom.R = R;
  const auto dirs = sphere_rule(d - 1, resolution);
  if (geometry == Geometry::Euclidean) {
    dom.points.dim = d;
    const auto radial = quadrature::gauss_legendre(resolution, 0.0, R);
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double r = radial.nodes[i];
      const double wr = radial.weights[i] * std::pow(r, d - 1);
      for (std::size_t j = 0; j < dirs.points.size(); ++j) {
        for (double v : dirs.points[j]) dom.points.coords.push_back(r * v);
        dom.weights.push_back(wr * dirs.weights[j]);
      }
    }
    return dom;
  }
  dom.points.dim = d + 1;
  const auto polar = quadrature::gauss_legendre(resolution, 0.0, R);
  std::vector<double> wt(polar.nodes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < wt.size(); ++i) {
    wt[i] = polar.weights[i] * std::pow(std::sin(polar.nodes[i]), d - 1);
    total += wt[i];
  }
  // sin^{d-1} is not a polynomial: pin the rule to the exact cap volume.
  const double exact = geometry::cap_volume(d, R) / geometry::omega(d - 1);
  for (double& w : wt) w *= exact / total;
  for (std::size_t i = 0; i < wt.size(); ++i) {
    const double th = polar.nodes[i];
    for (std::size_t j = 0; j < dirs.points.size(); ++j) {
      for (double v : dirs.points[j]) dom.points.coords.push_back(std::sin(th) * v);
      dom.points.coords.push_back(std::cos(th));
      dom.weights.push_back(wt[i] * dirs.weights[j]);
    }
  }
  return dom;
}

double discretized_variance(const PolyspectrumSpec& spec, const QuadratureDomain& domain, int threads) {
  variance::validate(spec);
  const std::size_t n = domain.points.size();
  std::vector<double> rows(n, 0.0);
  parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
    double acc = 0.5 * domain.weights[i];  // C(x, x) = 1, counted once below
    for (std::size_t j = 0; j < i; ++j) {
      acc += domain.weights[j] * std::pow(field_covariance(spec.field, domain.points[i], domain.points[j]), spec.q);
    }
    rows[i] = 2.0 * domain.weights[i] * acc;
  });
  double total = 0.0;
  for (double v : rows) total += v;
  return std::tgamma(spec.q + 1.0) * total;
}

MCVariance mc_polyspectrum_variance(const PolyspectrumSpec& spec, const FieldSampler& sampler,
                                    const QuadratureDomain& domain, std::size_t trials, int threads) {
  variance::validate(spec);
  if (trials < 100) throw InvalidArgument("mc_polyspectrum_variance: trials must be >= 100");
  if (domain.geometry != spec.field.geometry || domain.d != spec.field.d) {
    throw InvalidArgument("mc_polyspectrum_variance: domain does not match the field");
  }
  validate_sampler(sampler, domain.points);
  const int workers = resolve_threads(threads);
  std::shared_ptr<const Factor> factor;
  if (sampler.method == SamplerMethod::CovarianceFactor) factor = factorize(sampler, domain.points, workers);

  const std::size_t n = domain.points.size();
  std::vector<double> S(trials);
  const std::size_t blocks = (trials + kDrawBlock - 1) / kDrawBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::size_t first = b * kDrawBlock;
    const std::size_t count = std::min(kDrawBlock, trials - first);
    std::vector<double> values(count * n);
    draw_block(sampler, domain.points, factor.get(), first, count, values.data());
    for (std::size_t k = 0; k < count; ++k) {
      double s = 0.0;
      for (std::size_t p = 0; p < n; ++p) s += domain.weights[p] * specfun::hermite(spec.q, values[k * n + p]);
      S[first + k] = s;
    }
  });

  const double m = static_cast<double>(trials);
  double mean = 0.0;
  for (double s : S) mean += s;
  mean /= m;
  double m2 = 0.0, m4 = 0.0;
  for (double s : S) {
    const double c = (s - mean) * (s - mean);
    m2 += c;
    m4 += c * c;
  }
  const double var = m2 / (m - 1.0);
  m4 /= m;
  const double var_of_var = std::max(0.0, (m4 - (m - 3.0) / (m - 1.0) * var * var) / m);
  const double half = 1.959963984540054 * std::sqrt(var_of_var);

  MCVariance out;
  out.trials = trials;
  out.estimate = var;
  out.ci_lo = std::max(0.0, var - half);
  out.ci_hi = var + half;
  out.seed = sampler.seed;
  out.nugget_used = factor ? factor->nugget : 0.0;
  return out;
}

ChiSquareResult mc_walk_density_check(walk::WalkSpec spec, std::size_t n_samples, int bins, std::uint64_t seed,
                                      int threads) {
  if (spec.n < 2) throw InvalidArgument("mc_walk_density_check: needs n >= 2");
  if (bins < 2) throw InvalidArgument("mc_walk_density_check: needs at least two bins");
  const double top = spec.n;
  // Equal-mass edges by bisection on the analytic CDF.
  std::vector<double> edges = {0.0};
  for (int k = 1; k < bins; ++k) {
    const double target = static_cast<double>(k) / bins;
    double lo = edges.back(), hi = top;
    for (int it = 0; it < 60 && hi - lo > 1e-13 * top; ++it) {
      const double mid = 0.5 * (lo + hi);
      (walk::walk_cdf(spec, mid) < target ? lo : hi) = mid;
    }
    edges.push_back(0.5 * (lo + hi));
  }
  edges.push_back(top);
  if (spec.d == 2 && spec.n == 3) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), 1.0);
    const auto j = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;  // bin [e_j, e_{j+1}) holds r = 1
    const auto first = std::max<std::ptrdiff_t>(j, 1);
    const auto last = std::min<std::ptrdiff_t>(j + 1, static_cast<std::ptrdiff_t>(edges.size()) - 2);
    if (first <= last) edges.erase(edges.begin() + first, edges.begin() + last + 1);
  }
  const std::size_t nb = edges.size() - 1;
  std::vector<double> expected(nb);
  double prev = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    const double c = k + 1 == nb ? 1.0 : walk::walk_cdf(spec, edges[k + 1]);
    expected[k] = static_cast<double>(n_samples) * (c - prev);
    prev = c;
    if (expected[k] < 10.0) {
      throw InvalidArgument("mc_walk_density_check: bin " + std::to_string(k) + " expects fewer than 10 samples");
    }
  }
  const auto radii = walk::sample_walk(spec, n_samples, seed, threads);
  std::vector<double> observed(nb, 0.0);
  for (double r : radii) {
    auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, r);
    observed[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
  }
  ChiSquareResult out;
  for (std::size_t k = 0; k < nb; ++k) out.chi2 += (observed[k] - expected[k]) * (observed[k] - expected[k]) / expected[k];
  out.bins_used = static_cast<int>(nb);
  out.dof = out.bins_used - 1;
  out.pvalue = boost::math::gamma_q(0.5 * out.dof, 0.5 * out.chi2);
  return out;
}

}  // namespace polyspec::fieldsim
