#include "polyspec/walk.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "piecewise_chebyshev.hpp"
#include "polyspec/errors.hpp"
#include "polyspec/parallel.hpp"
#include "polyspec/specfun.hpp"

namespace polyspec::walk {

namespace {

using quadrature::QuadResult;
using quadrature::QuadStatus;
using specfun::log_gamma;

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kExpansionOrder = 10;

double nu_of(int d) { return 0.5 * d - 1.0; }

// (nu!)^2 4^nu
double kluyver_scale(int d) {
  const double nu = nu_of(d);
  return std::exp(2.0 * log_gamma(nu + 1.0) + nu * std::log(4.0));
}

// Normalizing constant of the weight sin^{2nu}(theta) on (0, pi).
double recursion_constant(int d) {
  const double nu = nu_of(d);
  return std::exp(log_gamma(nu + 1.0) - 0.5 * std::log(kPi) - log_gamma(nu + 0.5));
}

void validate_spec(WalkSpec spec, int min_n) {
  if (spec.d < 2) throw InvalidArgument("walk: dimension must be >= 2");
  if (spec.n < min_n) throw InvalidArgument("walk: step count must be >= " + std::to_string(min_n));
}

// psi_2 with the gap 2 - x supplied separately, so that points within
// rounding distance of the support end keep their true size.
double psi2_gap(int d, double x, double gap) {
  if (!(x > 0.0 && gap > 0.0)) return 0.0;
  const double nu = nu_of(d);
  const double log_c = std::log(2.0 / kPi) - specfun::log_binomial(2.0 * nu, nu);
  return std::exp(log_c + (nu - 0.5) * std::log(gap * (4.0 - gap))) / x;
}

double psi2(int d, double x) { return psi2_gap(d, x, 2.0 - x); }

std::vector<double> level_breaks(int k) {
  std::vector<double> b = {0.0};
  for (int j = k; j > 0; j -= 2) b.push_back(j);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// Integrand seen through the panel substitution: the point x together with its
// distances to the current panel's ends (exact even when tiny) and the panel index.
using PanelIntegrand = std::function<double(double x, double to_left, double to_right, std::size_t panel)>;

// Adaptive integral over consecutive breakpoints with x = a + (b - a) u^2 (3 - 2u)
// on each panel; the vanishing Jacobian at both ends absorbs the inverse
// square-root and logarithmic behaviour the densities show at breakpoints.
QuadResult smoothed_integral(const PanelIntegrand& f, const std::vector<double>& pts,
                             const quadrature::AdaptiveOptions& opts) {
  const std::size_t panels = pts.size() - 1;
  auto g = [&](double u) {
    const auto i = std::min(panels - 1, static_cast<std::size_t>(u));
    const double v = u - static_cast<double>(i);
    const double a = pts[i], w = pts[i + 1] - pts[i];
    const double jac = 6.0 * v * (1.0 - v) * w;
    if (jac == 0.0) return 0.0;
    const double left = w * v * v * (3.0 - 2.0 * v);
    const double right = w * (1.0 - v) * (1.0 - v) * (1.0 + 2.0 * v);
    return f(left <= right ? a + left : pts[i + 1] - right, left, right, i) * jac;
  };
  std::vector<double> upts(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i) upts[i] = static_cast<double>(i);
  return quadrature::integrate_breakpoints(g, upts, opts);
}

using Table = detail::PiecewiseChebyshev;
std::shared_ptr<const Table> level_table(int d, int k);

// psi_k as a callable; k = 2 is the closed form.
std::function<double(double)> level_function(int d, int k) {
  if (k == 2) return [d](double x) { return psi2(d, x); };
  auto table = level_table(d, k);
  return [table](double x) { return (*table)(x); };
}

struct LevelIntegral {
  double value;
  double error;
};

// psi_k(r) from psi_{k-1} by the angular recursion.
LevelIntegral recursion_step(int d, int k, double r, const std::function<double(double)>& below, int m_nodes) {
  if (!(r > 0.0) || r >= k) return {0.0, 0.0};
  const double nu = nu_of(d);
  const double c = recursion_constant(d);
  auto arg = [r](double s) { return std::sqrt((1.0 - r) * (1.0 - r) + 2.0 * r * (1.0 + s)); };

  // Gauss-Jacobi fast path for integrands that are smooth in s (no breakpoint
  // of the lower level inside the reachable range), accepted when m and m/2
  // nodes agree.
  const double reach_lo = std::abs(1.0 - r), reach_hi = 1.0 + r;
  bool smooth = reach_hi < k - 1;
  for (double b : level_breaks(k - 1)) smooth = smooth && (b < reach_lo || b > reach_hi);
  if (m_nodes >= 2 && smooth) {
    auto gj = [&](int m) {
      const auto rule = quadrature::gauss_jacobi_symmetric(specfun::BesselOrder::from_dimension(d), m);
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += rule->weights[i] * below(arg(rule->nodes[i]));
      return c * s;
    };
    const double full = gj(m_nodes);
    const double half = gj(std::max(1, m_nodes / 2));
    if (std::isfinite(full) && std::abs(full - half) <= 1e-12 * std::abs(full)) {
      return {full, std::abs(full - half)};
    }
  }

  // Adaptive path in x = |U + r e|: s = (x^2 - 1 - r^2) / (2r), ds = x dx / r, and
  // 1 - s^2 = (x - lo)(x + lo)(hi - x)(hi + x) / (4 r^2) with lo = |1 - r|, hi = 1 + r.
  const double lo = std::abs(1.0 - r), hi = 1.0 + r;
  const double top = std::min(hi, static_cast<double>(k - 1));
  if (!(top > lo)) return {0.0, 0.0};
  std::vector<double> pts = {lo, top};
  for (double b : level_breaks(k - 1)) {
    if (b > lo && b < top) pts.push_back(b);
  }
  // A lower-level breakpoint just outside the range leaves a near-singularity at
  // the range end; grade geometrically toward that end.
  for (double b : level_breaks(k - 1)) {
    for (double e : {lo, top}) {
      const double gap = std::abs(b - e);
      if (!(gap > 0.0 && gap < 1e-3) || (b > lo && b < top)) continue;
      const double dir = e == lo ? 1.0 : -1.0;
      for (double step = gap; step < 0.25 * (top - lo); step *= 4.0) pts.push_back(e + dir * step);
    }
  }
  std::sort(pts.begin(), pts.end());
  const std::size_t last = pts.size() - 2;
  const bool top_is_hi = top == hi;
  const PanelIntegrand integrand = [&](double x, double to_left, double to_right, std::size_t panel) {
    const double below_x = (k == 3 && pts[panel + 1] == 2.0) ? psi2_gap(d, x, to_right) : below(x);
    if (below_x == 0.0) return 0.0;
    const double xl = panel == 0 ? to_left : x - lo;
    const double xh = (panel == last && top_is_hi) ? to_right : hi - x;
    const double w = nu == 0.5 ? 1.0 : std::pow(xl * (x + lo) * xh * (hi + x) / (4.0 * r * r), nu - 0.5);
    return below_x * w * x / r;
  };
  const auto res = smoothed_integral(integrand, pts, quadrature::AdaptiveOptions{1e-15, 1e-12, 2000});
  return {c * res.value, c * res.abs_error_estimate};
}

std::shared_ptr<const Table> level_table(int d, int k) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Table>> cache;
  const auto key = std::make_pair(d, k);
  {
    const std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto below = level_function(d, k - 1);
  const Table::Options opts{};
  const auto breaks = level_breaks(k);
  const auto nodes = Table::nodes_for(breaks, opts);
  std::vector<double> values(nodes.size());
  parallel_for(nodes.size(), resolve_threads(0),
               [&](std::size_t i) { values[i] = recursion_step(d, k, nodes[i], below, 0).value; });
  auto table = std::make_shared<const Table>(breaks, opts, values);
  const std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, table).first->second;
}

quadrature::OscillatoryExpansion scaled(quadrature::OscillatoryExpansion e, double factor, double extra_power) {
  for (auto& c : e.components) {
    for (auto& x : c.coeffs) x *= factor;
  }
  e.power += extra_power;
  return e;
}

}  // namespace

const char* to_string(DensityRoute route) {
  switch (route) {
    case DensityRoute::ClosedForm2: return "closed";
    case DensityRoute::Kluyver: return "kluyver";
    case DensityRoute::Recursion: return "recursion";
    case DensityRoute::MonteCarlo: return "mc";
  }
  return "?";
}

const char* to_string(Convergence c) {
  switch (c) {
    case Convergence::Absolute: return "Absolute";
    case Convergence::Conditional: return "Conditional";
    case Convergence::Divergent: return "Divergent";
  }
  return "?";
}

const char* to_string(IdqRoute route) {
  switch (route) {
    case IdqRoute::DirectIntegral: return "DirectIntegral";
    case IdqRoute::RecursionEndpoint: return "RecursionEndpoint";
    case IdqRoute::ClosedForm: return "ClosedForm";
  }
  return "?";
}

double rho2_closed(int d, double r) {
  if (d < 2) throw InvalidArgument("rho2_closed: dimension must be >= 2");
  if (!(r > 0.0 && r < 2.0)) return 0.0;
  return psi2(d, r) * std::pow(r, d - 1);
}

QuadResult density_kluyver(WalkSpec spec, double r, double tol) {
  validate_spec(spec, 2);
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("density_kluyver: r must be finite and > 0");
  if (r >= spec.n) {
    QuadResult zero;
    zero.converged = true;
    zero.status = QuadStatus::Converged;
    return zero;
  }
  const int d = spec.d, n = spec.n;
  const double nu = nu_of(d);
  const double norm = 1.0 / kluyver_scale(d);
  quadrature::OscillatoryIntegrand g;
  g.evaluator = [=](double t) {
    return norm * std::pow(t * r, 2.0 * nu + 1.0) * specfun::jd(d, t * r) * std::pow(specfun::jd(d, t), n);
  };
  g.decay_exponent = 0.5 * (d - 1) * (n - 1);
  g.phase_period = kPi / (n + r);
  g.require_acceleration = g.decay_exponent <= 1.0;
  const auto unit = quadrature::jd_expansion(d, 1.0, kExpansionOrder);
  auto model = quadrature::jd_expansion(d, r, kExpansionOrder);
  for (int i = 0; i < n; ++i) model = quadrature::multiply(model, unit, kExpansionOrder);
  g.expansion = scaled(model, norm * std::pow(r, 2.0 * nu + 1.0), 2.0 * nu + 1.0);
  return quadrature::integrate_oscillatory_tail(g, 0.0, tol);
}

bool near_singular_point(WalkSpec spec, double r, double neighborhood) {
  return spec.d == 2 && spec.n == 3 && std::abs(r - 1.0) <= neighborhood;
}

RecursionValue density_recursion(WalkSpec spec, double r, const RecursionOptions& opts) {
  validate_spec(spec, 3);
  if (spec.n > opts.max_n) {
    throw InvalidArgument("density_recursion: n exceeds the recursion depth cap of " + std::to_string(opts.max_n));
  }
  if (opts.m_nodes < 1 || opts.m_nodes > quadrature::kMaxGaussNodes) {
    throw InvalidArgument("density_recursion: m_nodes out of range");
  }
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("density_recursion: r must be finite and > 0");
  RecursionValue out;
  out.singular = near_singular_point(spec, r, opts.singular_neighborhood);
  if (r >= spec.n) return out;
  if (spec.d == 2 && spec.n == 3 && r == 1.0) {
    out.value = kInf;
    out.error = kInf;
    return out;
  }
  const auto below = level_function(spec.d, spec.n - 1);
  const auto step = recursion_step(spec.d, spec.n, r, below, opts.m_nodes);
  const double jac = std::pow(r, spec.d - 1);
  out.value = step.value * jac;
  out.error = step.error * jac;
  return out;
}

double walk_cdf(WalkSpec spec, double r) {
  validate_spec(spec, 2);
  if (!(r > 0.0)) return 0.0;
  if (r >= spec.n) return 1.0;
  if (spec.n == 2) {
    const double a = 0.5 * (spec.d - 1);
    return boost::math::ibeta(a, a, 0.25 * r * r);
  }
  const auto table = level_table(spec.d, spec.n);
  std::vector<double> pts = {0.0};
  for (double b : level_breaks(spec.n)) {
    if (b > 0.0 && b < r) pts.push_back(b);
  }
  pts.push_back(r);
  const int dm1 = spec.d - 1;
  const auto res = smoothed_integral([&](double x, double, double, std::size_t) { return (*table)(x) * std::pow(x, dm1); },
                                     pts, quadrature::AdaptiveOptions{1e-13, 1e-12, 4000});
  return std::clamp(res.value, 0.0, 1.0);
}

Convergence classify_idq(int d, int q) {
  if (d < 2 || q < 2) throw InvalidArgument("classify_idq: need d >= 2, q >= 2");
  if (q == 2 || (d == 2 && q == 4)) return Convergence::Divergent;
  if (q == 3 && (d == 2 || d == 3)) return Convergence::Conditional;
  return Convergence::Absolute;
}

bool has_closed_form(int d, int q) { return q == 3 || (d == 2 && q == 5); }

IdqResult idq(int d, int q, IdqRoute route, double tol) {
  IdqResult out;
  out.d = d;
  out.q = q;
  out.route = route;
  out.classification = classify_idq(d, q);
  if (route == IdqRoute::ClosedForm && !has_closed_form(d, q)) {
    throw InvalidArgument("idq: no closed form for d=" + std::to_string(d) + ", q=" + std::to_string(q));
  }
  if (out.classification == Convergence::Divergent) return out;
  const double nu = nu_of(d);

  switch (route) {
    case IdqRoute::ClosedForm: {
      if (q == 3) {
        // (2 / (pi sqrt 3)) 12^nu (nu!)^4 / (2 nu)!
        out.value = 2.0 / (kPi * std::sqrt(3.0)) *
                    std::exp(nu * std::log(12.0) + 4.0 * log_gamma(nu + 1.0) - log_gamma(2.0 * nu + 1.0));
      } else {
        const double lg = log_gamma(1.0 / 15) + log_gamma(2.0 / 15) + log_gamma(4.0 / 15) + log_gamma(8.0 / 15);
        out.value = std::sqrt(5.0) * std::exp(lg) / (40.0 * std::pow(kPi, 4));
      }
      out.error = 0.0;
      return out;
    }
    case IdqRoute::RecursionEndpoint: {
      const double scale = kluyver_scale(d);
      if (q == 3) {
        out.value = scale * rho2_closed(d, 1.0);
        out.error = 0.0;
      } else {
        const auto v = density_recursion({d, q - 1}, 1.0);
        out.value = scale * v.value;
        out.error = scale * v.error;
      }
      return out;
    }
    case IdqRoute::DirectIntegral: {
      quadrature::OscillatoryIntegrand g;
      g.evaluator = [d, q](double t) { return std::pow(specfun::jd(d, t), q) * std::pow(t, d - 1); };
      g.decay_exponent = (d - 1) * (0.5 * q - 1.0);
      g.phase_period = kPi / q;
      g.require_acceleration = out.classification == Convergence::Conditional;
      const auto unit = quadrature::jd_expansion(d, 1.0, kExpansionOrder);
      auto model = unit;
      for (int i = 1; i < q; ++i) model = quadrature::multiply(model, unit, kExpansionOrder);
      g.expansion = scaled(model, 1.0, d - 1.0);
      const auto res = quadrature::integrate_oscillatory_tail(g, 0.0, tol);
      if (res.status != QuadStatus::Converged) {
        throw NumericalError("idq: direct integral did not converge for d=" + std::to_string(d) +
                             ", q=" + std::to_string(q) + " (estimate " + std::to_string(res.value) + ")");
      }
      out.value = res.value;
      out.error = res.abs_error_estimate;
      return out;
    }
  }
  return out;
}

double idq_partial_integral(int d, int q, double T) {
  if (d < 2 || q < 1 || !(T > 0.0)) throw InvalidArgument("idq_partial_integral: bad arguments");
  const auto res = quadrature::integrate_panels(
      [d, q](double t) { return std::pow(specfun::jd(d, t), q) * std::pow(t, d - 1); }, 0.0, T, 0.5 * kPi,
      quadrature::AdaptiveOptions{1e-12, 0.0, 1000000});
  return res.value;
}

std::vector<double> sample_walk(WalkSpec spec, std::size_t n_samples, std::uint64_t seed, int threads) {
  validate_spec(spec, 1);
  if (n_samples < 1) throw InvalidArgument("sample_walk: n_samples must be >= 1");
  constexpr std::size_t kBlock = 1 << 15;
  const std::size_t blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<double> radii(n_samples);
  parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
    std::mt19937_64 engine(substream_seed(seed, b));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> sum(spec.d), step(spec.d);
    const std::size_t lo = b * kBlock, hi = std::min(n_samples, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      std::fill(sum.begin(), sum.end(), 0.0);
      for (int k = 0; k < spec.n; ++k) {
        double norm2 = 0.0;
        do {
          norm2 = 0.0;
          for (auto& x : step) {
            x = normal(engine);
            norm2 += x * x;
          }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (int j = 0; j < spec.d; ++j) sum[j] += step[j] * inv;
      }
      double r2 = 0.0;
      for (double x : sum) r2 += x * x;
      radii[i] = std::sqrt(r2);
    }
  });
  return radii;
}

DensityCurve density_curve(WalkSpec spec, const std::vector<double>& grid, DensityRoute route, double tol,
                           std::uint64_t seed, std::size_t mc_samples, int threads) {
  validate_spec(spec, 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw InvalidArgument("density_curve: grid points must be > 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("density_curve: grid must be increasing");
  }
  if (route == DensityRoute::ClosedForm2 && spec.n != 2) {
    throw InvalidArgument("density_curve: the closed form covers n = 2 only");
  }
  if (route == DensityRoute::Recursion && spec.n == 2) route = DensityRoute::ClosedForm2;

  DensityCurve curve;
  curve.spec = spec;
  curve.grid = grid;
  curve.route = route;
  const std::size_t m = grid.size();
  curve.values.assign(m, 0.0);
  curve.errors.assign(m, 0.0);
  curve.singular.assign(m, false);

  if (route == DensityRoute::MonteCarlo) {
    if (m == 0) return curve;
    std::vector<double> edges(m + 1);
    for (std::size_t i = 1; i < m; ++i) edges[i] = 0.5 * (grid[i - 1] + grid[i]);
    const double first = m > 1 ? grid[1] - grid[0] : 0.02 * spec.n;
    const double last = m > 1 ? grid[m - 1] - grid[m - 2] : 0.02 * spec.n;
    edges[0] = std::max(0.0, grid[0] - 0.5 * first);
    edges[m] = grid[m - 1] + 0.5 * last;
    const auto radii = sample_walk(spec, mc_samples, seed, threads);
    std::vector<double> counts(m, 0.0);
    for (double x : radii) {
      auto it = std::upper_bound(edges.begin(), edges.end(), x);
      if (it == edges.begin() || it == edges.end()) continue;
      counts[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double width = edges[i + 1] - edges[i];
      const double scale = static_cast<double>(mc_samples) * width;
      curve.values[i] = counts[i] / scale;
      curve.errors[i] = std::sqrt(counts[i]) / scale;
    }
    return curve;
  }

  parallel_for(m, resolve_threads(threads), [&](std::size_t i) {
    const double r = grid[i];
    switch (route) {
      case DensityRoute::ClosedForm2:
        curve.values[i] = rho2_closed(spec.d, r);
        break;
      case DensityRoute::Kluyver: {
        const auto res = density_kluyver(spec, r, tol);
        if (res.status == QuadStatus::Divergent) {
          curve.values[i] = kInf;
          curve.errors[i] = kInf;
          curve.singular[i] = true;
        } else if (res.status == QuadStatus::NotConverged) {
          throw NumericalError("density_kluyver did not converge at r=" + std::to_string(r));
        } else {
          curve.values[i] = res.value;
          curve.errors[i] = res.abs_error_estimate;
        }
        break;
      }
      case DensityRoute::Recursion: {
        const auto v = density_recursion(spec, r);
        curve.values[i] = v.value;
        curve.errors[i] = v.error;
        curve.singular[i] = v.singular;
        break;
      }
      case DensityRoute::MonteCarlo:
        break;
    }
  });
  return curve;
}

}  // namespace polyspec::walk
