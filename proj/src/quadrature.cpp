#include "polyspec/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <utility>

#include "polyspec/errors.hpp"

namespace polyspec::quadrature {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

Interval gauss_kronrod_15(const RealFunction& g, double a, double b) {
  // Nodes that round onto an endpoint are pulled back inside.
  const auto f = [&](double x) {
    if (x <= a) x = std::nextafter(a, b);
    if (x >= b) x = std::nextafter(b, a);
    return g(x);
  };
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);
  const double fc = f(center);
  double result_gauss = fc * kWg[3];
  double result_kronrod = fc * kWgk[7];
  double result_abs = std::abs(result_kronrod);
  std::array<double, 7> fv1{}, fv2{};
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const double f1 = f(center - dx), f2 = f(center + dx);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    result_gauss += kWg[j] * (f1 + f2);
    result_kronrod += kWgk[jtw] * (f1 + f2);
    result_abs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const double f1 = f(center - dx), f2 = f(center + dx);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    result_kronrod += kWgk[jtwm1] * (f1 + f2);
    result_abs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }
  const double mean = 0.5 * result_kronrod;
  double result_asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    result_asc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
  }
  const double value = result_kronrod * half;
  result_abs *= abs_half;
  result_asc *= abs_half;
  double error = std::abs((result_kronrod - result_gauss) * half);
  if (result_asc != 0.0 && error != 0.0) {
    error = result_asc * std::min(1.0, std::pow(200.0 * error / result_asc, 1.5));
  }
  if (result_abs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    error = std::max(50.0 * kEps * result_abs, error);
  }
  if (!std::isfinite(value)) error = std::numeric_limits<double>::infinity();
  return {a, b, value, error};
}

QuadResult adaptive_core(const RealFunction& f, std::span<const double> points, const AdaptiveOptions& opts) {
  std::size_t evals = 0;
  const RealFunction counted = [&](double x) {
    ++evals;
    return f(x);
  };
  std::priority_queue<Interval> heap;
  std::vector<Interval> frozen;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1])) continue;
    Interval iv = gauss_kronrod_15(counted, points[i], points[i + 1]);
    total += iv.value;
    total_err += iv.error;
    heap.push(iv);
  }
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  std::size_t n_intervals = heap.size();
  while (!heap.empty() && total_err > target() && n_intervals < opts.max_intervals) {
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    // Intervals shrunk to rounding level cannot be refined further.
    const double scale = std::max({std::abs(worst.a), std::abs(worst.b), 1e-300});
    if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 64.0 * kEps * scale) {
      frozen.push_back(worst);
      continue;
    }
    const Interval left = gauss_kronrod_15(counted, worst.a, mid);
    const Interval right = gauss_kronrod_15(counted, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n_intervals;
  }
  // Re-sum from scratch to shed accumulated update rounding.
  double value = 0.0, error = 0.0;
  for (const auto& iv : frozen) {
    value += iv.value;
    error += iv.error;
  }
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  QuadResult result;
  result.value = value;
  result.abs_error_estimate = error;
  result.n_evals = evals;
  result.converged = std::isfinite(value) && error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
  result.status = result.converged ? QuadStatus::Converged : QuadStatus::NotConverged;
  return result;
}

// Cauchy-type drift test on averaged partial sums: logarithmic growth with a
// stable slope means the improper integral diverges.
bool drifts_logarithmically(std::span<const double> averaged, std::span<const double> nodes, double tol) {
  const std::size_t K = averaged.size();
  if (K < 16) return false;
  const std::size_t i4 = K / 4, i2 = K / 2, i1 = K - 1;
  const double d1 = averaged[i1] - averaged[i2];
  const double d2 = averaged[i2] - averaged[i4];
  const double c1 = d1 / std::log(nodes[i1] / nodes[i2]);
  const double c2 = d2 / std::log(nodes[i2] / nodes[i4]);
  if (c1 * c2 <= 0.0) return false;
  if (std::abs(d1) <= 100.0 * tol) return false;
  return std::abs(c1 - c2) <= 0.25 * std::max(std::abs(c1), std::abs(c2));
}

// Iterated Aitken delta-squared on the tail of a sequence.
std::pair<double, double> iterated_aitken(std::vector<double> s) {
  double last = s.back(), previous = s.size() > 1 ? s[s.size() - 2] : s.back();
  while (s.size() >= 3) {
    std::vector<double> next;
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
      const double denom = s[i + 2] - 2.0 * s[i + 1] + s[i];
      if (denom == 0.0) {
        next.push_back(s[i + 2]);
      } else {
        next.push_back(s[i + 2] - (s[i + 2] - s[i + 1]) * (s[i + 2] - s[i + 1]) / denom);
      }
    }
    s = std::move(next);
    if (s.size() >= 2) {
      previous = s[s.size() - 2];
      last = s.back();
    } else {
      last = s.back();
    }
  }
  return {last, std::abs(last - previous)};
}

QuadResult tail_with_expansion(const OscillatoryIntegrand& g, double a, double tol) {
  const auto& model = *g.expansion;
  std::size_t evals = 0;
  double T = std::max(a, model.valid_from);
  // Move T out until the model reproduces the integrand.
  for (int attempt = 0; attempt < 30; ++attempt) {
    double scale = 0.0;
    for (const auto& c : model.components) {
      if (!c.coeffs.empty()) scale += std::abs(c.coeffs[0]);
    }
    scale *= std::pow(T, model.power);
    const double mismatch = std::abs(g.evaluator(T) - model.evaluate(T).real());
    ++evals;
    if (mismatch <= 1e-9 * scale + 1e-300) break;
    T *= 1.5;
  }

  QuadResult result;
  // Zero-frequency components with power >= -1 make the integral infinite.
  for (const auto& c : model.components) {
    double cmax = 0.0;
    for (const auto& ck : c.coeffs) cmax = std::max(cmax, std::abs(ck));
    for (std::size_t k = 0; k < c.coeffs.size(); ++k) {
      if (std::abs(c.coeffs[k]) <= 1e-13 * cmax) continue;
      const double s = model.power - static_cast<double>(k);
      const bool still_growing = std::abs(c.frequency) < 1e-12 ? s >= -1.0 : s >= 0.0;
      if (still_growing) {
        result.status = QuadStatus::Divergent;
        result.value = std::numeric_limits<double>::infinity();
        result.abs_error_estimate = std::numeric_limits<double>::infinity();
        return result;
      }
    }
  }

  const double panel = g.phase_period > 0.0 ? 0.5 * g.phase_period : 1.0;
  AdaptiveOptions head_opts{0.25 * tol, 0.0, 400000};
  const QuadResult head = integrate_panels(g.evaluator, a, T, panel, head_opts);
  evals += head.n_evals;

  std::complex<double> tail = 0.0;
  double tail_err = 0.0;
  const std::size_t n_comp = std::max<std::size_t>(1, model.components.size());
  for (const auto& c : model.components) {
    const double w = c.frequency;
    if (std::abs(w) < 1e-12) {
      for (std::size_t k = 0; k < c.coeffs.size(); ++k) {
        const double s = model.power - static_cast<double>(k);
        tail += c.coeffs[k] * std::pow(T, s + 1.0) / (-(s + 1.0));
      }
      continue;
    }
    const double aw = std::abs(w);
    const double sigma = w > 0.0 ? 1.0 : -1.0;
    auto h = [&](double v) {
      const std::complex<double> z(T, sigma * v / aw);
      const std::complex<double> inv = 1.0 / z;
      std::complex<double> acc = 0.0;
      for (std::size_t k = c.coeffs.size(); k-- > 0;) acc = acc * inv + c.coeffs[k];
      return acc * std::pow(z, model.power) * std::exp(-v);
    };
    std::vector<double> pts = {0.0};
    for (double m : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
      const double p = aw * T * m;
      if (p > 0.0 && p < 60.0) pts.push_back(p);
    }
    for (double p : {1.0, 5.0, 15.0, 30.0}) pts.push_back(p);
    pts.push_back(60.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const AdaptiveOptions opts{0.05 * tol * aw / n_comp, 1e-13, 4000};
    const QuadResult re = integrate_breakpoints([&](double v) { return h(v).real(); }, pts, opts);
    const QuadResult im = integrate_breakpoints([&](double v) { return h(v).imag(); }, pts, opts);
    const std::complex<double> factor = std::complex<double>(0.0, sigma / aw) * std::exp(std::complex<double>(0.0, w * T));
    tail += factor * std::complex<double>(re.value, im.value);
    tail_err += (re.abs_error_estimate + im.abs_error_estimate) / aw;
  }

  // Size of the first omitted order as a truncation estimate.
  double trunc = 0.0;
  for (const auto& c : model.components) {
    if (c.coeffs.empty()) continue;
    const double s = model.power - static_cast<double>(c.coeffs.size());
    trunc += std::abs(c.coeffs.back()) * std::pow(T, s + 1.0) / std::max(1.0, std::abs(s + 1.0)) / T;
  }

  result.value = head.value + tail.real();
  result.abs_error_estimate = head.abs_error_estimate + tail_err + trunc;
  result.n_evals = evals;
  result.converged = head.converged && result.abs_error_estimate <= tol;
  result.status = result.converged ? QuadStatus::Converged : QuadStatus::NotConverged;
  return result;
}

QuadResult tail_with_levin(const OscillatoryIntegrand& g, double a, double tol) {
  const double period = g.phase_period;
  const double alpha = g.decay_exponent;
  std::size_t evals = 0;
  const RealFunction f = [&](double t) {
    ++evals;
    return g.evaluator(t);
  };
  const double start = std::max(a, g.asymptotic_start);
  const double k0 = std::ceil((start - g.phase_offset) / period);
  const double x0 = g.phase_offset + k0 * period;

  const AdaptiveOptions head_opts{0.1 * tol, 0.0, 200000};
  const QuadResult head = integrate_panels(f, a, x0, 0.5 * period, head_opts);
  double err_acc = head.abs_error_estimate;

  std::vector<double> nodes = {x0};
  std::vector<double> sums = {head.value};
  std::vector<double> terms = {head.value};
  const AdaptiveOptions piece_opts{1e-3 * tol, 1e-14, 2000};
  auto extend = [&](std::size_t count) {
    while (terms.size() < count) {
      const double lo = nodes.back();
      const double hi = lo + period;
      const QuadResult piece = integrate_adaptive(f, lo, hi, piece_opts);
      err_acc += piece.abs_error_estimate;
      nodes.push_back(hi);
      terms.push_back(piece.value);
      sums.push_back(sums.back() + piece.value);
    }
  };

  QuadResult result;
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t K = 48; K <= 768; K *= 2) {
    extend(K);

    if (!g.require_acceleration && alpha > 1.0) {
      double envelope = 0.0;
      for (int i = 0; i < 32; ++i) {
        const double t = nodes.back() - 2.0 * period * (i + 0.5) / 32.0;
        envelope = std::max(envelope, std::abs(f(t)) * std::pow(t, alpha));
      }
      const double bound = envelope * std::pow(nodes.back(), 1.0 - alpha) / (alpha - 1.0);
      if (bound <= 0.5 * tol) {
        result.value = sums.back();
        result.abs_error_estimate = bound + err_acc;
        result.n_evals = evals;
        result.converged = true;
        result.status = QuadStatus::Converged;
        return result;
      }
    }

    if (alpha <= 1.0) {
      std::vector<double> averaged, avg_nodes;
      for (std::size_t i = 1; i + 1 < sums.size(); ++i) {
        averaged.push_back(0.5 * (sums[i] + sums[i + 1]));
        avg_nodes.push_back(nodes[i]);
      }
      if (drifts_logarithmically(averaged, avg_nodes, tol)) {
        result.value = std::numeric_limits<double>::infinity();
        result.abs_error_estimate = std::numeric_limits<double>::infinity();
        result.n_evals = evals;
        result.status = QuadStatus::Divergent;
        return result;
      }
    }

    // Levin u on the tail terms; index offset so (beta + n) tracks t / period.
    const std::size_t order = 12;
    const double beta = x0 / period;
    const std::size_t N = sums.size();
    if (N > order + 3) {
      const double e1 = levin_u(sums, terms, N - order - 1, order, beta);
      const double e2 = levin_u(sums, terms, N - order - 2, order, beta);
      const double e3 = levin_u(sums, terms, N - order - 1, order - 1, beta);
      const double lerr = std::max(std::abs(e1 - e2), std::abs(e1 - e3));
      if (std::isfinite(e1) && lerr < best_err) {
        best = e1;
        best_err = lerr;
      }
    }
    if (best_err > tol) {
      std::vector<double> tail_seq(sums.end() - std::min<std::size_t>(sums.size(), 25), sums.end());
      const auto [est, aerr] = iterated_aitken(tail_seq);
      if (std::isfinite(est) && aerr < best_err) {
        best = est;
        best_err = aerr;
      }
    }
    if (best_err + err_acc <= tol) break;
  }
  result.value = best;
  result.abs_error_estimate = best_err + err_acc;
  result.n_evals = evals;
  result.converged = std::isfinite(best) && result.abs_error_estimate <= tol;
  result.status = result.converged ? QuadStatus::Converged : QuadStatus::NotConverged;
  return result;
}

std::shared_ptr<const QuadratureRule> golub_welsch(int m, const std::vector<double>& beta, double mu0) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(std::max(0, m - 1));
  for (int k = 1; k < m; ++k) sub[k - 1] = std::sqrt(beta[k]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  auto rule = std::make_shared<QuadratureRule>();
  rule->nodes.resize(m);
  rule->weights.resize(m);
  for (int i = 0; i < m; ++i) {
    rule->nodes[i] = solver.eigenvalues()[i];
    const double v = solver.eigenvectors()(0, i);
    rule->weights[i] = mu0 * v * v;
  }
  // Enforce the exact +/- symmetry of an even weight.
  for (int i = 0; i < m / 2; ++i) {
    const int j = m - 1 - i;
    const double x = 0.5 * (rule->nodes[j] - rule->nodes[i]);
    const double w = 0.5 * (rule->weights[i] + rule->weights[j]);
    rule->nodes[i] = -x;
    rule->nodes[j] = x;
    rule->weights[i] = rule->weights[j] = w;
  }
  if (m % 2 == 1) rule->nodes[m / 2] = 0.0;
  return rule;
}

}  // namespace

QuadResult integrate_adaptive(const RealFunction& f, double a, double b, double tol) {
  return integrate_adaptive(f, a, b, AdaptiveOptions{tol, 0.0, 20000});
}

QuadResult integrate_adaptive(const RealFunction& f, double a, double b, const AdaptiveOptions& opts) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidArgument("integrate_adaptive: need finite a < b");
  }
  const std::array<double, 2> pts = {a, b};
  return adaptive_core(f, pts, opts);
}

QuadResult integrate_breakpoints(const RealFunction& f, std::span<const double> points, const AdaptiveOptions& opts) {
  if (points.size() < 2) throw InvalidArgument("integrate_breakpoints: need at least two points");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] <= points[i + 1])) throw InvalidArgument("integrate_breakpoints: points must be sorted");
  }
  return adaptive_core(f, points, opts);
}

QuadResult integrate_panels(const RealFunction& f, double a, double b, double max_panel_width,
                            const AdaptiveOptions& opts) {
  if (!(a < b)) {
    QuadResult empty;
    empty.converged = true;
    empty.status = QuadStatus::Converged;
    return empty;
  }
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_panel_width)));
  std::vector<double> pts(n + 1);
  for (std::size_t i = 0; i <= n; ++i) pts[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
  pts.back() = b;
  AdaptiveOptions o = opts;
  o.max_intervals = std::max(o.max_intervals, 4 * n);
  return adaptive_core(f, pts, o);
}

std::complex<double> OscillatoryExpansion::evaluate(double t) const {
  std::complex<double> total = 0.0;
  const double inv = 1.0 / t;
  for (const auto& c : components) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = c.coeffs.size(); k-- > 0;) acc = acc * inv + c.coeffs[k];
    total += acc * std::exp(std::complex<double>(0.0, c.frequency * t));
  }
  return total * std::pow(t, power);
}

OscillatoryExpansion multiply(const OscillatoryExpansion& a, const OscillatoryExpansion& b, int order) {
  OscillatoryExpansion out;
  out.power = a.power + b.power;
  out.valid_from = std::max(a.valid_from, b.valid_from);
  for (const auto& ca : a.components) {
    for (const auto& cb : b.components) {
      const double freq = ca.frequency + cb.frequency;
      std::vector<std::complex<double>> conv(order + 1, 0.0);
      for (std::size_t i = 0; i < ca.coeffs.size() && i <= static_cast<std::size_t>(order); ++i) {
        for (std::size_t j = 0; j < cb.coeffs.size() && i + j <= static_cast<std::size_t>(order); ++j) {
          conv[i + j] += ca.coeffs[i] * cb.coeffs[j];
        }
      }
      auto it = std::find_if(out.components.begin(), out.components.end(), [&](const auto& c) {
        return std::abs(c.frequency - freq) <= 1e-12 * std::max(1.0, std::abs(freq));
      });
      if (it == out.components.end()) {
        out.components.push_back({freq, std::move(conv)});
      } else {
        for (int k = 0; k <= order; ++k) it->coeffs[k] += conv[k];
      }
    }
  }
  for (auto& c : out.components) {
    if (std::abs(c.frequency) < 1e-12) c.frequency = 0.0;
  }
  return out;
}

OscillatoryExpansion jd_expansion(int d, double c, int order) {
  if (!(c > 0.0)) throw InvalidArgument("jd_expansion: scale must be > 0");
  const auto nu_order = specfun::BesselOrder::from_dimension(d);
  const double nu = nu_order.value();
  const double phi = 0.25 * (d - 1) * kPi;
  const double amp = 0.5 * specfun::jd_envelope_constant(d) * std::pow(c, -(nu + 0.5));
  std::vector<double> a(order + 1);
  a[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    const double odd = 2.0 * k - 1.0;
    a[k] = a[k - 1] * (4.0 * nu * nu - odd * odd) / (8.0 * k);
  }
  OscillatoryExpansion e;
  e.power = -(nu + 0.5);
  // The Hankel series is sharp once c t exceeds ~30 + 2 nu^2.
  e.valid_from = (30.0 + 2.0 * nu * nu) / c;
  for (double sigma : {1.0, -1.0}) {
    OscillatoryExpansion::Component comp;
    comp.frequency = sigma * c;
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, -sigma * phi));
    std::complex<double> ik = 1.0;
    const std::complex<double> step(0.0, sigma);
    double cpow = 1.0;
    for (int k = 0; k <= order; ++k) {
      comp.coeffs.push_back(amp * phase * ik * a[k] * cpow);
      ik *= step;
      cpow /= c;
    }
    e.components.push_back(std::move(comp));
  }
  return e;
}

std::complex<double> fourier_power_tail(double w, double s, double T) {
  if (w == 0.0 || !(s < 0.0) || !(T > 0.0)) {
    throw InvalidArgument("fourier_power_tail: need w != 0, s < 0, T > 0");
  }
  OscillatoryExpansion e;
  e.power = s;
  e.valid_from = T;
  e.components.push_back({w, {1.0}});
  OscillatoryIntegrand g;
  g.expansion = e;
  g.evaluator = [&](double t) { return std::cos(w * t) * std::pow(t, s); };
  g.phase_period = kPi / std::abs(w);
  // Imaginary part: run the same model with a rotated coefficient.
  auto run = [&](std::complex<double> coeff) {
    OscillatoryIntegrand h = g;
    h.expansion->components[0].coeffs[0] = coeff;
    h.evaluator = [&, coeff](double t) {
      return (coeff * std::exp(std::complex<double>(0.0, w * t))).real() * std::pow(t, s);
    };
    return tail_with_expansion(h, T, 1e-14).value;
  };
  return {run(1.0), run(std::complex<double>(0.0, -1.0))};
}

double levin_u(std::span<const double> partial_sums, std::span<const double> terms, std::size_t n, std::size_t k,
               double beta) {
  if (n + k >= partial_sums.size() || partial_sums.size() != terms.size()) {
    throw InvalidArgument("levin_u: sequence too short");
  }
  double num = 0.0, den = 0.0;
  double binom = 1.0;
  const double base = beta + static_cast<double>(n + k);
  for (std::size_t j = 0; j <= k; ++j) {
    const double idx = beta + static_cast<double>(n + j);
    const double a = terms[n + j];
    if (a == 0.0) return partial_sums[n + j];
    const double ratio = std::pow(idx / base, static_cast<double>(k) - 1.0);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    const double w = sign * binom * ratio / (idx * a);
    num += w * partial_sums[n + j];
    den += w;
    binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
  }
  return num / den;
}

QuadResult integrate_oscillatory_tail(const OscillatoryIntegrand& g, double a, double tol) {
  if (!g.evaluator) throw InvalidArgument("integrate_oscillatory_tail: missing evaluator");
  if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("integrate_oscillatory_tail: need finite a >= 0");
  if (!(g.phase_period > 0.0)) throw InvalidArgument("integrate_oscillatory_tail: phase_period must be > 0");
  if (g.decay_exponent <= 0.0) {
    QuadResult r;
    r.status = QuadStatus::Divergent;
    r.value = std::numeric_limits<double>::infinity();
    r.abs_error_estimate = std::numeric_limits<double>::infinity();
    return r;
  }
  if (g.expansion) return tail_with_expansion(g, a, tol);
  return tail_with_levin(g, a, tol);
}

std::shared_ptr<const QuadratureRule> gauss_jacobi_symmetric(specfun::BesselOrder nu, int m) {
  if (m < 1 || m > kMaxGaussNodes) throw InvalidArgument("gauss_jacobi_symmetric: node count out of range");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const QuadratureRule>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(nu.twice(), m);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const double mu = nu.value();
  std::vector<double> beta(m, 0.0);
  if (m > 1) beta[1] = 1.0 / (2.0 * (1.0 + mu));
  for (int k = 2; k < m; ++k) beta[k] = k * (k + 2.0 * mu - 1.0) / (4.0 * (k + mu) * (k + mu - 1.0));
  const double mu0 = std::exp(0.5 * std::log(kPi) + specfun::log_gamma(mu + 0.5) - specfun::log_gamma(mu + 1.0));
  auto rule = golub_welsch(m, beta, mu0);
  cache.emplace(key, rule);
  return rule;
}

QuadratureRule gauss_legendre(int m, double a, double b) {
  const auto base = gauss_jacobi_symmetric(specfun::BesselOrder::from_twice(1), m);
  QuadratureRule out;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < m; ++i) {
    out.nodes.push_back(mid + half * base->nodes[i]);
    out.weights.push_back(half * base->weights[i]);
  }
  return out;
}

std::shared_ptr<const QuadratureRule> gauss_hermite_probabilists(int m) {
  if (m < 1 || m > 200) throw InvalidArgument("gauss_hermite_probabilists: node count out of range");
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  if (auto it = cache.find(m); it != cache.end()) return it->second;
  std::vector<double> beta(m);
  for (int k = 1; k < m; ++k) beta[k] = k;
  auto rule = golub_welsch(m, beta, 1.0);
  cache.emplace(m, rule);
  return rule;
}

}  // namespace polyspec::quadrature
