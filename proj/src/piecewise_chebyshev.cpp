#include "piecewise_chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polyspec/errors.hpp"

namespace polyspec::detail {

std::vector<double> PiecewiseChebyshev::panel_edges(const std::vector<double>& breaks, int levels) {
  std::vector<double> edges;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a);
    std::vector<double> left, right;
    for (int k = levels; k >= 1; --k) {
      const double off = half * std::ldexp(1.0, -k);
      left.push_back(a + off);
      right.push_back(b - off);
    }
    edges.push_back(a);
    edges.insert(edges.end(), left.begin(), left.end());
    edges.push_back(a + half);
    edges.insert(edges.end(), right.rbegin(), right.rend());
  }
  if (!breaks.empty()) edges.push_back(breaks.back());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

void PiecewiseChebyshev::init_reference(int degree) {
  npts_ = degree + 1;
  ref_nodes_.resize(npts_);
  bary_.resize(npts_);
  // Chebyshev points of the first kind (never on the panel edges).
  for (int j = 0; j < npts_; ++j) {
    const double angle = (2.0 * j + 1.0) * std::numbers::pi / (2.0 * npts_);
    ref_nodes_[j] = -std::cos(angle);
    bary_[j] = ((j % 2) ? -1.0 : 1.0) * std::sin(angle);
  }
}

std::vector<double> PiecewiseChebyshev::nodes_for(const std::vector<double>& breaks, const Options& opts) {
  PiecewiseChebyshev tmp;
  tmp.init_reference(opts.degree);
  const auto edges = panel_edges(breaks, opts.grading_levels);
  std::vector<double> out;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (double s : tmp.ref_nodes_) out.push_back(mid + half * s);
  }
  return out;
}

PiecewiseChebyshev::PiecewiseChebyshev(const std::vector<double>& breaks, const Options& opts,
                                       const std::vector<double>& values) {
  init_reference(opts.degree);
  edges_ = panel_edges(breaks, opts.grading_levels);
  if (edges_.size() < 2 || values.size() != (edges_.size() - 1) * npts_) {
    throw InvalidArgument("PiecewiseChebyshev: value count does not match the node layout");
  }
  values_ = values;
}

PiecewiseChebyshev::PiecewiseChebyshev(const std::function<double(double)>& f, const std::vector<double>& breaks,
                                       const Options& opts) {
  const auto nodes = nodes_for(breaks, opts);
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = f(nodes[i]);
  *this = PiecewiseChebyshev(breaks, opts, values);
}

double PiecewiseChebyshev::operator()(double x) const {
  if (edges_.empty() || !(x >= edges_.front() && x <= edges_.back())) return 0.0;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  std::size_t p = static_cast<std::size_t>(it - edges_.begin());
  p = std::min(std::max<std::size_t>(p, 1), edges_.size() - 1) - 1;
  const double a = edges_[p], b = edges_[p + 1];
  const double s = (2.0 * x - a - b) / (b - a);
  const double* v = values_.data() + p * npts_;
  double num = 0.0, den = 0.0;
  for (int j = 0; j < npts_; ++j) {
    const double diff = s - ref_nodes_[j];
    if (diff == 0.0) return v[j];
    const double w = bary_[j] / diff;
    num += w * v[j];
    den += w;
  }
  return num / den;
}

}  // namespace polyspec::detail
