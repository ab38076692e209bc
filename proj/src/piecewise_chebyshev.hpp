#pragma once

#include <functional>
#include <vector>

namespace polyspec::detail {

// Piecewise Chebyshev interpolant on [breaks.front(), breaks.back()], with
// panels graded geometrically toward every breakpoint so that algebraic or
// logarithmic behaviour at the breakpoints is resolved. Zero outside.
class PiecewiseChebyshev {
 public:
  struct Options {
    int degree = 16;
    int grading_levels = 32;
  };

  PiecewiseChebyshev() = default;
  PiecewiseChebyshev(const std::function<double(double)>& f, const std::vector<double>& breaks,
                     const Options& opts);
  // Builds from caller-evaluated node values: first collect nodes(), then
  // pass the values in the same order.
  static std::vector<double> nodes_for(const std::vector<double>& breaks, const Options& opts);
  PiecewiseChebyshev(const std::vector<double>& breaks, const Options& opts, const std::vector<double>& values);

  double operator()(double x) const;
  double lower() const { return edges_.empty() ? 0.0 : edges_.front(); }
  double upper() const { return edges_.empty() ? 0.0 : edges_.back(); }
  bool empty() const { return edges_.empty(); }

 private:
  static std::vector<double> panel_edges(const std::vector<double>& breaks, int levels);
  void init_reference(int degree);

  std::vector<double> edges_;
  std::vector<double> values_;  // (degree + 1) per panel
  std::vector<double> ref_nodes_;
  std::vector<double> bary_;
  int npts_ = 0;
};

}  // namespace polyspec::detail
