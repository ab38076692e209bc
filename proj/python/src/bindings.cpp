#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include "polyspec/cli.hpp"
#include "polyspec/errors.hpp"
#include "polyspec/fieldsim.hpp"
#include "polyspec/geometry.hpp"
#include "polyspec/specfun.hpp"
#include "polyspec/variance.hpp"
#include "polyspec/walk.hpp"

namespace py = pybind11;
using namespace polyspec;

namespace {

geometry::Geometry parse_geometry(const std::string& g) {
  if (g == "euclidean") return geometry::Geometry::Euclidean;
  if (g == "spherical") return geometry::Geometry::Spherical;
  throw InvalidArgument("geometry must be 'euclidean' or 'spherical'");
}

variance::PolyspectrumSpec make_spec(const std::string& geometry, int d, int q, double R, double freq) {
  variance::PolyspectrumSpec s;
  s.field.geometry = parse_geometry(geometry);
  s.field.d = d;
  if (s.field.geometry == geometry::Geometry::Spherical) {
    if (freq != static_cast<int>(freq)) throw InvalidArgument("spherical degree must be an integer");
    s.field.ell = static_cast<int>(freq);
  } else {
    s.field.lambda = freq;
  }
  s.q = q;
  s.R = R;
  return s;
}

py::dict estimate_dict(const variance::VarianceEstimate& e) {
  py::dict out;
  out["value"] = e.value;
  out["method"] = variance::to_string(e.method);
  out["error"] = e.error;
  out["ci"] = py::make_tuple(e.ci_lo, e.ci_hi);
  out["regime"] = variance::to_string(e.regime);
  out["converged"] = e.converged;
  return out;
}

walk::DensityRoute parse_density_route(const std::string& r) {
  if (r == "closed") return walk::DensityRoute::ClosedForm2;
  if (r == "kluyver") return walk::DensityRoute::Kluyver;
  if (r == "recursion") return walk::DensityRoute::Recursion;
  if (r == "mc") return walk::DensityRoute::MonteCarlo;
  throw InvalidArgument("route must be closed, kluyver, recursion or mc");
}

walk::IdqRoute parse_idq_route(const std::string& r) {
  if (r == "direct") return walk::IdqRoute::DirectIntegral;
  if (r == "recursion") return walk::IdqRoute::RecursionEndpoint;
  if (r == "closed") return walk::IdqRoute::ClosedForm;
  throw InvalidArgument("route must be direct, recursion or closed");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random-wave polyspectrum variances, random-walk densities and I^d_q";
  m.attr("__version__") = kVersion;

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<FactorizationError>(m, "FactorizationError", PyExc_ArithmeticError);

  m.def("jd", &specfun::jd, py::arg("d"), py::arg("r"));
  m.def("hermite", &specfun::hermite, py::arg("q"), py::arg("t"));
  m.def(
      "gegenbauer", [](int d, int ell, double t) { return specfun::gegenbauer({d, ell}, t); }, py::arg("d"),
      py::arg("ell"), py::arg("t"));
  m.def(
      "hilb_main_term", [](int d, int ell, double theta) { return specfun::hilb_main_term({d, ell}, theta); },
      py::arg("d"), py::arg("ell"), py::arg("theta"));

  m.def(
      "density",
      [](int d, int n, std::vector<double> grid, const std::string& route, std::uint64_t seed, std::size_t samples) {
        const auto c = walk::density_curve({d, n}, grid, parse_density_route(route), 1e-10, seed, samples);
        return py::make_tuple(py::array(py::cast(c.values)), py::array(py::cast(c.errors)));
      },
      py::arg("d"), py::arg("n"), py::arg("grid"), py::arg("route") = "recursion", py::arg("seed") = 42,
      py::arg("samples") = 1000000);
  m.def(
      "walk_cdf", [](int d, int n, double r) { return walk::walk_cdf({d, n}, r); }, py::arg("d"), py::arg("n"),
      py::arg("r"));
  m.def(
      "sample_walk",
      [](int d, int n, std::size_t samples, std::uint64_t seed) {
        return py::array(py::cast(walk::sample_walk({d, n}, samples, seed)));
      },
      py::arg("d"), py::arg("n"), py::arg("samples"), py::arg("seed") = 42);
  m.def(
      "classify_idq", [](int d, int q) { return std::string(walk::to_string(walk::classify_idq(d, q))); },
      py::arg("d"), py::arg("q"));
  m.def(
      "idq",
      [](int d, int q, const std::string& route) -> py::object {
        const auto r = walk::idq(d, q, parse_idq_route(route));
        if (!r.value) return py::none();
        return py::float_(*r.value);
      },
      py::arg("d"), py::arg("q"), py::arg("route") = "direct");

  m.def(
      "weight",
      [](const std::string& geometry, int d, double R, double r) {
        return parse_geometry(geometry) == geometry::Geometry::Euclidean ? geometry::weight_euclidean(d, R, r)
                                                                         : geometry::weight_spherical(d, R, r);
      },
      py::arg("geometry"), py::arg("d"), py::arg("R"), py::arg("r"));

  m.def(
      "variance_exact",
      [](const std::string& geometry, int d, int q, double R, double freq) {
        return estimate_dict(variance::variance_exact(make_spec(geometry, d, q, R, freq)));
      },
      py::arg("geometry"), py::arg("d"), py::arg("q"), py::arg("R"), py::arg("freq"));
  m.def(
      "variance_asymptotic",
      [](const std::string& geometry, int d, int q, double R, double freq) {
        return estimate_dict(variance::variance_asymptotic(make_spec(geometry, d, q, R, freq)));
      },
      py::arg("geometry"), py::arg("d"), py::arg("q"), py::arg("R"), py::arg("freq"));
  m.def("idq_value", &variance::idq_value, py::arg("d"), py::arg("q"));
  m.def("hermite_covariance_identity_check", &variance::hermite_covariance_identity_check, py::arg("q"),
        py::arg("rho"));

  m.def(
      "build_domain",
      [](const std::string& geometry, int d, double R, int resolution) {
        const auto dom = fieldsim::build_domain(parse_geometry(geometry), d, R, resolution);
        py::array_t<double> pts({dom.points.size(), static_cast<std::size_t>(dom.points.dim)});
        std::copy(dom.points.coords.begin(), dom.points.coords.end(), pts.mutable_data());
        return py::make_tuple(pts, py::array(py::cast(dom.weights)));
      },
      py::arg("geometry"), py::arg("d"), py::arg("R"), py::arg("resolution"));
  m.def(
      "mc_variance",
      [](const std::string& geometry, int d, int q, double R, double freq, std::size_t trials, int resolution,
         const std::string& sampler, std::uint64_t seed) {
        const auto spec = make_spec(geometry, d, q, R, freq);
        fieldsim::FieldSampler s;
        s.spec = spec.field;
        s.seed = seed;
        if (sampler == "planewaves") s.method = fieldsim::SamplerMethod::PlaneWaves;
        else if (sampler != "cholesky") throw InvalidArgument("sampler must be cholesky or planewaves");
        const auto mc = fieldsim::mc_polyspectrum_variance(
            spec, s, fieldsim::build_domain(spec.field.geometry, d, R, resolution), trials);
        py::dict out;
        out["value"] = mc.estimate;
        out["ci"] = py::make_tuple(mc.ci_lo, mc.ci_hi);
        out["trials"] = mc.trials;
        out["nugget"] = mc.nugget_used;
        return out;
      },
      py::arg("geometry"), py::arg("d"), py::arg("q"), py::arg("R"), py::arg("freq"), py::arg("trials") = 2000,
      py::arg("resolution") = 16, py::arg("sampler") = "cholesky", py::arg("seed") = 42);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
