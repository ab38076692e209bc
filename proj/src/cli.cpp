#include "polyspec/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "polyspec/errors.hpp"
#include "polyspec/fieldsim.hpp"
#include "polyspec/parallel.hpp"
#include "polyspec/variance.hpp"
#include "polyspec/walk.hpp"

namespace polyspec::cli {

namespace {

using nlohmann::ordered_json;

struct Null {};
using Cell = std::variant<Null, double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_cell(const Cell& c) {
  if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
  if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  return "";
}

ordered_json json_cell(const Cell& c) {
  if (std::holds_alternative<double>(c)) {
    const double v = std::get<double>(c);
    if (std::isfinite(v)) return v;
    return format_number(v);
  }
  if (std::holds_alternative<long long>(c)) return std::get<long long>(c);
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  return nullptr;
}

struct Common {
  std::uint64_t seed = 42;
  std::string format;
  std::string output;
  std::string config;
  int threads = 0;
  bool timing = false;
};

Cell opt_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{Null{}}; }

// ---- density --------------------------------------------------------------

struct DensityArgs {
  int d = 2, n = 2, points = 20;
  std::optional<double> r_min, r_max;
  std::string route;
  double tol = 1e-10;
  std::size_t samples = 1000000;
};

Table run_density(const DensityArgs& a, const Common& c, ordered_json& inputs) {
  const walk::WalkSpec spec{a.d, a.n};
  const double lo = a.r_min.value_or(0.1), hi = a.r_max.value_or(a.n - 0.1);
  if (a.points < 1) throw InvalidArgument("--points must be >= 1");
  if (a.points > 1 && !(hi > lo)) throw InvalidArgument("--r-max must exceed --r-min");
  std::string route = a.route.empty() ? (a.n == 2 ? "closed" : "recursion") : a.route;
  walk::DensityRoute r = walk::DensityRoute::Recursion;
  if (route == "closed") r = walk::DensityRoute::ClosedForm2;
  else if (route == "kluyver") r = walk::DensityRoute::Kluyver;
  else if (route == "mc") r = walk::DensityRoute::MonteCarlo;

  std::vector<double> grid;
  for (int i = 0; i < a.points; ++i) grid.push_back(a.points == 1 ? lo : lo + (hi - lo) * i / (a.points - 1));

  inputs = {{"subcommand", "density"}, {"d", a.d},         {"n", a.n},     {"r_min", lo},
            {"r_max", hi},             {"points", a.points}, {"route", route}, {"tol", a.tol}};
  if (r == walk::DensityRoute::MonteCarlo) inputs["samples"] = a.samples;

  const auto curve = walk::density_curve(spec, grid, r, a.tol, c.seed, a.samples, c.threads);
  Table t{{"r", "rho", "err", "route"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], curve.values[i], curve.errors[i], std::string(walk::to_string(curve.route))});
  }
  return t;
}

// ---- constant -------------------------------------------------------------

struct ConstantArgs {
  int d = 3, q = 3;
  std::string route;
  double tol = 1e-11;
};

Table run_constant(const ConstantArgs& a, ordered_json& inputs) {
  std::string route = a.route.empty() ? (walk::has_closed_form(a.d, a.q) ? "closed" : "direct") : a.route;
  walk::IdqRoute r = walk::IdqRoute::DirectIntegral;
  if (route == "closed") r = walk::IdqRoute::ClosedForm;
  else if (route == "recursion") r = walk::IdqRoute::RecursionEndpoint;
  inputs = {{"subcommand", "constant"}, {"d", a.d}, {"q", a.q}, {"route", route}, {"tol", a.tol}};

  walk::IdqResult res;
  if (walk::classify_idq(a.d, a.q) == walk::Convergence::Divergent) {
    res.d = a.d;
    res.q = a.q;
    res.classification = walk::Convergence::Divergent;
    res.route = r;
  } else {
    res = walk::idq(a.d, a.q, r, a.tol);
  }
  Table t{{"d", "q", "classification", "value", "error", "route"}, {}};
  t.rows.push_back({static_cast<long long>(a.d), static_cast<long long>(a.q),
                    std::string(walk::to_string(res.classification)), opt_cell(res.value), opt_cell(res.error),
                    std::string(walk::to_string(res.route))});
  return t;
}

// ---- variance -------------------------------------------------------------

struct VarianceArgs {
  std::string geometry = "euclidean";
  int d = 2, q = 3;
  double R = 1.0;
  std::optional<double> freq;
  std::string freq_grid;
  std::string method = "exact";
  std::size_t trials = 2000;
  int resolution = 16;
  std::string sampler = "cholesky";
  int waves = 1024;
  double nugget = 0.0;
};

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InvalidArgument("--freq-grid: cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("--freq-grid is empty");
  return out;
}

double regime_scale(variance::Regime regime, int d, double f) {
  switch (regime) {
    case variance::Regime::Generic: return std::pow(f, d);
    case variance::Regime::Q2: return std::pow(f, d - 1);
    case variance::Regime::D2Q4: return f * f / std::log(f);
    case variance::Regime::ParityZero: return 1.0;
  }
  return 1.0;
}

struct VarianceRun {
  Table table;
  bool converged = true;
};

VarianceRun run_variance(const VarianceArgs& a, const Common& c, ordered_json& inputs) {
  const bool spherical = a.geometry == "spherical";
  const bool grid_mode = !a.freq_grid.empty();
  const std::vector<double> freqs = grid_mode ? parse_grid(a.freq_grid) : std::vector<double>{*a.freq};

  std::vector<variance::PolyspectrumSpec> specs;
  for (double f : freqs) {
    variance::PolyspectrumSpec s;
    s.field.geometry = spherical ? geometry::Geometry::Spherical : geometry::Geometry::Euclidean;
    s.field.d = a.d;
    if (spherical) {
      if (!(f >= 0.0) || f != std::floor(f) || f > 1e9) throw InvalidArgument("spherical degree must be a non-negative integer");
      s.field.ell = static_cast<int>(f);
    } else {
      s.field.lambda = f;
    }
    s.q = a.q;
    s.R = a.R;
    variance::validate(s);
    specs.push_back(s);
  }

  inputs = {{"subcommand", "variance"}, {"geometry", a.geometry}, {"d", a.d}, {"q", a.q}, {"R", a.R},
            {"freq", freqs},            {"method", a.method}};
  if (a.method == "mc") {
    inputs["trials"] = a.trials;
    inputs["resolution"] = a.resolution;
    inputs["sampler"] = a.sampler;
    if (a.sampler == "planewaves") inputs["waves"] = a.waves;
    inputs["nugget"] = a.nugget;
  }

  std::vector<variance::VarianceEstimate> est(specs.size());
  if (a.method == "mc") {
    const auto domain = fieldsim::build_domain(specs[0].field.geometry, a.d, a.R, a.resolution);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      fieldsim::FieldSampler sampler;
      sampler.spec = specs[i].field;
      sampler.method =
          a.sampler == "planewaves" ? fieldsim::SamplerMethod::PlaneWaves : fieldsim::SamplerMethod::CovarianceFactor;
      sampler.n_waves = a.waves;
      sampler.nugget = a.nugget;
      sampler.seed = c.seed;
      const auto mc = fieldsim::mc_polyspectrum_variance(specs[i], sampler, domain, a.trials, c.threads);
      auto& e = est[i];
      e.spec = specs[i];
      e.value = mc.estimate;
      e.method = variance::Method::MonteCarlo;
      e.ci_lo = mc.ci_lo;
      e.ci_hi = mc.ci_hi;
      e.error = 0.5 * (mc.ci_hi - mc.ci_lo);
      e.regime = variance::regime_of(specs[i]);
    }
  } else {
    const bool exact = a.method == "exact";
    parallel_for(specs.size(), resolve_threads(c.threads), [&](std::size_t i) {
      est[i] = exact ? variance::variance_exact(specs[i]) : variance::variance_asymptotic(specs[i]);
    });
  }

  VarianceRun run;
  run.table.header = {"freq", "value", "method", "err_lo", "err_hi", "regime"};
  if (grid_mode) {
    run.table.header.push_back("scaled");
    run.table.header.push_back("prediction");
    run.table.header.push_back("ratio");
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& e = est[i];
    run.converged = run.converged && e.converged;
    std::vector<Cell> row = {freqs[i], e.value, std::string(variance::to_string(e.method)), e.ci_lo, e.ci_hi,
                             std::string(variance::to_string(e.regime))};
    if (grid_mode) {
      const double pred = variance::variance_asymptotic(specs[i]).value;
      row.push_back(e.value * regime_scale(e.regime, a.d, freqs[i]));
      row.push_back(pred);
      row.push_back(pred != 0.0 ? e.value / pred : std::numeric_limits<double>::quiet_NaN());
    }
    run.table.rows.push_back(std::move(row));
  }
  return run;
}

// ---- table ----------------------------------------------------------------

Table run_table(ordered_json& inputs) {
  inputs = {{"subcommand", "table"}, {"d", {2, 6}}, {"q", {2, 8}}};
  Table t{{"d", "q", "classification", "closed", "direct", "recursion", "delta_direct", "delta_recursion",
           "delta_routes"},
          {}};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int d = 2; d <= 6; ++d) {
    for (int q = 2; q <= 8; ++q) {
      const auto cls = walk::classify_idq(d, q);
      std::vector<Cell> row = {static_cast<long long>(d), static_cast<long long>(q), std::string(walk::to_string(cls))};
      if (cls == walk::Convergence::Divergent) {
        const Cell none = walk::has_closed_form(d, q) ? Cell{kInf} : Cell{Null{}};
        row.insert(row.end(), {none, kInf, kInf, Null{}, Null{}, Null{}});
        t.rows.push_back(std::move(row));
        continue;
      }
      std::optional<double> closed;
      if (walk::has_closed_form(d, q)) closed = walk::idq(d, q, walk::IdqRoute::ClosedForm).value;
      const double direct = *walk::idq(d, q, walk::IdqRoute::DirectIntegral).value;
      const double rec = *walk::idq(d, q, walk::IdqRoute::RecursionEndpoint).value;
      row.push_back(opt_cell(closed));
      row.push_back(direct);
      row.push_back(rec);
      row.push_back(closed ? Cell{std::abs(direct - *closed)} : Cell{Null{}});
      row.push_back(closed ? Cell{std::abs(rec - *closed)} : Cell{Null{}});
      row.push_back(std::abs(direct - rec));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

// ---- plumbing -------------------------------------------------------------

// Appends key=value pairs from --config for every key not given as a flag.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  auto given = [&](const std::string& flag) {
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    for (char& ch : key) {
      if (ch == '_') ch = '-';
    }
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value == "true") {
      extra.push_back(flag);
    } else if (value != "false") {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

void write_output(const Table& t, const ordered_json& inputs, const Common& c, const std::string& format,
                  double seconds, std::ostream& out) {
  if (format == "json") {
    ordered_json doc;
    doc["inputs"] = inputs;
    ordered_json results = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json obj = ordered_json::object();
      for (std::size_t k = 0; k < t.header.size(); ++k) obj[t.header[k]] = json_cell(row[k]);
      results.push_back(obj);
    }
    doc["results"] = results;
    doc["meta"] = {{"seed", c.seed}, {"version", kVersion}};
    if (c.timing) doc["meta"]["wall_time_s"] = seconds;
    out << doc.dump(2) << "\n";
    return;
  }
  for (std::size_t k = 0; k < t.header.size(); ++k) out << (k ? "," : "") << t.header[k];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << csv_cell(row[k]);
    out << "\n";
  }
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random-wave polyspectrum variances, random-walk densities and the constants I^d_q", "polyspec"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Master seed")->capture_default_str();
  app.add_option("--format", common.format, "Output format (csv or json)")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--output", common.output, "Write rows to this file instead of stdout");
  app.add_option("--threads", common.threads, "Worker threads (overrides POLYSPEC_THREADS)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--config", common.config, "Flat key=value file; flags take precedence");
  app.add_flag("--timing", common.timing, "Report wall time");

  DensityArgs da;
  auto* density = app.add_subcommand("density", "Density of |X_n| for the uniform random flight on a grid");
  density->add_option("--d", da.d, "Dimension")->capture_default_str();
  density->add_option("--n", da.n, "Number of steps")->capture_default_str();
  density->add_option("--r-min", da.r_min, "First grid point (default 0.1)");
  density->add_option("--r-max", da.r_max, "Last grid point (default n - 0.1)");
  density->add_option("--points", da.points, "Grid size")->capture_default_str();
  density->add_option("--route", da.route, "closed, kluyver, recursion or mc")
      ->check(CLI::IsMember({"closed", "kluyver", "recursion", "mc"}));
  density->add_option("--tol", da.tol, "Quadrature tolerance")->capture_default_str();
  density->add_option("--samples", da.samples, "Monte Carlo samples")->capture_default_str();

  ConstantArgs ca;
  auto* constant = app.add_subcommand("constant", "The constant I^d_q = int_0^inf j_d(t)^q t^(d-1) dt");
  constant->add_option("--d", ca.d, "Dimension")->capture_default_str();
  constant->add_option("--q", ca.q, "Power")->capture_default_str();
  constant->add_option("--route", ca.route, "direct, recursion or closed")
      ->check(CLI::IsMember({"direct", "recursion", "closed"}));
  constant->add_option("--tol", ca.tol, "Tolerance")->capture_default_str();

  VarianceArgs va;
  auto* var = app.add_subcommand("variance", "Variance of the order-q polyspectrum over a ball or cap");
  var->add_option("--geometry", va.geometry, "euclidean or spherical")
      ->check(CLI::IsMember({"euclidean", "spherical"}))
      ->capture_default_str();
  var->add_option("--d", va.d, "Dimension")->capture_default_str();
  var->add_option("--q", va.q, "Hermite order")->capture_default_str();
  var->add_option("--R", va.R, "Domain radius")->capture_default_str();
  auto* freq = var->add_option("--freq", va.freq, "Wavenumber lambda or degree ell");
  auto* grid = var->add_option("--freq-grid", va.freq_grid, "Comma-separated frequencies");
  freq->excludes(grid);
  grid->excludes(freq);
  var->add_option("--method", va.method, "exact, asym or mc")
      ->check(CLI::IsMember({"exact", "asym", "mc"}))
      ->capture_default_str();
  var->add_option("--trials", va.trials, "Monte Carlo trials")->capture_default_str();
  var->add_option("--resolution", va.resolution, "Monte Carlo quadrature resolution")->capture_default_str();
  var->add_option("--sampler", va.sampler, "cholesky or planewaves")
      ->check(CLI::IsMember({"cholesky", "planewaves"}))
      ->capture_default_str();
  var->add_option("--waves", va.waves, "Plane waves per draw")->capture_default_str();
  var->add_option("--nugget", va.nugget, "Initial diagonal shift")->capture_default_str();

  auto* table = app.add_subcommand("table", "Table of I^d_q for d <= 6, q <= 8 with route deltas");

  try {
    auto args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (var->parsed() && !va.freq && va.freq_grid.empty()) {
    err << "error: variance needs --freq or --freq-grid\n";
    return kUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  ordered_json inputs;
  Table result;
  std::string format = common.format;
  int code = kOk;
  try {
    if (density->parsed()) {
      result = run_density(da, common, inputs);
    } else if (constant->parsed()) {
      result = run_constant(ca, inputs);
      if (format.empty()) format = "json";
    } else if (var->parsed()) {
      auto run = run_variance(va, common, inputs);
      result = std::move(run.table);
      if (!run.converged) {
        err << "error: quadrature did not reach its tolerance\n";
        code = kNumerical;
      }
    } else if (table->parsed()) {
      result = run_table(inputs);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FactorizationError& e) {
    err << "error: " << e.what() << "\n";
    return kLinearAlgebra;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  if (format.empty()) format = "csv";
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!common.output.empty()) {
    std::ofstream file(common.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << common.output << "\n";
      return kUsage;
    }
    write_output(result, inputs, common, format, seconds, file);
  } else {
    write_output(result, inputs, common, format, seconds, out);
  }
  if (common.timing && format == "csv") err << "wall time " << seconds << " s\n";
  return code;
}

}  // namespace polyspec::cli
