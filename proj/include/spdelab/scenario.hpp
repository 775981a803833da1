#pragma once
// Scenario plumbing: strict JSON parsing (unknown keys and duplicate keys are
// errors), materialization of grid / coefficients / noise / data presets, and
// the report-writing runner behind the command line front end.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "spdelab/coefficients.hpp"
#include "spdelab/common.hpp"
#include "spdelab/cutoff.hpp"
#include "spdelab/estimates.hpp"
#include "spdelab/field.hpp"
#include "spdelab/green.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/nonlin.hpp"
#include "spdelab/norms.hpp"
#include "spdelab/solver.hpp"

namespace spdelab {

struct HarnessSpec {
  std::string kind;
  double tolerance = 1e-3;
  double theta = 0.0;
  double p = 2.0;
  int calibration = 50;
  int evaluation = 200;
  int ensemble = 200;     // comparison paths
  double shift = 0.0;     // comparison: second rate = first + shift
  double m = 0.0;         // barrier start
  double b = 0.0;         // barrier drift rate
  std::vector<double> sigma;  // barrier volatilities per mode
  double env_C = -1.0;    // envelope; negative means fit
  double env_rho = -1.0;
  double source_x = 0.5, source_y = 0.5;
};

struct Scenario {
  std::string name;
  Shape shape = Shape::interval;
  double h = 1.0 / 64;
  bool periodic = false;

  std::string coeff_preset = "identity";
  double coeff_scale = 1.0;
  double ax = 1.0, ay = 2.0;
  int mollify_n = 0;
  std::string coeff_table;
  double lambda_override = -1.0, Lambda_override = -1.0, bound_override = -1.0;

  std::string noise_preset = "sine-modes(2)";
  int noise_modes = 1;
  std::string noise_table;

  std::string f_str = "zero", g_str = "zero", h_str = "zero";
  double C = 0.0, alpha = 0.0;
  double beta = -1.0;  // negative: derived from the spectrum

  std::string xi_preset = "zero";
  double xi_amp = 1.0;
  double xi_value = 0.0;

  double T = 0.1;
  double dt = 1e-3;

  HarnessSpec harness;
  std::uint64_t seed = 1;

  int steps() const {
    const int k = static_cast<int>(std::llround(T / dt));
    SPDELAB_REQUIRE(k >= 1 && std::abs(k * dt - T) <= 1e-9 * std::max(1.0, T),
                    "scenario: dt must divide T");
    return k;
  }
};

namespace detail {

using njson = nlohmann::json;

inline njson parse_strict_json(const std::string& text, const std::string& what) {
  std::vector<std::set<std::string>> stack;
  auto cb = [&](int, njson::parse_event_t ev, njson& parsed) {
    if (ev == njson::parse_event_t::object_start) {
      stack.emplace_back();
    } else if (ev == njson::parse_event_t::object_end) {
      stack.pop_back();
    } else if (ev == njson::parse_event_t::key) {
      const std::string k = parsed.get<std::string>();
      if (!stack.back().insert(k).second)
        fail_precondition(what + ": duplicate key \"" + k + "\"");
    }
    return true;
  };
  try {
    return njson::parse(text, cb);
  } catch (const njson::parse_error& e) {
    fail_precondition(what + ": " + e.what());
  }
}

inline void reject_unknown(const njson& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) ok = true;
    if (!ok)
      fail_precondition("scenario: unknown key \"" + path + item.key() + "\"");
  }
}

inline double num(const njson& j, const std::string& path, const char* key,
                  double fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) fail_precondition("scenario: missing key \"" + path + key + "\"");
    return fallback;
  }
  if (!j[key].is_number())
    fail_precondition("scenario: key \"" + path + key + "\" must be a number");
  return j[key].get<double>();
}

inline std::string str(const njson& j, const std::string& path, const char* key,
                       const std::string& fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) fail_precondition("scenario: missing key \"" + path + key + "\"");
    return fallback;
  }
  if (!j[key].is_string())
    fail_precondition("scenario: key \"" + path + key + "\" must be a string");
  return j[key].get<std::string>();
}

// "name" or "name(a)" or "name(a,b,...)"
inline std::string split_args(const std::string& s, std::vector<double>& args) {
  args.clear();
  const auto open = s.find('(');
  if (open == std::string::npos) return s;
  SPDELAB_REQUIRE(s.back() == ')', "scenario: malformed preset \"" + s + "\"");
  std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::stringstream ss(inner);
  std::string tok;
  while (std::getline(ss, tok, ','))
    try {
      args.push_back(std::stod(tok));
    } catch (...) {
      fail_precondition("scenario: malformed preset argument in \"" + s + "\"");
    }
  return s.substr(0, open);
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Scenario parse_scenario_text(const std::string& text) {
  using detail::njson;
  njson j = detail::parse_strict_json(text, "parse_scenario");
  SPDELAB_REQUIRE(j.is_object(), "parse_scenario: top level must be an object");
  detail::reject_unknown(j, "", {"schema_version", "name", "domain", "coefficients",
                                 "noise", "nonlinear", "initial", "time", "harness",
                                 "seed"});
  Scenario s;
  if (j.contains("schema_version"))
    SPDELAB_REQUIRE(j["schema_version"] == kSchemaVersion,
                    "parse_scenario: unsupported schema_version");
  s.name = detail::str(j, "", "name", "", true);

  SPDELAB_REQUIRE(j.contains("domain"), "scenario: missing key \"domain\"");
  const njson& dom = j["domain"];
  detail::reject_unknown(dom, "domain.", {"shape", "h", "periodic"});
  const std::string shape = detail::str(dom, "domain.", "shape", "", true);
  if (shape == "interval") s.shape = Shape::interval;
  else if (shape == "rectangle") s.shape = Shape::rectangle;
  else if (shape == "lshape") s.shape = Shape::lshape;
  else fail_precondition("scenario: unknown shape \"" + shape + "\"");
  s.h = detail::num(dom, "domain.", "h", 0.0, true);
  SPDELAB_REQUIRE(s.h > 0.0, "scenario: domain.h must be positive");
  if (dom.contains("periodic")) s.periodic = dom["periodic"].get<bool>();

  if (j.contains("coefficients")) {
    const njson& co = j["coefficients"];
    detail::reject_unknown(co, "coefficients.",
                           {"preset", "scale", "ax", "ay", "mollify", "table",
                            "lambda", "Lambda", "bound"});
    s.coeff_preset = detail::str(co, "coefficients.", "preset", "identity");
    s.coeff_scale = detail::num(co, "coefficients.", "scale", 1.0);
    s.ax = detail::num(co, "coefficients.", "ax", 1.0);
    s.ay = detail::num(co, "coefficients.", "ay", 2.0);
    s.mollify_n = static_cast<int>(detail::num(co, "coefficients.", "mollify", 0.0));
    s.coeff_table = detail::str(co, "coefficients.", "table", "");
    s.lambda_override = detail::num(co, "coefficients.", "lambda", -1.0);
    s.Lambda_override = detail::num(co, "coefficients.", "Lambda", -1.0);
    s.bound_override = detail::num(co, "coefficients.", "bound", -1.0);
  }

  if (j.contains("noise")) {
    const njson& no = j["noise"];
    detail::reject_unknown(no, "noise.", {"preset", "modes", "table"});
    s.noise_preset = detail::str(no, "noise.", "preset", s.noise_preset);
    s.noise_modes = static_cast<int>(detail::num(no, "noise.", "modes", 1.0));
    s.noise_table = detail::str(no, "noise.", "table", "");
    SPDELAB_REQUIRE(s.noise_modes >= 1, "scenario: noise.modes must be at least 1");
  }

  if (j.contains("nonlinear")) {
    const njson& nl = j["nonlinear"];
    detail::reject_unknown(nl, "nonlinear.", {"f", "g", "h", "C", "alpha", "beta"});
    s.f_str = detail::str(nl, "nonlinear.", "f", "zero");
    s.g_str = detail::str(nl, "nonlinear.", "g", "zero");
    s.h_str = detail::str(nl, "nonlinear.", "h", "zero");
    s.C = detail::num(nl, "nonlinear.", "C", 0.0);
    s.alpha = detail::num(nl, "nonlinear.", "alpha", 0.0);
    s.beta = detail::num(nl, "nonlinear.", "beta", -1.0);
  }

  if (j.contains("initial")) {
    const njson& in = j["initial"];
    detail::reject_unknown(in, "initial.", {"preset", "amplitude", "value"});
    s.xi_preset = detail::str(in, "initial.", "preset", "zero");
    s.xi_amp = detail::num(in, "initial.", "amplitude", 1.0);
    s.xi_value = detail::num(in, "initial.", "value", 0.0);
  }

  SPDELAB_REQUIRE(j.contains("time"), "scenario: missing key \"time\"");
  const njson& tm = j["time"];
  detail::reject_unknown(tm, "time.", {"T", "dt"});
  s.T = detail::num(tm, "time.", "T", 0.0, true);
  s.dt = detail::num(tm, "time.", "dt", 0.0, true);
  SPDELAB_REQUIRE(s.T > 0.0 && s.dt > 0.0, "scenario: time.T and time.dt must be positive");
  s.steps();  // validates divisibility

  SPDELAB_REQUIRE(j.contains("harness"), "scenario: missing key \"harness\"");
  const njson& ha = j["harness"];
  detail::reject_unknown(ha, "harness.",
                         {"kind", "tolerance", "theta", "p", "calibration",
                          "evaluation", "ensemble", "shift", "m", "b", "sigma", "C",
                          "rho", "source", "source_y"});
  HarnessSpec& hs = s.harness;
  hs.kind = detail::str(ha, "harness.", "kind", "", true);
  const std::set<std::string> kinds = {"heat-decay",   "envelope",     "comparison",
                                       "barrier",      "positive-part", "l2-data-bound",
                                       "uniform-sup",  "linear-energy"};
  if (!kinds.count(hs.kind))
    fail_precondition("scenario: unknown harness kind \"" + hs.kind + "\"");
  hs.tolerance = detail::num(ha, "harness.", "tolerance", hs.tolerance);
  hs.theta = detail::num(ha, "harness.", "theta", 0.0);
  hs.p = detail::num(ha, "harness.", "p", 2.0);
  hs.calibration = static_cast<int>(detail::num(ha, "harness.", "calibration", 50.0));
  hs.evaluation = static_cast<int>(detail::num(ha, "harness.", "evaluation", 200.0));
  hs.ensemble = static_cast<int>(detail::num(ha, "harness.", "ensemble", 200.0));
  hs.shift = detail::num(ha, "harness.", "shift", 0.0);
  hs.m = detail::num(ha, "harness.", "m", 0.0, hs.kind == "barrier");
  hs.b = detail::num(ha, "harness.", "b", 0.0);
  if (ha.contains("sigma")) {
    SPDELAB_REQUIRE(ha["sigma"].is_array(), "scenario: harness.sigma must be an array");
    for (const auto& v : ha["sigma"]) hs.sigma.push_back(v.get<double>());
  }
  hs.env_C = detail::num(ha, "harness.", "C", -1.0);
  hs.env_rho = detail::num(ha, "harness.", "rho", -1.0);
  hs.source_x = detail::num(ha, "harness.", "source", 0.5);
  hs.source_y = detail::num(ha, "harness.", "source_y", 0.5);

  if (j.contains("seed")) {
    SPDELAB_REQUIRE(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0,
                    "scenario: seed must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  return s;
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) fail_precondition("parse_scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

// ----------------------------------------------------------- materialization

struct ScenarioSetup {
  Grid grid;
  CoefficientField coeffs;
  NoiseSpectrum spectrum;
  NonlinearCoefficients nonlin;
  NodeField xi;
  double T = 0.0;
  double dt = 0.0;
  int steps = 0;
  std::uint64_t seed = 1;

  Problem problem() const {
    Problem pb;
    pb.grid = &grid;
    pb.coeffs = &coeffs;
    pb.nonlin = &nonlin;
    pb.spectrum = &spectrum;
    pb.xi = xi;
    pb.T = T;
    pb.steps = steps;
    return pb;
  }
};

namespace detail {

inline std::vector<double> load_csv_numbers(const std::string& path, int expect) {
  std::ifstream in(path);
  if (!in.good()) fail_precondition("scenario: cannot open table " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ','))
      try {
        out.push_back(std::stod(tok));
      } catch (...) {
        fail_precondition("scenario: malformed number in table " + path);
      }
  }
  SPDELAB_REQUIRE(static_cast<int>(out.size()) == expect,
                  "scenario: table " + path + " has the wrong entry count");
  return out;
}

}  // namespace detail

inline std::unique_ptr<ScenarioSetup> build_scenario(const Scenario& s,
                                                     bool refine = false) {
  auto setup = std::make_unique<ScenarioSetup>();
  const double h = refine ? 0.5 * s.h : s.h;
  GridOptions gopt;
  gopt.periodic = s.periodic;
  setup->grid = make_grid(s.shape, h, gopt);
  const Grid& g = setup->grid;

  std::vector<double> args;
  const std::string cname = detail::split_args(s.coeff_preset, args);
  if (cname == "identity") {
    setup->coeffs = coeff_identity(g.dim, s.coeff_scale);
  } else if (cname == "scalar-sine") {
    setup->coeffs = coeff_scalar_sine(g.dim);
  } else if (cname == "step") {
    setup->coeffs = coeff_step(g.dim);
  } else if (cname == "anisotropic") {
    SPDELAB_REQUIRE(g.dim == 2, "scenario: anisotropic coefficients need dim 2");
    setup->coeffs = coeff_anisotropic(s.ax, s.ay);
  } else if (cname == "tabulated") {
    SPDELAB_REQUIRE(!s.coeff_table.empty(), "scenario: tabulated coefficients need a table");
    std::vector<double> flat = detail::load_csv_numbers(s.coeff_table, g.nnode * g.dim);
    std::vector<NodeField> diag(g.dim, NodeField(g.nnode));
    for (int id = 0; id < g.nnode; ++id)
      for (int axis = 0; axis < g.dim; ++axis) diag[axis][id] = flat[id * g.dim + axis];
    setup->coeffs = coeff_tabulated(g, diag);
  } else {
    fail_precondition("scenario: unknown coefficient preset \"" + s.coeff_preset + "\"");
  }
  if (s.lambda_override > 0.0) setup->coeffs.lambda = s.lambda_override;
  if (s.Lambda_override > 0.0) setup->coeffs.Lambda = s.Lambda_override;
  if (s.bound_override > 0.0) setup->coeffs.M = s.bound_override;
  if (s.mollify_n > 0) setup->coeffs = mollify(setup->coeffs, s.mollify_n);

  const std::string nname = detail::split_args(s.noise_preset, args);
  KernelDescriptor ker;
  if (nname == "sine-modes") {
    ker = KernelDescriptor::sine_modes(args.empty() ? 2.0 : args[0]);
  } else if (nname == "rank-one") {
    ker = KernelDescriptor::rank_one("flat");
  } else if (nname == "rank-one-sine") {
    ker = KernelDescriptor::rank_one("sine");
  } else if (nname == "tabulated") {
    SPDELAB_REQUIRE(!s.noise_table.empty(), "scenario: tabulated noise needs a table");
    std::vector<double> flat =
        detail::load_csv_numbers(s.noise_table, g.nnode * g.nnode);
    // capture by value: the kernel table outlives this function
    auto lookup = [&g, flat](const double* a, const double* b) {
      const int ia = nearest_node(g, a[0], g.dim == 2 ? a[1] : 0.0);
      const int ib = nearest_node(g, b[0], g.dim == 2 ? b[1] : 0.0);
      return flat[ia * g.nnode + ib];
    };
    ker = KernelDescriptor::tabulated(lookup);
  } else {
    fail_precondition("scenario: unknown noise preset \"" + s.noise_preset + "\"");
  }
  setup->spectrum = build_spectrum(ker, g, s.noise_modes);

  NonlinearCoefficients& nl = setup->nonlin;
  const std::string fname = detail::split_args(s.f_str, args);
  if (fname == "zero") nl.f = FSpec::zero();
  else if (fname == "constant") nl.f = FSpec::constant(args.at(0));
  else if (fname == "source-sine") nl.f = FSpec::source_sine(args.at(0));
  else if (fname == "linear-reaction") nl.f = FSpec::linear_reaction(args.at(0));
  else if (fname == "sine-reaction") nl.f = FSpec::sine_reaction(args.at(0));
  else fail_precondition("scenario: unknown f preset \"" + s.f_str + "\"");

  const std::string gname = detail::split_args(s.g_str, args);
  if (gname == "zero") nl.g = GSpec::zero();
  else if (gname == "gradient-flux") nl.g = GSpec::gradient_flux(args.at(0));
  else if (gname == "source-sine") nl.g = GSpec::source_sine(args.at(0));
  else fail_precondition("scenario: unknown g preset \"" + s.g_str + "\"");

  const std::string hname = detail::split_args(s.h_str, args);
  if (hname == "zero") nl.h = HSpec::zero();
  else if (hname == "multiplicative-noise") nl.h = HSpec::multiplicative(args.at(0));
  else if (hname == "factored") nl.h = HSpec::factored(args.at(0), args.at(1), args.at(2));
  else if (hname == "additive-uniform") nl.h = HSpec::additive_uniform(args);
  else fail_precondition("scenario: unknown h preset \"" + s.h_str + "\"");

  nl.C = s.C;
  nl.alpha = s.alpha;
  nl.beta = s.beta >= 0.0 ? s.beta : nl.beta_from(setup->spectrum);

  setup->xi.assign(g.nnode, 0.0);
  if (s.xi_preset == "zero") {
  } else if (s.xi_preset == "constant") {
    setup->xi.assign(g.nnode, s.xi_value);
  } else if (s.xi_preset == "sine") {
    for (int id = 0; id < g.nnode; ++id)
      setup->xi[id] = s.xi_amp * std::sin(M_PI * g.x[id][0]) *
                      (g.dim == 2 ? std::sin(M_PI * g.x[id][1]) : 1.0);
  } else if (s.xi_preset == "sine2") {
    for (int id = 0; id < g.nnode; ++id)
      setup->xi[id] = s.xi_amp * std::sin(2.0 * M_PI * g.x[id][0]) *
                      (g.dim == 2 ? std::sin(M_PI * g.x[id][1]) : 1.0);
  } else {
    fail_precondition("scenario: unknown initial preset \"" + s.xi_preset + "\"");
  }

  setup->T = s.T;
  setup->dt = refine ? 0.5 * s.dt : s.dt;
  setup->steps = refine ? 2 * s.steps() : s.steps();
  setup->seed = s.seed;
  return setup;
}

// ------------------------------------------------------------------- running

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  SPDELAB_REQUIRE(out.good(), "run_scenario: cannot write " + path);
  out << content;
}

inline std::string paths_csv(const EstimateReport& rep) {
  std::string csv = "path,block,lhs,rhs\n";
  for (int i = 0; i < rep.ensemble; ++i) {
    csv += std::to_string(i);
    csv += i < rep.calibration ? ",calibration," : ",evaluation,";
    csv += fmt(rep.lhs[i]) + "," + fmt(rep.rhs[i]) + "\n";
  }
  return csv;
}

inline njson summary_of(const EstimateReport& rep) {
  njson d;
  d["id"] = rep.id;
  d["ensemble"] = rep.ensemble;
  d["calibration"] = rep.calibration;
  d["evaluation"] = rep.evaluation;
  d["fitted_k"] = rep.k;
  d["tolerance"] = rep.tol;
  d["violations"] = rep.violations;
  d["mean_lhs"] = rep.mean_lhs;
  d["mean_rhs"] = rep.mean_rhs;
  d["message"] = rep.message;
  return d;
}

}  // namespace detail

// executes the selected harness, writes reports, returns the exit code
// (0 pass, 1 assertion failure); reports are written before the verdict so a
// failing run still leaves its evidence behind
inline int run_scenario(const Scenario& s, const std::string& out_dir, int workers = 1,
                        bool refine = false) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string stem = out_dir + "/" + s.name;

  auto setup = build_scenario(s, refine);
  const Grid& g = setup->grid;

  {  // structural gates: ellipticity audit, then the contraction condition
    EllipticityReport er = validate_ellipticity(setup->coeffs, 400, setup->seed);
    if (!er.pass) fail_precondition("run_scenario: " + er.message);
    const NonlinearCoefficients& nl = setup->nonlin;
    const double lambda = setup->coeffs.lambda;
    if (!(nl.alpha + 0.5 * nl.beta * nl.beta < lambda))
      fail_precondition(
          "run_scenario: assumption (H)(iv) fails, alpha + beta^2/2 = " +
          std::to_string(nl.alpha + 0.5 * nl.beta * nl.beta) +
          " must stay below lambda = " + std::to_string(lambda));
  }

  detail::njson summary;
  summary["schema_version"] = kSchemaVersion;
  summary["name"] = s.name;
  summary["harness"] = s.harness.kind;
  summary["seed"] = s.seed;
  summary["refined"] = refine;
  bool pass = false;

  EnsembleOptions opt;
  opt.calibration = s.harness.calibration;
  opt.evaluation = s.harness.evaluation;
  opt.seed = setup->seed;
  opt.tol = s.harness.tolerance;
  opt.workers = workers;

  if (s.harness.kind == "heat-decay") {
    SPDELAB_REQUIRE(s.shape == Shape::interval && s.xi_preset == "sine",
                    "heat-decay harness needs the interval domain and a sine state");
    Problem pb = setup->problem();
    NoisePath path = sample_path(setup->spectrum, setup->steps, setup->dt, setup->seed);
    Trajectory traj = integrate(pb, path);
    const int mid = nearest_node(g, 0.5);
    std::string csv = "t,amplitude,reference,error\n";
    double worst = 0.0;
    for (int k = 0; k <= setup->steps; ++k) {
      const double t = traj.u.time(k);
      const double amp = traj.u.at(k, mid) / std::sin(M_PI * g.x[mid][0]);
      const double ref = s.xi_amp * std::exp(-M_PI * M_PI * t);
      worst = std::max(worst, std::abs(amp - ref));
      csv += detail::fmt(t) + "," + detail::fmt(amp) + "," + detail::fmt(ref) + "," +
             detail::fmt(std::abs(amp - ref)) + "\n";
    }
    detail::write_file(stem + "_decay.csv", csv);
    pass = worst <= s.harness.tolerance;
    summary["details"] = {{"max_error", worst}, {"tolerance", s.harness.tolerance}};
  } else if (s.harness.kind == "envelope") {
    GreenTable tab = compute_green_at(setup->coeffs, g, 0.0, s.harness.source_x,
                                      s.harness.source_y, setup->steps, setup->dt);
    GaussianEnvelope env;
    double rho_ls = 0.0;
    if (s.harness.env_C > 0.0 && s.harness.env_rho > 0.0) {
      env.C = s.harness.env_C;
      env.rho = s.harness.env_rho;
      env.T = tab.time(tab.steps);
    } else {
      EnvelopeFit fit = fit_envelope(tab, setup->coeffs.lambda, s.harness.tolerance);
      env = fit.env;
      rho_ls = fit.rho_ls;
    }
    EnvelopeReport rep = check_envelope(tab, env, s.harness.tolerance);
    std::string csv = g.dim == 1 ? "t,x,ratio\n" : "t,x,y,ratio\n";
    const double* y = g.x[tab.ynode].data();
    for (int k = 1; k <= tab.steps; ++k) {
      const double el = tab.time(k);
      for (int id = 0; id < g.nnode; ++id) {
        double r2 = 0.0;
        for (int axis = 0; axis < g.dim; ++axis) {
          const double dx = g.x[id][axis] - y[axis];
          r2 += dx * dx;
        }
        const double e = env.C * std::pow(el, -0.5 * g.dim) *
                         std::exp(-env.rho * r2 / (8.0 * el));
        csv += detail::fmt(tab.time(k)) + "," + detail::fmt(g.x[id][0]) + ",";
        if (g.dim == 2) csv += detail::fmt(g.x[id][1]) + ",";
        csv += detail::fmt(tab.at(k, id) / e) + "\n";
      }
    }
    detail::write_file(stem + "_ratio.csv", csv);
    pass = rep.pass;
    summary["details"] = {{"C", env.C},
                          {"rho", env.rho},
                          {"rho_least_squares", rho_ls},
                          {"max_ratio", rep.max_ratio},
                          {"burn_in_steps", rep.burn_in_steps},
                          {"message", rep.message}};
  } else if (s.harness.kind == "comparison") {
    auto setup2 = build_scenario(s, refine);
    setup2->nonlin.f.shift += s.harness.shift;
    Problem p1 = setup->problem();
    Problem p2 = setup2->problem();
    // only the rate differs, so couple the pair through one lattice and basis
    p2.grid = p1.grid;
    p2.coeffs = p1.coeffs;
    p2.spectrum = p1.spectrum;
    ComparisonReport rep = run_comparison(p1, p2, s.harness.ensemble, setup->seed,
                                          s.harness.tolerance, workers);
    std::string csv = "path,min_diff\n";
    for (int i = 0; i < rep.ensemble; ++i)
      csv += std::to_string(i) + "," + detail::fmt(rep.min_diff[i]) + "\n";
    detail::write_file(stem + "_comparison.csv", csv);
    pass = rep.pass;
    summary["details"] = {{"ensemble", rep.ensemble},
                          {"violation_fraction", rep.violation_fraction},
                          {"tolerance", rep.tol},
                          {"message", rep.message}};
  } else if (s.harness.kind == "barrier") {
    Problem pb = setup->problem();
    BarrierSpec bar =
        BarrierSpec::constant(s.harness.m, s.harness.b, s.harness.sigma, setup->steps);
    EstimateReport rep = run_barrier(pb, bar, s.harness.theta, s.harness.p, opt);
    detail::write_file(stem + "_paths.csv", detail::paths_csv(rep));
    pass = rep.pass;
    summary["details"] = detail::summary_of(rep);
  } else if (s.harness.kind == "positive-part") {
    EstimateReport rep = run_positive_part(setup->problem(), opt);
    detail::write_file(stem + "_paths.csv", detail::paths_csv(rep));
    pass = rep.pass;
    summary["details"] = detail::summary_of(rep);
  } else if (s.harness.kind == "l2-data-bound") {
    EstimateReport rep = run_l2_data_bound(setup->problem(), opt);
    detail::write_file(stem + "_paths.csv", detail::paths_csv(rep));
    pass = rep.pass;
    summary["details"] = detail::summary_of(rep);
  } else if (s.harness.kind == "uniform-sup") {
    EstimateReport rep =
        run_uniform_sup(setup->problem(), s.harness.theta, s.harness.p, opt);
    detail::write_file(stem + "_paths.csv", detail::paths_csv(rep));
    pass = rep.pass;
    summary["details"] = detail::summary_of(rep);
  } else if (s.harness.kind == "linear-energy") {
    SpaceTimeField zero(g, setup->T, setup->steps);
    FrozenData fd = frozen_coefficients(setup->nonlin, setup->spectrum, zero);
    EstimateReport rep =
        run_linear_energy(setup->coeffs, g, fd, setup->xi, setup->spectrum, opt);
    detail::write_file(stem + "_paths.csv", detail::paths_csv(rep));
    pass = rep.pass;
    summary["details"] = detail::summary_of(rep);
  } else {
    fail_precondition("run_scenario: unknown harness kind " + s.harness.kind);
  }

  summary["pass"] = pass;
  detail::write_file(stem + "_summary.json", summary.dump(2) + "\n");
  return pass ? 0 : 1;
}

}  // namespace spdelab
