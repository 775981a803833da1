#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spdelab/scenario.hpp"

using namespace spdelab;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"js({
  "name": "mini",
  "domain": {"shape": "interval", "h": 0.03125},
  "time": {"T": 0.1, "dt": 0.001},
  "harness": {"kind": "heat-decay"}
})js";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("spdelab_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("a minimal file fills the documented defaults") {
  const Scenario s = parse_scenario_text(kMinimal);
  REQUIRE(s.name == "mini");
  REQUIRE(s.shape == Shape::interval);
  REQUIRE(s.h == Approx(0.03125));
  REQUIRE_FALSE(s.periodic);
  REQUIRE(s.coeff_preset == "identity");
  REQUIRE(s.noise_preset == "sine-modes(2)");
  REQUIRE(s.noise_modes == 1);
  REQUIRE(s.f_str == "zero");
  REQUIRE(s.g_str == "zero");
  REQUIRE(s.h_str == "zero");
  REQUIRE(s.xi_preset == "zero");
  REQUIRE(s.beta == -1.0);
  REQUIRE(s.harness.theta == 0.0);
  REQUIRE(s.harness.p == 2.0);
  REQUIRE(s.harness.calibration == 50);
  REQUIRE(s.harness.evaluation == 200);
  REQUIRE(s.harness.ensemble == 200);
  REQUIRE(s.harness.tolerance == Approx(1e-3));
  REQUIRE(s.seed == 1);
  REQUIRE(s.steps() == 100);
}

TEST_CASE("duplicate keys are named in the rejection") {
  const std::string dup_inner = R"js({
    "name": "d", "domain": {"shape": "interval", "h": 0.1, "h": 0.2},
    "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}
  })js";
  REQUIRE_THROWS_WITH(parse_scenario_text(dup_inner),
                      ContainsSubstring("duplicate key \"h\""));
  const std::string dup_top = R"js({"name": "a", "name": "b"})js";
  REQUIRE_THROWS_WITH(parse_scenario_text(dup_top),
                      ContainsSubstring("duplicate key \"name\""));
}

TEST_CASE("unknown keys carry their dotted path") {
  const std::string inner = R"js({
    "name": "u", "domain": {"shape": "interval", "h": 0.1, "hh": 1},
    "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}
  })js";
  REQUIRE_THROWS_WITH(parse_scenario_text(inner),
                      ContainsSubstring("unknown key \"domain.hh\""));
  const std::string top = R"js({
    "name": "u", "domain": {"shape": "interval", "h": 0.1},
    "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"},
    "extras": {}
  })js";
  REQUIRE_THROWS_WITH(parse_scenario_text(top),
                      ContainsSubstring("unknown key \"extras\""));
  const std::string harness = R"js({
    "name": "u", "domain": {"shape": "interval", "h": 0.1},
    "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay", "theta2": 1}
  })js";
  REQUIRE_THROWS_WITH(parse_scenario_text(harness),
                      ContainsSubstring("unknown key \"harness.theta2\""));
}

TEST_CASE("missing required keys are reported by path") {
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("missing key \"name\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("missing key \"domain\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m", "domain": {"h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("missing key \"domain.shape\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("missing key \"time\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1}, "time": {"T": 0.1},
      "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("missing key \"time.dt\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}})js"),
                      ContainsSubstring("missing key \"harness\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {}})js"),
                      ContainsSubstring("missing key \"harness.kind\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "barrier"}})js"),
                      ContainsSubstring("missing key \"harness.m\""));
}

TEST_CASE("malformed values are refused with a reason") {
  REQUIRE_THROWS_WITH(parse_scenario_text("{"), ContainsSubstring("parse_scenario"));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": "wide"},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("must be a number"));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": 7,
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("must be a string"));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": -0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("must be positive"));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.0003}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("dt must divide T"));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "disk", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("unknown shape \"disk\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "wat"}})js"),
                      ContainsSubstring("unknown harness kind \"wat\""));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m", "seed": -3,
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("non-negative"));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "noise": {"preset": "sine-modes(2)", "modes": 0},
      "time": {"T": 0.1, "dt": 0.001}, "harness": {"kind": "heat-decay"}})js"),
                      ContainsSubstring("at least 1"));
  REQUIRE_THROWS_WITH(parse_scenario_text(R"js({"name": "m",
      "domain": {"shape": "interval", "h": 0.1},
      "time": {"T": 0.1, "dt": 0.001},
      "harness": {"kind": "barrier", "m": 1.0, "sigma": 0.2}})js"),
                      ContainsSubstring("sigma must be an array"));
  REQUIRE_THROWS_WITH(parse_scenario("/nonexistent/scenario.json"),
                      ContainsSubstring("cannot open"));
}

TEST_CASE("presets materialize or are named in the rejection") {
  Scenario s = parse_scenario_text(kMinimal);
  s.coeff_preset = "scalar-sine";
  s.noise_preset = "sine-modes(2)";
  s.noise_modes = 3;
  s.f_str = "sine-reaction(0.3)";
  s.h_str = "additive-uniform(0.2,0.1)";
  s.C = 0.5;
  s.xi_preset = "sine";
  s.xi_amp = 0.4;
  auto setup = build_scenario(s);
  REQUIRE(setup->spectrum.modes() == 3);
  REQUIRE(setup->nonlin.f.kind == FSpec::Kind::sine_reaction);
  REQUIRE(setup->nonlin.f.c == Approx(0.3));
  REQUIRE(setup->nonlin.h.sigma == std::vector<double>{0.2, 0.1});
  REQUIRE(setup->nonlin.beta == 0.0);  // additive noise has no gradient load
  const Grid& g = setup->grid;
  const int mid = nearest_node(g, 0.5);
  REQUIRE(setup->xi[mid] == Approx(0.4).margin(1e-12));

  Scenario bad = parse_scenario_text(kMinimal);
  bad.coeff_preset = "warped";
  REQUIRE_THROWS_WITH(build_scenario(bad), ContainsSubstring("\"warped\""));
  bad = parse_scenario_text(kMinimal);
  bad.f_str = "cubic(2)";
  REQUIRE_THROWS_WITH(build_scenario(bad), ContainsSubstring("\"cubic(2)\""));
  bad = parse_scenario_text(kMinimal);
  bad.xi_preset = "bump";
  REQUIRE_THROWS_WITH(build_scenario(bad), ContainsSubstring("\"bump\""));
  bad = parse_scenario_text(kMinimal);
  bad.f_str = "constant(";
  REQUIRE_THROWS_WITH(build_scenario(bad), ContainsSubstring("malformed preset"));
  bad = parse_scenario_text(kMinimal);
  bad.coeff_preset = "anisotropic";
  REQUIRE_THROWS_WITH(build_scenario(bad), ContainsSubstring("dim 2"));
}

TEST_CASE("the contraction gate is applied at run time, not parse time") {
  const std::string text = R"js({
    "name": "hot",
    "domain": {"shape": "interval", "h": 0.0625},
    "nonlinear": {"alpha": 0.9, "beta": 0.8},
    "time": {"T": 0.1, "dt": 0.001},
    "harness": {"kind": "l2-data-bound", "calibration": 1, "evaluation": 1}
  })js";
  Scenario s;
  REQUIRE_NOTHROW(s = parse_scenario_text(text));
  TempDir out("gate");
  REQUIRE_THROWS_WITH(run_scenario(s, out.str()), ContainsSubstring("(H)(iv)"));
}

TEST_CASE("a small decay run writes its table and summary") {
  const std::string text = R"js({
    "name": "mini-decay",
    "domain": {"shape": "interval", "h": 0.015625},
    "initial": {"preset": "sine", "amplitude": 1.0},
    "time": {"T": 0.1, "dt": 0.001},
    "harness": {"kind": "heat-decay", "tolerance": 0.005}
  })js";
  const Scenario s = parse_scenario_text(text);
  TempDir out("decay");
  REQUIRE(run_scenario(s, out.str()) == 0);

  const std::string csv = slurp(out.path / "mini-decay_decay.csv");
  REQUIRE(csv.rfind("t,amplitude,reference,error\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 102);

  const auto sum = nlohmann::json::parse(slurp(out.path / "mini-decay_summary.json"));
  REQUIRE(sum["schema_version"] == "1");
  REQUIRE(sum["name"] == "mini-decay");
  REQUIRE(sum["harness"] == "heat-decay");
  REQUIRE(sum["pass"] == true);
  REQUIRE(sum["details"]["max_error"].get<double>() < 0.005);

  // doubled resolution halves the stepping bias, so the run still passes
  REQUIRE(run_scenario(s, out.str(), 1, true) == 0);
}

TEST_CASE("an envelope that cannot hold still leaves its ratio table") {
  const std::string text = R"js({
    "name": "tight",
    "domain": {"shape": "interval", "h": 0.03125},
    "time": {"T": 0.04, "dt": 0.0001},
    "harness": {"kind": "envelope", "C": 0.05, "rho": 2.0, "tolerance": 0.001}
  })js";
  const Scenario s = parse_scenario_text(text);
  TempDir out("env");
  REQUIRE(run_scenario(s, out.str()) == 1);
  const std::string csv = slurp(out.path / "tight_ratio.csv");
  REQUIRE(csv.rfind("t,x,ratio\n", 0) == 0);
  const auto sum = nlohmann::json::parse(slurp(out.path / "tight_summary.json"));
  REQUIRE(sum["pass"] == false);
  REQUIRE(sum["details"]["max_ratio"].get<double>() > 1.0);
}

TEST_CASE("identical data reports exact ties through the runner") {
  const std::string text = R"js({
    "name": "tie",
    "domain": {"shape": "interval", "h": 0.03125},
    "noise": {"preset": "sine-modes(2)", "modes": 4},
    "nonlinear": {"f": "sine-reaction(0.25)", "h": "multiplicative-noise(0.3)", "C": 1.0},
    "initial": {"preset": "sine", "amplitude": 0.4},
    "time": {"T": 0.1, "dt": 0.001},
    "harness": {"kind": "comparison", "shift": 0.0, "ensemble": 5, "tolerance": 0.005}
  })js";
  const Scenario s = parse_scenario_text(text);
  TempDir out("tie");
  REQUIRE(run_scenario(s, out.str()) == 0);
  std::ifstream csv(out.path / "tie_comparison.csv");
  std::string line;
  REQUIRE(std::getline(csv, line));
  REQUIRE(line == "path,min_diff");
  int rows = 0;
  while (std::getline(csv, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    REQUIRE(v >= -1e-12);
    REQUIRE(v == 0.0);
    ++rows;
  }
  REQUIRE(rows == 5);
  const auto sum = nlohmann::json::parse(slurp(out.path / "tie_summary.json"));
  REQUIRE(sum["details"]["violation_fraction"].get<double>() == 0.0);
}

TEST_CASE("reports are byte-identical across worker counts") {
  const std::string text = R"js({
    "name": "workers",
    "domain": {"shape": "interval", "h": 0.03125},
    "noise": {"preset": "sine-modes(2)", "modes": 4},
    "nonlinear": {"f": "sine-reaction(0.3)", "h": "additive-uniform(0.3)", "C": 0.5},
    "initial": {"preset": "sine", "amplitude": 0.5},
    "time": {"T": 0.1, "dt": 0.001},
    "seed": 13,
    "harness": {"kind": "l2-data-bound", "calibration": 8, "evaluation": 24}
  })js";
  const Scenario s = parse_scenario_text(text);
  TempDir a("wrk_a"), b("wrk_b");
  REQUIRE(run_scenario(s, a.str(), 1) == 0);
  REQUIRE(run_scenario(s, b.str(), 4) == 0);
  REQUIRE(slurp(a.path / "workers_paths.csv") == slurp(b.path / "workers_paths.csv"));
  REQUIRE(slurp(a.path / "workers_summary.json") ==
          slurp(b.path / "workers_summary.json"));
}

TEST_CASE("the master seed drives the ensemble and nothing else does") {
  Scenario s = parse_scenario_text(R"js({
    "name": "seeded",
    "domain": {"shape": "interval", "h": 0.03125},
    "noise": {"preset": "sine-modes(2)", "modes": 2},
    "nonlinear": {"h": "additive-uniform(0.2)"},
    "initial": {"preset": "sine", "amplitude": 0.3},
    "time": {"T": 0.1, "dt": 0.001},
    "harness": {"kind": "l2-data-bound", "calibration": 4, "evaluation": 8}
  })js");
  TempDir a("seed_a"), b("seed_b"), c("seed_c");
  s.seed = 5;
  REQUIRE(run_scenario(s, a.str()) == 0);
  s.seed = 6;
  REQUIRE(run_scenario(s, b.str()) == 0);
  s.seed = 5;
  REQUIRE(run_scenario(s, c.str()) == 0);
  const std::string pa = slurp(a.path / "seeded_paths.csv");
  REQUIRE(pa == slurp(c.path / "seeded_paths.csv"));
  REQUIRE(pa != slurp(b.path / "seeded_paths.csv"));
}

TEST_CASE("refinement halves the mesh and the step together") {
  const Scenario s = parse_scenario_text(kMinimal);
  auto coarse = build_scenario(s);
  auto fine = build_scenario(s, true);
  REQUIRE(coarse->grid.nnode == 31);
  REQUIRE(fine->grid.nnode == 63);
  REQUIRE(fine->steps == 2 * coarse->steps);
  REQUIRE(fine->dt == Approx(0.5 * coarse->dt));
}

TEST_CASE("the committed scenario files parse and build") {
  const fs::path dir = fs::path(SPDELAB_SOURCE_DIR) / "scenarios";
  REQUIRE(fs::exists(dir));
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    INFO(entry.path().string());
    Scenario s;
    REQUIRE_NOTHROW(s = parse_scenario(entry.path().string()));
    REQUIRE_NOTHROW(build_scenario(s));
  }
  REQUIRE(count >= 9);
}
