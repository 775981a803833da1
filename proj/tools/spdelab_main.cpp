// command line front end: runs a scenario file and writes its reports.
// exit codes: 0 pass, 1 a checked bound failed, 2 bad input or runtime error.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "spdelab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for stochastic parabolic problems"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "execute a scenario file");
  std::string scenario_path;
  std::string out_dir = "out";
  int workers = 1;
  std::int64_t seed = -1;
  bool refine = false;
  run->add_option("scenario", scenario_path, "scenario json file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--workers", workers, "worker threads for ensemble runs")
      ->check(CLI::PositiveNumber);
  run->add_option("--out-dir", out_dir, "directory for reports");
  run->add_flag("--refine", refine, "halve h and dt for a refinement study");

  CLI11_PARSE(app, argc, argv);

  try {
    spdelab::Scenario s = spdelab::parse_scenario(scenario_path);
    if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
    const int code = spdelab::run_scenario(s, out_dir, workers, refine);
    std::cout << s.name << ": " << (code == 0 ? "pass" : "FAIL") << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
