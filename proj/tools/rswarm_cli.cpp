// Experiment harness: rswarm <experiment> --config <path> [--set key=value ...]
//                                  --seed <n> --trials <n> --out <dir>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rswarm/config.hpp"
#include "rswarm/error.hpp"
#include "rswarm/experiments.hpp"

namespace {

int report(const std::string& code, const std::string& msg, int exit_code) {
  std::cerr << nlohmann::json{{"error", msg}, {"code", code}}.dump() << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeater swarm uplink experiments"};
  std::string experiment;
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  int trials = 1;
  std::string out_dir = "out";
  bool list = false;

  std::string names;
  for (const auto& n : rswarm::experiment_names()) names += (names.empty() ? "" : ", ") + n;

  app.add_option("experiment", experiment, "One of: " + names);
  app.add_option("--config", config_path, "JSON config file (defaults apply to missing keys)");
  app.add_option("--set", overrides, "Override a config value, e.g. scenario.N=20")->take_all();
  app.add_option("--seed", seed, "Scenario seed");
  app.add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--list", list, "List experiments and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("UsageError", e.what(), 2);
  }

  if (list) {
    for (const auto& n : rswarm::experiment_names()) std::cout << n << "\n";
    return 0;
  }
  if (experiment.empty()) return report("UsageError", "missing experiment name (" + names + ")", 2);

  try {
    const rswarm::Config cfg =
        config_path.empty() ? rswarm::parse_config("", overrides) : rswarm::load_config(config_path, overrides);
    const auto out = rswarm::run_experiment(experiment, cfg, seed, trials);
    rswarm::Config archived = cfg;
    archived.scenario.seed = seed;
    rswarm::write_outputs(out, out_dir, archived);
    std::cout << out.summary_json << "\n";
  } catch (const rswarm::Error& e) {
    return report(std::string(rswarm::error_code_name(e.code())), e.what(), 1);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 1);
  }
  return 0;
}
