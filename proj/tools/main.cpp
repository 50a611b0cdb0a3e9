// Batch experiment front-end: scenario runs, ad-hoc sweeps and bound checks.
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "efsim/benchmarks.hpp"
#include "efsim/scenario.hpp"
#include "efsim/sim.hpp"

int main(int argc, char** argv) {
  CLI::App app{"edge-failover-sim: seeded mobile-edge failure-recovery simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  std::string policy_override, seed_override;
  bool trace = false;
  auto* run_cmd = app.add_subcommand("run", "run a scenario file");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--policy", policy_override, "override the policy list");
  run_cmd->add_option("--seed", seed_override, "override the base seed");
  run_cmd->add_flag("--trace", trace, "also write a per-slot trace CSV");

  std::string rho_axis = "0.3", mu_axis = "0.3", m_axis = "60";
  std::string policies = "fodt,greedy,cloud_assistant,global_recompute";
  int reps = 1, fixed_l = 0;
  std::string sweep_out = "out";
  auto* sweep_cmd = app.add_subcommand("sweep", "run an ad-hoc parameter sweep");
  sweep_cmd->add_option("--rho", rho_axis, "rho axis, a:b:step or comma list");
  sweep_cmd->add_option("--mu", mu_axis, "mu axis, a:b:step or comma list");
  sweep_cmd->add_option("--m", m_axis, "AP-count axis, comma list");
  sweep_cmd->add_option("--policies", policies, "comma-separated policy list");
  sweep_cmd->add_option("--reps", reps, "replications per cell");
  sweep_cmd->add_option("--fixed-l", fixed_l, "hold the server count fixed");
  sweep_cmd->add_option("--out", sweep_out, "output directory");

  std::string bounds_dir;
  auto* bounds_cmd =
      app.add_subcommand("check-bounds", "verify bound flags of finished runs");
  bounds_cmd->add_option("dir", bounds_dir, "directory with *_summary.json")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      efsim::Scenario scenario;
      try {
        scenario = efsim::load_scenario(scenario_path);
        if (!policy_override.empty()) {
          scenario.axes.policies = {efsim::policy_from_string(policy_override)};
        }
        if (!seed_override.empty()) {
          scenario.base.seed = std::stoull(seed_override);
        }
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
      }
      const auto result = efsim::run_scenario(scenario, out_dir, trace);
      std::cout << "wrote " << result.csv_path << " (" << result.rows
                << " rows)\n"
                << "wrote " << result.summary_path << '\n';
      if (!result.trace_path.empty()) {
        std::cout << "wrote " << result.trace_path << '\n';
      }
      return 0;
    }
    if (sweep_cmd->parsed()) {
      efsim::Scenario scenario;
      scenario.name = "sweep";
      try {
        scenario.axes.rho = efsim::parse_axis(rho_axis);
        scenario.axes.mu = efsim::parse_axis(mu_axis);
        scenario.axes.m.clear();
        for (double v : efsim::parse_axis(m_axis)) {
          scenario.axes.m.push_back(static_cast<int>(v));
        }
        scenario.axes.policies.clear();
        std::stringstream ss(policies);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) {
            scenario.axes.policies.push_back(efsim::policy_from_string(item));
          }
        }
        scenario.axes.replications = reps;
        scenario.axes.fixed_l = fixed_l;
        if (scenario.axes.policies.empty()) {
          throw std::invalid_argument("no policies given");
        }
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
      }
      const auto result = efsim::run_scenario(scenario, sweep_out);
      std::cout << "wrote " << result.csv_path << " (" << result.rows
                << " rows)\n";
      return 0;
    }
    if (bounds_cmd->parsed()) {
      const bool ok = efsim::check_bounds(bounds_dir);
      std::cout << (ok ? "bounds: all pass\n" : "bounds: violations found\n");
      return ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
