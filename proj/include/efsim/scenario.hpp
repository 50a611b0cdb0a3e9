#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "efsim/sim.hpp"

namespace efsim {

// A batch experiment: a base config, sweep axes, policies and replications.
struct Scenario {
  std::string name = "scenario";
  SimulationConfig base;
  SweepAxes axes;
  double bound_d_th = 0.0;  // > 0 enables the tolerance-bound column
};

Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

// Fixed-precision float formatting so emitted CSV bytes are reproducible.
std::string format_fixed(double v, int precision);

// "a:b:step" or "a,b,c" into a list of doubles.
std::vector<double> parse_axis(const std::string& text);

std::string bound_flags(const MetricsRecord& rec, int m, int l,
                        double bound_d_th);

struct ScenarioResult {
  std::string csv_path;
  std::string summary_path;
  std::string trace_path;  // empty unless tracing was requested
  int rows = 0;
  bool partial = false;    // a run failed mid-scenario
};

std::string rows_to_csv(const Scenario& scenario,
                        const std::vector<SweepRow>& rows);

// Runs the scenario and writes <name>.csv plus <name>_summary.json under
// out_dir. Throws on config errors; a failed run mid-scenario flags the
// output as partial.
ScenarioResult run_scenario(const Scenario& scenario, const std::string& out_dir,
                            bool trace = false);

// Re-checks the bound columns of every *_summary.json under `dir` and
// writes bounds_report.json. Returns true when every checked run passes.
bool check_bounds(const std::string& dir);

}  // namespace efsim
