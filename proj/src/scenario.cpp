#include "efsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "efsim/analysis.hpp"

namespace efsim {

namespace fs = std::filesystem;

std::string format_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::vector<double> parse_axis(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
        step <= 0.0) {
      throw std::invalid_argument("bad axis range: " + text);
    }
    for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(std::stod(item));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty axis: " + text);
  return out;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("base")) s.base = config_from_json(j.at("base"));
  if (j.contains("axes")) {
    const auto& a = j.at("axes");
    if (a.contains("rho")) s.axes.rho = a.at("rho").get<std::vector<double>>();
    if (a.contains("mu")) s.axes.mu = a.at("mu").get<std::vector<double>>();
    if (a.contains("m")) s.axes.m = a.at("m").get<std::vector<int>>();
  }
  if (j.contains("fixed_l")) s.axes.fixed_l = j.at("fixed_l").get<int>();
  if (j.contains("policies")) {
    s.axes.policies.clear();
    for (const auto& p : j.at("policies")) {
      s.axes.policies.push_back(policy_from_string(p.get<std::string>()));
    }
  }
  if (j.contains("replications")) {
    s.axes.replications = j.at("replications").get<int>();
  }
  if (j.contains("bound_d_th")) s.bound_d_th = j.at("bound_d_th").get<double>();

  if (s.axes.rho.empty() || (s.axes.mu.empty() && s.axes.fixed_l <= 0) ||
      s.axes.m.empty() || s.axes.policies.empty()) {
    throw std::invalid_argument("scenario '" + s.name + "': empty sweep axis");
  }
  if (s.axes.replications < 1) {
    throw std::invalid_argument("scenario '" + s.name +
                                "': replications must be >= 1");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("scenario " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::string bound_flags(const MetricsRecord& rec, int m, int l,
                        double bound_d_th) {
  std::string flags;
  const int s_obs = rec.max_concurrent_failures;
  if (s_obs >= l) {
    flags = "lat:na";
  } else {
    LatencyBoundParams lp;
    lp.f_min = rec.extremes.f_min();
    lp.y_max = rec.extremes.y_max;
    lp.q_max = rec.extremes.q_max();
    lp.t_max = rec.extremes.t_per_ap_max;
    const double bound = latency_bound(s_obs, m, l, lp);
    flags = rec.mean_delay <= bound ? "lat:ok" : "lat:viol";
  }
  if (bound_d_th > 0.0) {
    RobustnessParams rp;
    rp.eps_l = rec.extremes.f_es_max / rec.extremes.f_bs_max;
    rp.nu = rec.extremes.f_bs_max / rec.extremes.f_bs_min;
    rp.f_bs_min = rec.extremes.f_bs_min;
    rp.t_bar_min = rec.extremes.t_per_ap_min;
    rp.q_min = 0.0;  // queues start empty, so the run minimum is zero
    rp.d_th = bound_d_th;
    const ToleranceBound tb = tolerance_bound(rp, m, l);
    if (s_obs <= tb.s_t) {
      flags += rec.mean_delay <= bound_d_th ? ";tol:ok" : ";tol:viol";
    } else {
      flags += ";tol:na";
    }
  }
  return flags;
}

std::string rows_to_csv(const Scenario& scenario,
                        const std::vector<SweepRow>& rows) {
  std::ostringstream csv;
  csv << "policy,rho,mu,m,seed,mean_delay_ms,convergence_count,"
         "convergence_ms,bound_flags\n";
  for (const auto& row : rows) {
    const int l = static_cast<int>(std::floor(row.mu * row.m));
    csv << to_string(row.policy) << ',' << format_fixed(row.rho, 4) << ','
        << format_fixed(row.mu, 4) << ',' << row.m << ',' << row.seed << ','
        << format_fixed(row.metrics.mean_delay * 1e3, 6) << ','
        << row.metrics.convergence_count << ','
        << format_fixed(row.metrics.convergence_modeled_ms, 3) << ','
        << bound_flags(row.metrics, row.m, l, scenario.bound_d_th) << '\n';
  }
  return csv.str();
}

ScenarioResult run_scenario(const Scenario& scenario, const std::string& out_dir,
                            bool trace) {
  fs::create_directories(out_dir);
  ScenarioResult result;

  std::vector<SweepRow> rows;
  bool partial = false;
  std::string error;
  try {
    rows = sweep(scenario.base, scenario.axes);
  } catch (const std::exception& e) {
    partial = true;
    error = e.what();
  }

  result.rows = static_cast<int>(rows.size());
  result.partial = partial;

  const fs::path csv_path = fs::path(out_dir) / (scenario.name + ".csv");
  {
    std::ofstream out(csv_path);
    out << rows_to_csv(scenario, rows);
  }
  result.csv_path = csv_path.string();

  nlohmann::json summary;
  summary["scenario"] = scenario.name;
  summary["partial"] = partial;
  if (partial) summary["error"] = error;
  summary["base"] = config_to_json(scenario.base);
  summary["bound_d_th"] = scenario.bound_d_th;
  auto& jrows = summary["rows"] = nlohmann::json::array();
  std::map<std::string, std::pair<double, int>> cells;
  for (const auto& row : rows) {
    const int l = static_cast<int>(std::floor(row.mu * row.m));
    nlohmann::json jr;
    jr["policy"] = to_string(row.policy);
    jr["rho"] = row.rho;
    jr["mu"] = row.mu;
    jr["m"] = row.m;
    jr["l"] = l;
    jr["seed"] = row.seed;
    jr["mean_delay_ms"] = row.metrics.mean_delay * 1e3;
    jr["convergence_count"] = row.metrics.convergence_count;
    jr["convergence_modeled_ms"] = row.metrics.convergence_modeled_ms;
    jr["convergence_wall_ms"] = row.metrics.convergence_wall_ms;
    jr["max_concurrent_failures"] = row.metrics.max_concurrent_failures;
    jr["conservation_ok"] = row.metrics.conservation_ok;
    jr["cloud_ap_slots"] = row.metrics.cloud_ap_slots;
    jr["bound_flags"] = bound_flags(row.metrics, row.m, l, scenario.bound_d_th);
    jr["extremes"] = {{"q_bs_max", row.metrics.extremes.q_bs_max},
                      {"q_es_max", row.metrics.extremes.q_es_max},
                      {"f_bs_min", row.metrics.extremes.f_bs_min},
                      {"f_bs_max", row.metrics.extremes.f_bs_max},
                      {"f_es_min", row.metrics.extremes.f_es_min},
                      {"f_es_max", row.metrics.extremes.f_es_max},
                      {"t_per_ap_max", row.metrics.extremes.t_per_ap_max},
                      {"t_per_ap_min", row.metrics.extremes.t_per_ap_min},
                      {"y_max", row.metrics.extremes.y_max}};
    jrows.push_back(std::move(jr));
    const std::string key = to_string(row.policy) + "|" +
                            format_fixed(row.rho, 4) + "|" +
                            format_fixed(row.mu, 4) + "|" +
                            std::to_string(row.m);
    cells[key].first += row.metrics.mean_delay * 1e3;
    cells[key].second += 1;
  }
  auto& jcells = summary["cells"] = nlohmann::json::array();
  for (const auto& [key, agg] : cells) {
    jcells.push_back(
        {{"cell", key}, {"mean_delay_ms", agg.first / agg.second}});
  }

  const fs::path summary_path =
      fs::path(out_dir) / (scenario.name + "_summary.json");
  {
    std::ofstream out(summary_path);
    out << summary.dump(2) << '\n';
  }
  result.summary_path = summary_path.string();

  if (trace) {
    const fs::path trace_path = fs::path(out_dir) / (scenario.name + "_trace.csv");
    std::ofstream out(trace_path);
    out << "policy,rho,mu,m,seed,slot,mean_delay_ms\n";
    for (const auto& row : rows) {
      for (size_t slot = 0; slot < row.metrics.slot_mean_delay.size(); ++slot) {
        out << to_string(row.policy) << ',' << format_fixed(row.rho, 4) << ','
            << format_fixed(row.mu, 4) << ',' << row.m << ',' << row.seed << ','
            << slot << ','
            << format_fixed(row.metrics.slot_mean_delay[slot] * 1e3, 6) << '\n';
      }
    }
    result.trace_path = trace_path.string();
  }

  if (partial) throw std::runtime_error("scenario failed mid-run: " + error);
  return result;
}

bool check_bounds(const std::string& dir) {
  nlohmann::json report;
  report["dir"] = dir;
  auto& checked = report["checked"] = nlohmann::json::array();
  int violations = 0, runs = 0;
  bool found_any = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 13 || name.substr(name.size() - 13) != "_summary.json") {
      continue;
    }
    found_any = true;
    std::ifstream in(entry.path());
    nlohmann::json summary = nlohmann::json::parse(in);
    for (const auto& jr : summary.at("rows")) {
      ++runs;
      const std::string flags = jr.at("bound_flags").get<std::string>();
      const bool viol = flags.find("viol") != std::string::npos;
      if (viol) {
        ++violations;
        checked.push_back({{"file", name},
                           {"policy", jr.at("policy")},
                           {"seed", jr.at("seed")},
                           {"flags", flags}});
      }
    }
  }
  if (!found_any) {
    throw std::invalid_argument("check_bounds: no *_summary.json under " + dir);
  }
  report["runs"] = runs;
  report["violations"] = violations;
  report["pass"] = violations == 0;
  std::ofstream out(fs::path(dir) / "bounds_report.json");
  out << report.dump(2) << '\n';
  return violations == 0;
}

}  // namespace efsim
