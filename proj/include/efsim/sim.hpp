#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "efsim/benchmarks.hpp"
#include "efsim/failure.hpp"
#include "efsim/topology.hpp"

namespace efsim {

struct SimulationConfig {
  std::uint64_t seed = 1;
  int m = 60;
  double mu = 0.3;
  double rho = 0.3;
  int horizon = 300;
  int warmup = 50;
  int depth_limit = 3;
  PolicyKind policy = PolicyKind::fodt;
  double t_z = 1.0;
  GeneratorParams gen;
  RepairDist repair;
  PolicyParams pol;
  // Deterministic modeled cost of one delay evaluation / strategy write,
  // used for the reproducible convergence_ms metric.
  double eval_cost_us = 5.0;
  double write_cost_us = 1.0;
  // When set, replaces the sampled schedule (scripted scenarios).
  std::optional<std::vector<FailureEvent>> scripted;
};

SimulationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimulationConfig& c);

struct EventCost {
  int slot = 0;
  int server = 0;
  bool repair = false;
  long long evaluations = 0;
  long long writes = 0;
  double modeled_ms = 0.0;
  double wall_ms = 0.0;
  long long count() const { return evaluations + writes; }
};

// Capacity/queue extremes observed over a run; inputs for the robustness
// bounds.
struct RunExtremes {
  double q_bs_max = 0.0;
  double q_es_max = 0.0;
  double f_bs_min = std::numeric_limits<double>::infinity();
  double f_bs_max = 0.0;
  double f_es_min = std::numeric_limits<double>::infinity();
  double f_es_max = 0.0;
  double t_per_ap_max = 0.0;  // max per-AP offered volume per slot
  double t_per_ap_min = std::numeric_limits<double>::infinity();
  int y_max = 0;              // max hops from an AP to its server
  double q_max() const { return std::max(q_bs_max, q_es_max); }
  double f_min() const { return std::min(f_bs_min, f_es_min); }
};

struct MetricsRecord {
  std::vector<double> slot_mean_delay;  // seconds, one entry per slot
  std::vector<EventCost> events;
  double mean_delay = 0.0;              // seconds, warmup excluded
  long long convergence_count = 0;
  double convergence_modeled_ms = 0.0;
  double convergence_wall_ms = 0.0;
  RunExtremes extremes;
  int max_concurrent_failures = 0;
  bool conservation_ok = true;
  double conservation_residual = 0.0;
  int cloud_ap_slots = 0;
};

NetworkTopology make_topology(const SimulationConfig& config);
FailureSchedule make_schedule(const SimulationConfig& config,
                              const NetworkTopology& topo);

// Mean per-AP delay of the current strategy at a queue snapshot; cloud-bound
// APs contribute the configured cloud constant.
double mean_network_delay(const AllocationStrategy& strategy,
                          const NetworkTopology& topo, const QueueState& queues,
                          const DelayEvalParams& params);

// One queue-evolution step: offered loads from the strategy, then the AP and
// server updates. Failed servers (operational[i] == false) freeze.
void step_queues(const NetworkTopology& topo, const AllocationStrategy& strategy,
                 const std::vector<char>& operational, QueueState& queues,
                 double t_z);

MetricsRecord run(const SimulationConfig& config);

// Variant reusing a prepared topology and schedule (paired experiments).
MetricsRecord run_prepared(const SimulationConfig& config,
                           const NetworkTopology& topo,
                           const FailureSchedule& schedule);

// Convergence cost of the failure/repair cycle starting at (server,
// fail_slot): (recomputation count, modeled ms, wall ms).
struct CycleCost {
  long long count = 0;
  double modeled_ms = 0.0;
  double wall_ms = 0.0;
};
std::optional<CycleCost> measure_convergence(const MetricsRecord& metrics,
                                             int server, int fail_slot);

struct SweepAxes {
  std::vector<double> rho{0.3};
  std::vector<double> mu{0.3};
  std::vector<int> m{60};
  std::vector<PolicyKind> policies{PolicyKind::fodt};
  int replications = 1;
  int fixed_l = 0;  // when > 0, mu is derived as fixed_l / m
};

struct SweepRow {
  PolicyKind policy;
  double rho;
  double mu;
  int m;
  std::uint64_t seed;
  MetricsRecord metrics;
};

// Cross product of the axes with seeds independent per (m, mu, replication)
// and shared across policies and rho values for paired comparisons.
// Replications run on a worker pool sized by EDGE_FAILOVER_SIM_WORKERS.
std::vector<SweepRow> sweep(const SimulationConfig& base, const SweepAxes& axes);

}  // namespace efsim
