#pragma once

#include <set>
#include <string>
#include <vector>

#include "efsim/delay_model.hpp"
#include "efsim/strategy.hpp"
#include "efsim/topology.hpp"

namespace efsim {

// Per-constraint validation outcome. `pass` is the conjunction of all
// constraint checks plus route consistency.
struct ValidationReport {
  bool forwarding_binary = true;      // forwarder entries well-formed (13.a)
  bool proportions_sum = true;        // per-AP proportions sum to 1 (13.b)
  bool single_server = true;          // one server per non-cloud AP (13.c)
  bool ap_capacity = true;            // f_BS within the admissible cap (13.d)
  bool server_capacity = true;        // f_es within the admissible cap (13.e)
  bool routes_consistent = true;      // routes are simple paths to the host
  std::vector<int> offenders;
  bool pass() const {
    return forwarding_binary && proportions_sum && single_server &&
           ap_capacity && server_capacity && routes_consistent;
  }
  std::string describe() const;
};

ValidationReport validate_strategy(const AllocationStrategy& strategy,
                                   const NetworkTopology& topo);

struct DelayEvalParams {
  double t_z = 1.0;
  double cloud_base_delay = 0.1;     // seconds
  double cloud_backhaul_rate = 0.08;  // Mbit/s toward the remote cloud
};

double cloud_delay(const AccessPoint& ap, const DelayEvalParams& params);

// Network-wide delay of a strategy at a queue snapshot: the sum of
// end_to_end_delay over all APs, cloud-bound APs contributing the cloud
// constant. Throws on an invalid strategy.
double total_network_delay(const AllocationStrategy& strategy,
                           const NetworkTopology& topo,
                           const QueueState& queues,
                           const DelayEvalParams& params = {});

// Min-cost route from every AP to `target` under node costs
// backlog/transmit_capacity (cost includes both endpoints). parent[] gives
// deterministic tie-broken predecessors.
struct RouteField {
  std::vector<double> cost;
  std::vector<int> parent;
  std::vector<int> hops;
};
RouteField min_delay_routes(int target_ap, const NetworkTopology& topo,
                            const QueueState& queues);

// Exhaustive search over all assignments of APs to operational servers,
// each AP routed by its min-transmission-delay path; returns the strategy
// with minimum total_network_delay. Refuses instances above the
// M <= 12, L <= 4 budget.
struct OracleResult {
  AllocationStrategy strategy;
  double delay = 0.0;
  long long candidates = 0;
};
OracleResult brute_force_optimal(const NetworkTopology& topo,
                                 const QueueState& queues,
                                 const std::set<int>& failed,
                                 const DelayEvalParams& params = {});

}  // namespace efsim
