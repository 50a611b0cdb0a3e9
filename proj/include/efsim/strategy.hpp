#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace efsim {

struct NetworkTopology;
struct Coverage;

// Per-AP slice of the user-server allocation strategy. `forwarders` holds
// the (next-hop AP, task proportion) choices; `route` is the full forwarding
// path from the AP to its server's host AP, inclusive of both ends. A
// cloud-bound AP has server == -1, cloud == true and an empty route.
struct ApAllocation {
  int server = -1;
  bool cloud = false;
  std::vector<std::pair<int, double>> forwarders;
  std::vector<int> route;

  bool operator==(const ApAllocation&) const = default;
};

struct AllocationStrategy {
  std::vector<ApAllocation> aps;
  std::string epoch = "pre-failure";
  int p_levels = 10;  // proportion granularity: p is a multiple of 1/p_levels

  bool operator==(const AllocationStrategy&) const = default;
};

// Pre-failure fragments keyed by server, restored verbatim on repair.
struct StrategyCache {
  std::map<int, std::vector<std::pair<int, ApAllocation>>> fragments;
};

// Strategy implied by the topology's coverages: every AP offloads to its
// coverage server along the routing tree.
AllocationStrategy baseline_strategy(const NetworkTopology& topo);

void capture_fragment(const AllocationStrategy& strategy,
                      const Coverage& coverage, StrategyCache& cache);

// Restores the captured fragment for `server`; entries outside the fragment
// are untouched. Throws when the server was never captured.
void restore_fragment(const StrategyCache& cache, int server,
                      AllocationStrategy& strategy);

nlohmann::json strategy_to_json(const AllocationStrategy& s);
AllocationStrategy strategy_from_json(const nlohmann::json& j);

}  // namespace efsim
