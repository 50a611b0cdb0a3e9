#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "efsim/allocation.hpp"
#include "efsim/delay_model.hpp"
#include "efsim/strategy.hpp"
#include "efsim/topology.hpp"

namespace efsim {

// Coverage-local failure recovery: affected APs with a direct link to an
// operational server take it; the rest exit their pre-failure routing tree
// through an edge AP and enter a neighbor coverage through the accessing AP
// with the smallest known delay. On repair the cached pre-failure fragment
// is restored verbatim.

struct RecoveryDecision {
  enum class Kind { direct, reversed, cloud };
  int ap = -1;
  Kind kind = Kind::cloud;
  int server = -1;                 // target server (direct and reversed)
  std::vector<int> reversed_path;  // [ap .. edge AP], reversed only
  int accessing_ap = -1;           // reversed only
};

struct RecoveryPlan {
  int failed_server = -1;
  std::vector<RecoveryDecision> decisions;
  long long evaluations = 0;
  long long writes = 0;
  long long cost() const { return evaluations + writes; }
};

nlohmann::json recovery_plan_to_json(const RecoveryPlan& plan);

// Pre-failure tree path from `ap` to the nearest edge AP of its coverage
// (ties by lower edge-AP id). Throws when the coverage has no edge AP.
std::vector<int> reverse_route(int ap, const Coverage& coverage,
                               const NetworkTopology& topo);

// External neighbor of `edge_ap` minimizing its known end-to-end delay,
// restricted to neighbors assigned to an operational server. Returns
// (accessing AP, its server). Throws when no candidate qualifies.
std::pair<int, int> select_accessing_ap(int edge_ap, const NetworkTopology& topo,
                                        const AllocationStrategy& strategy,
                                        const QueueState& queues,
                                        const std::vector<char>& operational);

// Minimum-delay operational server directly linked to `ap` (hosted on it or
// on an adjacent AP), with the number of delay evaluations performed.
struct DirectPick {
  int server = -1;
  std::vector<int> route;
  double delay = 0.0;
};
std::optional<DirectPick> best_direct_server(int ap, const NetworkTopology& topo,
                                             const QueueState& queues,
                                             const std::vector<char>& operational,
                                             long long& evaluations);

// Recovers every AP currently assigned to `failed`. The strategy is edited
// in place; only affected APs change. `operational[failed]` must already be
// false and the failed server's fragment must be captured in `cache`.
RecoveryPlan on_failure(int failed, const NetworkTopology& topo,
                        AllocationStrategy& strategy, const QueueState& queues,
                        const std::vector<char>& operational,
                        const StrategyCache& cache,
                        const DelayEvalParams& params = {});

// Restores the cached fragment of `repaired`. Returns entries restored.
long long on_repair(int repaired, const NetworkTopology& topo,
                    AllocationStrategy& strategy, const StrategyCache& cache);

// Re-runs failure recovery for every cloud-bound AP (the failure phase is
// still open for them while their server is down). Invoked by the engine
// after each event so stranded pockets reattach once the network changes.
struct RescueResult {
  long long evaluations = 0;
  long long writes = 0;
  int rescued = 0;
};
RescueResult rescue_stranded(const NetworkTopology& topo,
                             AllocationStrategy& strategy,
                             const QueueState& queues,
                             const std::vector<char>& operational,
                             const DelayEvalParams& params = {});

}  // namespace efsim
