#pragma once

#include <string>
#include <vector>

#include "efsim/allocation.hpp"
#include "efsim/fodt.hpp"
#include "efsim/strategy.hpp"
#include "efsim/topology.hpp"

namespace efsim {

enum class PolicyKind { fodt, cloud_assistant, greedy, global_recompute };

std::string to_string(PolicyKind kind);
PolicyKind policy_from_string(const std::string& name);

struct PolicyParams {
  DelayEvalParams eval;
  int greedy_max_walk = 64;
};

struct PhaseResult {
  long long evaluations = 0;
  long long writes = 0;
  long long cost() const { return evaluations + writes; }
};

// Every policy exposes the same failure/repair pair and edits the strategy
// in place; emitted strategies always pass validate_strategy.
PhaseResult apply_failure(PolicyKind kind, int server,
                          const NetworkTopology& topo,
                          AllocationStrategy& strategy, StrategyCache& cache,
                          const QueueState& queues,
                          const std::vector<char>& operational,
                          const PolicyParams& params);

PhaseResult apply_repair(PolicyKind kind, int server,
                         const NetworkTopology& topo,
                         AllocationStrategy& strategy, StrategyCache& cache,
                         const QueueState& queues,
                         const std::vector<char>& operational,
                         const PolicyParams& params);

// Reassigns every AP to its minimum-delay operational server with
// min-transmission-delay routes; used by the global recompute baseline.
PhaseResult global_reassign(const NetworkTopology& topo,
                            AllocationStrategy& strategy,
                            const QueueState& queues,
                            const std::vector<char>& operational);

}  // namespace efsim
