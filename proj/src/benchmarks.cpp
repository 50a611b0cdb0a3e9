#include "efsim/benchmarks.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace efsim {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::fodt: return "fodt";
    case PolicyKind::cloud_assistant: return "cloud_assistant";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::global_recompute: return "global_recompute";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string& name) {
  if (name == "fodt") return PolicyKind::fodt;
  if (name == "cloud_assistant") return PolicyKind::cloud_assistant;
  if (name == "greedy") return PolicyKind::greedy;
  if (name == "global_recompute") return PolicyKind::global_recompute;
  throw std::invalid_argument("unknown policy: " + name);
}

namespace {

std::vector<int> affected_aps(int server, const AllocationStrategy& strategy) {
  std::vector<int> out;
  for (int ap = 0; ap < static_cast<int>(strategy.aps.size()); ++ap) {
    const ApAllocation& a = strategy.aps[ap];
    if (!a.cloud && a.server == server) out.push_back(ap);
  }
  return out;
}

double ap_delay(int ap, const NetworkTopology& topo, const QueueState& q) {
  return q.ap_backlog[ap] / topo.aps[ap].transmit_capacity;
}

// Hop-by-hop walk to the neighbor with (max capacity, min transmission
// delay); stops at the first AP with a direct link to an operational server.
void greedy_recover_ap(int ap, const NetworkTopology& topo,
                       AllocationStrategy& strategy, const QueueState& queues,
                       const std::vector<char>& operational,
                       const PolicyParams& params, PhaseResult& result) {
  std::set<int> visited{ap};
  std::vector<int> path{ap};
  int cur = ap;
  for (int step = 0; step <= params.greedy_max_walk; ++step) {
    if (auto direct = best_direct_server(cur, topo, queues, operational,
                                         result.evaluations)) {
      ApAllocation& a = strategy.aps[ap];
      a = ApAllocation{};
      a.server = direct->server;
      a.route = path;
      const int host = topo.servers[direct->server].host_ap;
      if (host != cur) {
        if (visited.count(host)) break;  // trapped: fall through to cloud
        a.route.push_back(host);
      }
      if (a.route.size() > 1) a.forwarders = {{a.route[1], 1.0}};
      ++result.writes;
      return;
    }
    int next = -1;
    double next_cap = -1.0, next_delay = 0.0;
    for (int v : topo.adj[cur]) {
      if (visited.count(v)) continue;
      const double cap = topo.aps[v].transmit_capacity;
      const double d = ap_delay(v, topo, queues);
      ++result.evaluations;
      const bool better = cap > next_cap + 1e-12 ||
                          (cap >= next_cap - 1e-12 &&
                           (d < next_delay - 1e-12 ||
                            (d <= next_delay + 1e-12 && v < next)));
      if (next == -1 || better) {
        next = v;
        next_cap = cap;
        next_delay = d;
      }
    }
    if (next == -1) break;  // trapped walk
    visited.insert(next);
    path.push_back(next);
    cur = next;
  }
  ApAllocation& a = strategy.aps[ap];
  a = ApAllocation{};
  a.cloud = true;
  ++result.writes;
}

}  // namespace

PhaseResult global_reassign(const NetworkTopology& topo,
                            AllocationStrategy& strategy,
                            const QueueState& queues,
                            const std::vector<char>& operational) {
  std::vector<int> servers;
  for (const auto& s : topo.servers) {
    if (operational[s.id]) servers.push_back(s.id);
  }
  if (servers.empty()) {
    throw std::runtime_error("global_reassign: no operational servers");
  }
  std::vector<RouteField> fields;
  fields.reserve(servers.size());
  for (int s : servers) {
    fields.push_back(min_delay_routes(topo.servers[s].host_ap, topo, queues));
  }
  PhaseResult result;
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_hops = std::numeric_limits<int>::max();
    for (size_t k = 0; k < servers.size(); ++k) {
      const int s = servers[k];
      const double proc =
          queues.server_backlog[s] / topo.servers[s].compute_capacity;
      const double c = fields[k].cost[ap] + proc;
      // delay first, then hop count so zero-queue ties spread by distance
      if (c < best_cost - 1e-12 ||
          (c <= best_cost + 1e-12 && fields[k].hops[ap] < best_hops)) {
        best = static_cast<int>(k);
        best_cost = c;
        best_hops = fields[k].hops[ap];
      }
    }
    ApAllocation& a = strategy.aps[ap];
    a = ApAllocation{};
    a.server = servers[best];
    a.route = {ap};
    int cur = ap;
    while (fields[best].parent[cur] != -1) {
      cur = fields[best].parent[cur];
      a.route.push_back(cur);
    }
    if (a.route.size() > 1) a.forwarders = {{a.route[1], 1.0}};
    ++result.writes;  // one reassignment per AP
  }
  return result;
}

PhaseResult apply_failure(PolicyKind kind, int server,
                          const NetworkTopology& topo,
                          AllocationStrategy& strategy, StrategyCache& cache,
                          const QueueState& queues,
                          const std::vector<char>& operational,
                          const PolicyParams& params) {
  PhaseResult result;
  switch (kind) {
    case PolicyKind::fodt: {
      RecoveryPlan plan = on_failure(server, topo, strategy, queues,
                                     operational, cache, params.eval);
      result.evaluations = plan.evaluations;
      result.writes = plan.writes;
      break;
    }
    case PolicyKind::cloud_assistant: {
      for (int ap : affected_aps(server, strategy)) {
        ApAllocation& a = strategy.aps[ap];
        a = ApAllocation{};
        a.cloud = true;
        ++result.writes;
      }
      strategy.epoch = "post-failure-" + std::to_string(server);
      break;
    }
    case PolicyKind::greedy: {
      for (int ap : affected_aps(server, strategy)) {
        greedy_recover_ap(ap, topo, strategy, queues, operational, params,
                          result);
      }
      strategy.epoch = "post-failure-" + std::to_string(server);
      break;
    }
    case PolicyKind::global_recompute: {
      if (std::count(operational.begin(), operational.end(), 1) == 0) {
        // Nothing left to recompute against: park every AP on the cloud.
        for (int ap : affected_aps(server, strategy)) {
          ApAllocation& a = strategy.aps[ap];
          a = ApAllocation{};
          a.cloud = true;
          ++result.writes;
        }
      } else {
        result = global_reassign(topo, strategy, queues, operational);
      }
      strategy.epoch = "post-failure-" + std::to_string(server);
      break;
    }
  }
  return result;
}

PhaseResult apply_repair(PolicyKind kind, int server,
                         const NetworkTopology& topo,
                         AllocationStrategy& strategy, StrategyCache& cache,
                         const QueueState& queues,
                         const std::vector<char>& operational,
                         const PolicyParams& params) {
  PhaseResult result;
  switch (kind) {
    case PolicyKind::fodt: {
      result.writes = on_repair(server, topo, strategy, cache);
      break;
    }
    case PolicyKind::cloud_assistant: {
      restore_fragment(cache, server, strategy);
      result.writes = static_cast<long long>(
          cache.fragments.at(server).size());
      strategy.epoch = "post-repair-" + std::to_string(server);
      break;
    }
    case PolicyKind::greedy: {
      // No cache: the repaired server's original members recompute greedily.
      for (int ap : topo.coverages[server].members) {
        greedy_recover_ap(ap, topo, strategy, queues, operational, params,
                          result);
      }
      strategy.epoch = "post-repair-" + std::to_string(server);
      break;
    }
    case PolicyKind::global_recompute: {
      result = global_reassign(topo, strategy, queues, operational);
      strategy.epoch = "post-repair-" + std::to_string(server);
      break;
    }
  }
  return result;
}

}  // namespace efsim
