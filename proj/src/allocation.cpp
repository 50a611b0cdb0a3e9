#include "efsim/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace efsim {

std::string ValidationReport::describe() const {
  std::ostringstream os;
  os << (pass() ? "pass " : "FAIL ");
  os << "[13.a " << (forwarding_binary ? "ok" : "violated") << ", 13.b "
     << (proportions_sum ? "ok" : "violated") << ", 13.c "
     << (single_server ? "ok" : "violated") << ", 13.d "
     << (ap_capacity ? "ok" : "violated") << ", 13.e "
     << (server_capacity ? "ok" : "violated") << ", routes "
     << (routes_consistent ? "ok" : "violated") << "]";
  if (!offenders.empty()) {
    os << " offenders:";
    for (int id : offenders) os << ' ' << id;
  }
  return os.str();
}

ValidationReport validate_strategy(const AllocationStrategy& strategy,
                                   const NetworkTopology& topo) {
  ValidationReport rep;
  auto flag = [&rep](bool& field, int offender) {
    field = false;
    rep.offenders.push_back(offender);
  };
  if (static_cast<int>(strategy.aps.size()) != topo.num_aps()) {
    rep.routes_consistent = false;
    return rep;
  }
  const double eps = 1e-9;
  const double level = 1.0 / std::max(1, strategy.p_levels);
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    const ApAllocation& a = strategy.aps[ap];
    if (a.cloud) {
      if (a.server != -1 || !a.forwarders.empty() || !a.route.empty()) {
        flag(rep.single_server, ap);
      }
      continue;
    }
    if (a.server < 0 || a.server >= topo.num_servers()) {
      flag(rep.single_server, ap);
      continue;
    }
    // 13.a: each forwarder appears at most once with a valid id.
    std::set<int> seen;
    double sum = 0.0;
    bool entries_ok = true;
    for (const auto& [next, p] : a.forwarders) {
      if (next < 0 || next >= topo.num_aps() || next == ap || seen.count(next)) {
        entries_ok = false;
      }
      seen.insert(next);
      if (p < -eps || p > 1.0 + eps) entries_ok = false;
      // 13.b: proportions on the discretization grid.
      const double steps = p / level;
      if (std::abs(steps - std::round(steps)) > 1e-6) {
        flag(rep.proportions_sum, ap);
      }
      sum += p;
    }
    if (!entries_ok) flag(rep.forwarding_binary, ap);
    if (!a.forwarders.empty() && std::abs(sum - 1.0) > eps) {
      flag(rep.proportions_sum, ap);
    }
    // Route: simple path over adjacency from the AP to the server's host.
    bool route_ok = !a.route.empty() && a.route.front() == ap &&
                    a.route.back() == topo.servers[a.server].host_ap;
    if (route_ok) {
      std::set<int> visited;
      for (size_t k = 0; k < a.route.size(); ++k) {
        if (!visited.insert(a.route[k]).second) route_ok = false;
        if (k + 1 < a.route.size() &&
            !topo.adjacent(a.route[k], a.route[k + 1])) {
          route_ok = false;
        }
      }
      if (a.route.size() > 1 &&
          (a.forwarders.empty() || a.forwarders.front().first != a.route[1])) {
        route_ok = false;
      }
      if (a.route.size() == 1 && !a.forwarders.empty()) route_ok = false;
    }
    if (!route_ok) flag(rep.routes_consistent, ap);
  }
  for (const auto& ap : topo.aps) {
    if (ap.transmit_capacity <= 0.0 || ap.transmit_capacity > topo.f_bs_cap + eps) {
      flag(rep.ap_capacity, ap.id);
    }
  }
  for (const auto& s : topo.servers) {
    if (s.compute_capacity <= 0.0 || s.compute_capacity > topo.f_es_cap + eps) {
      flag(rep.server_capacity, s.id);
    }
  }
  std::sort(rep.offenders.begin(), rep.offenders.end());
  rep.offenders.erase(std::unique(rep.offenders.begin(), rep.offenders.end()),
                      rep.offenders.end());
  return rep;
}

double cloud_delay(const AccessPoint& ap, const DelayEvalParams& params) {
  return params.cloud_base_delay + ap.mean_task_size / params.cloud_backhaul_rate;
}

double total_network_delay(const AllocationStrategy& strategy,
                           const NetworkTopology& topo,
                           const QueueState& queues,
                           const DelayEvalParams& params) {
  ValidationReport rep = validate_strategy(strategy, topo);
  if (!rep.pass()) {
    throw std::invalid_argument("total_network_delay: invalid strategy: " +
                                rep.describe());
  }
  double total = 0.0;
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    const ApAllocation& a = strategy.aps[ap];
    if (a.cloud) {
      total += cloud_delay(topo.aps[ap], params);
    } else {
      total += end_to_end_delay(ap, a.server, strategy, queues, topo);
    }
  }
  return total;
}

RouteField min_delay_routes(int target_ap, const NetworkTopology& topo,
                            const QueueState& queues) {
  const int m = topo.num_aps();
  RouteField field;
  field.cost.assign(m, std::numeric_limits<double>::infinity());
  field.parent.assign(m, -1);
  field.hops.assign(m, std::numeric_limits<int>::max());
  std::vector<int>& hops = field.hops;
  auto node_cost = [&](int v) {
    return queues.ap_backlog[v] / topo.aps[v].transmit_capacity;
  };
  const double eps = 1e-12;
  // Ties on accumulated delay are broken by hop count, then by predecessor
  // id, so zero-backlog regions still yield shortest deterministic routes.
  using Item = std::tuple<double, int, int>;  // (cost, hops, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  field.cost[target_ap] = node_cost(target_ap);
  hops[target_ap] = 0;
  heap.push({field.cost[target_ap], 0, target_ap});
  while (!heap.empty()) {
    auto [c, h, u] = heap.top();
    heap.pop();
    if (c > field.cost[u] + eps || (h > hops[u] && c > field.cost[u] - eps)) {
      continue;
    }
    for (int v : topo.adj[u]) {
      const double nc = field.cost[u] + node_cost(v);
      const int nh = hops[u] + 1;
      const bool better =
          nc < field.cost[v] - eps ||
          (nc <= field.cost[v] + eps &&
           (nh < hops[v] || (nh == hops[v] && u < field.parent[v])));
      if (better && v != target_ap) {
        field.cost[v] = std::min(nc, field.cost[v]);
        hops[v] = nh;
        field.parent[v] = u;
        heap.push({field.cost[v], nh, v});
      }
    }
  }
  return field;
}

namespace {

std::vector<int> route_from_field(int ap, const RouteField& field) {
  std::vector<int> route{ap};
  int cur = ap;
  while (field.parent[cur] != -1) {
    cur = field.parent[cur];
    route.push_back(cur);
  }
  return route;
}

}  // namespace

OracleResult brute_force_optimal(const NetworkTopology& topo,
                                 const QueueState& queues,
                                 const std::set<int>& failed,
                                 const DelayEvalParams& params) {
  const int m = topo.num_aps();
  const int nsrv = topo.num_servers();
  if (m > 12 || nsrv > 4) {
    throw std::invalid_argument(
        "brute_force_optimal: instance above the M<=12, L<=4 budget");
  }
  std::vector<int> operational;
  for (const auto& s : topo.servers) {
    if (!failed.count(s.id)) operational.push_back(s.id);
  }
  if (operational.empty()) {
    throw std::invalid_argument("brute_force_optimal: no operational servers");
  }
  const int k = static_cast<int>(operational.size());

  // Per-(AP, server) cost: min-delay route + processing delay. With
  // node-additive costs this is exact per assignment choice.
  std::vector<RouteField> fields(k);
  std::vector<std::vector<double>> cost(m, std::vector<double>(k, 0.0));
  for (int s = 0; s < k; ++s) {
    const EdgeServer& srv = topo.servers[operational[s]];
    fields[s] = min_delay_routes(srv.host_ap, topo, queues);
    const double proc =
        queues.server_backlog[srv.id] / srv.compute_capacity;
    for (int ap = 0; ap < m; ++ap) cost[ap][s] = fields[s].cost[ap] + proc;
  }

  // Odometer over all k^m assignments.
  std::vector<int> choice(m, 0), best_choice(m, 0);
  double best = std::numeric_limits<double>::infinity();
  long long candidates = 0;
  while (true) {
    double d = 0.0;
    for (int ap = 0; ap < m; ++ap) d += cost[ap][choice[ap]];
    ++candidates;
    if (d < best) {
      best = d;
      best_choice = choice;
    }
    int pos = 0;
    while (pos < m && ++choice[pos] == k) {
      choice[pos] = 0;
      ++pos;
    }
    if (pos == m) break;
  }

  OracleResult result;
  result.candidates = candidates;
  result.strategy.epoch = "oracle";
  result.strategy.aps.resize(m);
  for (int ap = 0; ap < m; ++ap) {
    ApAllocation& a = result.strategy.aps[ap];
    a.server = operational[best_choice[ap]];
    a.route = route_from_field(ap, fields[best_choice[ap]]);
    if (a.route.size() > 1) a.forwarders = {{a.route[1], 1.0}};
  }
  result.delay = total_network_delay(result.strategy, topo, queues, params);
  return result;
}

}  // namespace efsim
