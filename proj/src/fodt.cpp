#include "efsim/fodt.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace efsim {

namespace {

double ap_delay(int ap, const NetworkTopology& topo, const QueueState& q) {
  return q.ap_backlog[ap] / topo.aps[ap].transmit_capacity;
}

double server_delay(int server, const NetworkTopology& topo,
                    const QueueState& q) {
  return q.server_backlog[server] / topo.servers[server].compute_capacity;
}

double known_delay(int ap, const NetworkTopology& topo,
                   const AllocationStrategy& strategy, const QueueState& q) {
  const ApAllocation& a = strategy.aps[ap];
  double d = 0.0;
  for (int hop : a.route) d += ap_delay(hop, topo, q);
  return d + server_delay(a.server, topo, q);
}

// Candidate scoring during recovery. Selection combines the neighbor's known
// delay from the previous slot with the marginal load the move would place
// on the target server, using assignments announced earlier in the same
// event; this keeps a wave of simultaneous recoveries from herding onto one
// momentarily idle server.
struct RecoveryScorer {
  const NetworkTopology& topo;
  const QueueState& queues;
  double t_z = 1.0;
  std::vector<double> server_load;
  std::vector<double> ap_arrivals;  // modeled T_U + T_ne per AP

  RecoveryScorer(const NetworkTopology& t, const QueueState& q,
                 const AllocationStrategy& strategy)
      : topo(t),
        queues(q),
        server_load(t.num_servers(), 0.0),
        ap_arrivals(t.num_aps(), 0.0) {
    for (int ap = 0; ap < t.num_aps(); ++ap) {
      const ApAllocation& a = strategy.aps[ap];
      if (a.cloud) continue;
      if (a.server >= 0) server_load[a.server] += t.aps[ap].work_rate;
      ap_arrivals[ap] += t.aps[ap].data_rate;
      for (const auto& [next, p] : a.forwarders) {
        ap_arrivals[next] += t.aps[ap].data_rate * p;
      }
    }
  }

  double server_term(int server, double extra_work) const {
    const EdgeServer& s = topo.servers[server];
    const double q = queues.server_backlog[server] +
                     (server_load[server] + extra_work - s.compute_capacity) * t_z;
    return std::max(0.0, q) / s.compute_capacity;
  }

  // Transmission delay at `hop` with `extra_data` arriving next slot.
  double ap_term(int hop, double extra_data) const {
    const AccessPoint& a = topo.aps[hop];
    const double q = queues.ap_backlog[hop] +
                     (ap_arrivals[hop] + extra_data - a.transmit_capacity) * t_z;
    return std::max(0.0, q) / a.transmit_capacity;
  }

  // Neighbor u's end-to-end delay if `extra_work` joins its server and
  // `extra_data` starts flowing into u itself.
  double neighbor_score(int u, const AllocationStrategy& strategy,
                        double extra_work, double extra_data) const {
    const ApAllocation& a = strategy.aps[u];
    double d = ap_term(u, extra_data);
    for (size_t k = 1; k < a.route.size(); ++k) {
      d += ap_delay(a.route[k], topo, queues);
    }
    return d + server_term(a.server, extra_work);
  }

  // Keep the modeled loads consistent with a strategy write.
  void assign(int ap, const ApAllocation& before, const ApAllocation& after) {
    const double data = topo.aps[ap].data_rate;
    const double work = topo.aps[ap].work_rate;
    if (!before.cloud) {
      if (before.server >= 0) server_load[before.server] -= work;
      ap_arrivals[ap] -= data;
      for (const auto& [next, p] : before.forwarders) {
        ap_arrivals[next] -= data * p;
      }
    }
    if (!after.cloud) {
      if (after.server >= 0) server_load[after.server] += work;
      ap_arrivals[ap] += data;
      for (const auto& [next, p] : after.forwarders) {
        ap_arrivals[next] += data * p;
      }
    }
  }
};

RecoveryDecision recover_one(int ap, int failed, const NetworkTopology& topo,
                             AllocationStrategy& strategy,
                             const QueueState& queues,
                             const std::vector<char>& operational,
                             const std::set<int>& touched, RecoveryScorer& scorer,
                             long long& evaluations, long long& writes) {
  RecoveryDecision dec;
  dec.ap = ap;
  const double own_work = topo.aps[ap].work_rate;
  const double own_data = topo.aps[ap].data_rate;

  // Direct link to an operational server (hosted here or next door).
  {
    int best = -1;
    std::vector<int> best_route;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& srv : topo.servers) {
      if (!operational[srv.id]) continue;
      if (srv.host_ap != ap && !topo.adjacent(ap, srv.host_ap)) continue;
      std::vector<int> route{ap};
      double d = scorer.ap_term(ap, 0.0);
      if (srv.host_ap != ap) {
        route.push_back(srv.host_ap);
        d += scorer.ap_term(srv.host_ap, own_data);
      }
      d += scorer.server_term(srv.id, own_work);
      ++evaluations;
      if (d < best_score - 1e-12) {
        best = srv.id;
        best_route = std::move(route);
        best_score = d;
      }
    }
    if (best >= 0) {
      dec.kind = RecoveryDecision::Kind::direct;
      dec.server = best;
      ApAllocation& a = strategy.aps[ap];
      const ApAllocation before = a;
      a = ApAllocation{};
      a.server = best;
      a.route = best_route;
      if (a.route.size() > 1) a.forwarders = {{a.route[1], 1.0}};
      ++writes;
      scorer.assign(ap, before, a);
      return dec;
    }
  }

  // Candidate exits: every (edge AP of the AP's original coverage, external
  // neighbor with an operational assignment) pair, scored as tree-path
  // transmission cost plus the neighbor's loaded delay.
  const Coverage& cov = topo.coverages[topo.coverage_of[ap]];
  const std::set<int> exits = edge_aps(cov, topo);
  const std::set<int> members(cov.members.begin(), cov.members.end());

  struct Exit {
    double score;
    int tree_hops;
    int exit_ap;
    int access_ap;
    int server;
    std::vector<int> path;
  };
  std::vector<Exit> options;
  for (int e : exits) {
    std::vector<int> path = topo.tree_path(ap, e);
    double path_cost = 0.0;
    for (int hop : path) path_cost += scorer.ap_term(hop, 0.0);
    // Only the exit's own record forwards into the accessing AP, so the
    // marginal data applies when this AP is the exit itself.
    const double extra_data = ap == e ? own_data : 0.0;
    for (int u : topo.adj[e]) {
      if (members.count(u)) continue;
      if (topo.coverage_of[u] == failed) continue;
      if (touched.count(u)) continue;
      const ApAllocation& ua = strategy.aps[u];
      if (ua.cloud || ua.server < 0 || !operational[ua.server]) continue;
      const double score =
          path_cost + scorer.neighbor_score(u, strategy, own_work, extra_data);
      ++evaluations;
      options.push_back(
          {score, static_cast<int>(path.size()) - 1, e, u, ua.server, path});
    }
  }
  // Score ties resolve to the nearest exit so a coverage disperses over its
  // boundary instead of funneling through one pair.
  std::sort(options.begin(), options.end(), [](const Exit& a, const Exit& b) {
    if (std::abs(a.score - b.score) > 1e-12) return a.score < b.score;
    if (a.tree_hops != b.tree_hops) return a.tree_hops < b.tree_hops;
    if (a.exit_ap != b.exit_ap) return a.exit_ap < b.exit_ap;
    return a.access_ap < b.access_ap;
  });

  // Take the best option whose spliced route is a simple path; an accessing
  // AP's stored route can re-enter this coverage after earlier cascades.
  const Exit* picked = nullptr;
  std::vector<int> full_route;
  for (const Exit& opt : options) {
    std::vector<int> route = opt.path;
    const auto& access_route = strategy.aps[opt.access_ap].route;
    route.insert(route.end(), access_route.begin(), access_route.end());
    std::set<int> uniq(route.begin(), route.end());
    if (uniq.size() == route.size()) {
      picked = &opt;
      full_route = std::move(route);
      break;
    }
  }

  ApAllocation& a = strategy.aps[ap];
  const ApAllocation before = a;
  if (!picked) {
    dec.kind = RecoveryDecision::Kind::cloud;
    if (a.cloud) return dec;  // unchanged, nothing written
    a = ApAllocation{};
    a.cloud = true;
  } else {
    dec.kind = RecoveryDecision::Kind::reversed;
    dec.server = picked->server;
    dec.reversed_path = picked->path;
    dec.accessing_ap = picked->access_ap;
    a = ApAllocation{};
    a.server = picked->server;
    a.route = std::move(full_route);
    a.forwarders = {{a.route[1], 1.0}};
  }
  scorer.assign(ap, before, a);
  ++writes;
  return dec;
}

}  // namespace

std::vector<int> reverse_route(int ap, const Coverage& coverage,
                               const NetworkTopology& topo) {
  std::set<int> exits = edge_aps(coverage, topo);
  if (exits.empty()) {
    throw std::runtime_error("reverse_route: coverage has no edge AP");
  }
  if (exits.count(ap)) return {ap};

  // BFS over the routing tree from `ap`; hop ties resolve to the lower id.
  std::map<int, std::vector<int>> tree_adj;
  for (const auto& [child, parent] : coverage.next_hop) {
    if (parent == -1) continue;
    tree_adj[child].push_back(parent);
    tree_adj[parent].push_back(child);
  }
  for (auto& [_, nbrs] : tree_adj) std::sort(nbrs.begin(), nbrs.end());

  std::map<int, int> dist;
  std::deque<int> queue{ap};
  dist[ap] = 0;
  int best = -1;
  int best_dist = std::numeric_limits<int>::max();
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (dist[u] > best_dist) break;
    if (exits.count(u) && (dist[u] < best_dist || u < best)) {
      best = u;
      best_dist = dist[u];
      continue;
    }
    for (int v : tree_adj[u]) {
      if (!dist.count(v)) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return topo.tree_path(ap, best);
}

std::pair<int, int> select_accessing_ap(int edge_ap, const NetworkTopology& topo,
                                        const AllocationStrategy& strategy,
                                        const QueueState& queues,
                                        const std::vector<char>& operational) {
  const int own_cov = topo.coverage_of[edge_ap];
  int best = -1, best_server = -1;
  double best_delay = std::numeric_limits<double>::infinity();
  for (int u : topo.adj[edge_ap]) {
    if (topo.coverage_of[u] == own_cov) continue;
    const ApAllocation& a = strategy.aps[u];
    if (a.cloud || a.server < 0 || !operational[a.server]) continue;
    const double d = known_delay(u, topo, strategy, queues);
    if (d < best_delay - 1e-12 || (d <= best_delay + 1e-12 && u < best)) {
      best = u;
      best_server = a.server;
      best_delay = d;
    }
  }
  if (best < 0) {
    throw std::runtime_error("select_accessing_ap: no qualifying neighbor");
  }
  return {best, best_server};
}

std::optional<DirectPick> best_direct_server(int ap, const NetworkTopology& topo,
                                             const QueueState& queues,
                                             const std::vector<char>& operational,
                                             long long& evaluations) {
  std::optional<DirectPick> best;
  for (const auto& srv : topo.servers) {
    if (!operational[srv.id]) continue;
    if (srv.host_ap != ap && !topo.adjacent(ap, srv.host_ap)) continue;
    std::vector<int> route{ap};
    if (srv.host_ap != ap) route.push_back(srv.host_ap);
    double d = server_delay(srv.id, topo, queues);
    for (int hop : route) d += ap_delay(hop, topo, queues);
    ++evaluations;
    if (!best || d < best->delay - 1e-12) {
      best = DirectPick{srv.id, route, d};
    }
  }
  return best;
}

RecoveryPlan on_failure(int failed, const NetworkTopology& topo,
                        AllocationStrategy& strategy, const QueueState& queues,
                        const std::vector<char>& operational,
                        const StrategyCache& cache,
                        const DelayEvalParams& params) {
  if (operational.at(failed)) {
    throw std::invalid_argument("on_failure: server still marked operational");
  }
  if (!cache.fragments.count(failed)) {
    throw std::invalid_argument("on_failure: fragment not captured");
  }

  RecoveryPlan plan;
  plan.failed_server = failed;

  std::vector<int> affected;
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    const ApAllocation& a = strategy.aps[ap];
    if (!a.cloud && a.server == failed) affected.push_back(ap);
  }

  RecoveryScorer scorer(topo, queues, strategy);
  scorer.t_z = params.t_z;
  // APs rewritten during this pass are not yet announced to their neighbors
  // and cannot serve as accessing APs for later APs of the same event.
  std::set<int> touched(affected.begin(), affected.end());

  std::map<int, size_t> decision_index;
  for (int ap : affected) {
    decision_index[ap] = plan.decisions.size();
    plan.decisions.push_back(recover_one(ap, failed, topo, strategy, queues,
                                         operational, touched, scorer,
                                         plan.evaluations, plan.writes));
  }

  // Stranded APs retry once the event's recovered neighbors have announced
  // their new routes; coverages whose only neighbor is the failed one are
  // rescued through it.
  while (true) {
    std::vector<int> stranded;
    for (const auto& dec : plan.decisions) {
      if (dec.kind == RecoveryDecision::Kind::cloud) stranded.push_back(dec.ap);
    }
    if (stranded.empty()) break;
    touched = std::set<int>(stranded.begin(), stranded.end());
    bool progress = false;
    for (int ap : stranded) {
      RecoveryDecision dec =
          recover_one(ap, failed, topo, strategy, queues, operational, touched,
                      scorer, plan.evaluations, plan.writes);
      if (dec.kind != RecoveryDecision::Kind::cloud) {
        plan.decisions[decision_index[ap]] = std::move(dec);
        progress = true;
      }
    }
    if (!progress) break;
  }

  strategy.epoch = "post-failure-" + std::to_string(failed);
  return plan;
}

RescueResult rescue_stranded(const NetworkTopology& topo,
                             AllocationStrategy& strategy,
                             const QueueState& queues,
                             const std::vector<char>& operational,
                             const DelayEvalParams& params) {
  RescueResult result;
  std::vector<int> stranded;
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    if (strategy.aps[ap].cloud) stranded.push_back(ap);
  }
  if (stranded.empty()) return result;

  RecoveryScorer scorer(topo, queues, strategy);
  scorer.t_z = params.t_z;
  std::set<int> touched(stranded.begin(), stranded.end());
  for (int ap : stranded) {
    RecoveryDecision dec =
        recover_one(ap, topo.coverage_of[ap], topo, strategy, queues,
                    operational, touched, scorer, result.evaluations,
                    result.writes);
    if (dec.kind != RecoveryDecision::Kind::cloud) ++result.rescued;
  }
  return result;
}

long long on_repair(int repaired, const NetworkTopology& topo,
                    AllocationStrategy& strategy, const StrategyCache& cache) {
  auto it = cache.fragments.find(repaired);
  if (it == cache.fragments.end()) {
    throw std::invalid_argument("on_repair: fragment not captured");
  }
  restore_fragment(cache, repaired, strategy);
  strategy.epoch = "post-repair-" + std::to_string(repaired);
  (void)topo;
  return static_cast<long long>(it->second.size());
}

nlohmann::json recovery_plan_to_json(const RecoveryPlan& plan) {
  nlohmann::json j;
  j["failed_server"] = plan.failed_server;
  j["evaluations"] = plan.evaluations;
  j["writes"] = plan.writes;
  auto& decs = j["decisions"] = nlohmann::json::array();
  for (const auto& d : plan.decisions) {
    nlohmann::json jd;
    jd["ap"] = d.ap;
    switch (d.kind) {
      case RecoveryDecision::Kind::direct: jd["kind"] = "direct"; break;
      case RecoveryDecision::Kind::reversed: jd["kind"] = "reversed"; break;
      case RecoveryDecision::Kind::cloud: jd["kind"] = "cloud"; break;
    }
    jd["server"] = d.server;
    jd["reversed_path"] = d.reversed_path;
    jd["accessing_ap"] = d.accessing_ap;
    decs.push_back(std::move(jd));
  }
  return j;
}

}  // namespace efsim
