#include "efsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "efsim/rng.hpp"

namespace efsim {

bool NetworkTopology::adjacent(int a, int b) const {
  const auto& n = adj.at(a);
  return std::binary_search(n.begin(), n.end(), b);
}

std::optional<int> NetworkTopology::server_on(int ap) const {
  for (const auto& s : servers) {
    if (s.host_ap == ap) return s.id;
  }
  return std::nullopt;
}

std::vector<int> NetworkTopology::path_to_host(int ap) const {
  const Coverage& cov = coverages.at(coverage_of.at(ap));
  std::vector<int> path;
  int cur = ap;
  while (cur != -1) {
    path.push_back(cur);
    cur = cov.next_hop.at(cur);
  }
  return path;
}

std::vector<int> NetworkTopology::tree_path(int from, int to) const {
  if (coverage_of.at(from) != coverage_of.at(to)) {
    throw std::invalid_argument("tree_path: APs in different coverages");
  }
  std::vector<int> up_a = path_to_host(from);
  std::vector<int> up_b = path_to_host(to);
  // Splice at the lowest common ancestor.
  std::set<int> on_a(up_a.begin(), up_a.end());
  int lca = -1;
  for (int n : up_b) {
    if (on_a.count(n)) {
      lca = n;
      break;
    }
  }
  std::vector<int> path;
  for (int n : up_a) {
    path.push_back(n);
    if (n == lca) break;
  }
  std::vector<int> tail;
  for (int n : up_b) {
    if (n == lca) break;
    tail.push_back(n);
  }
  path.insert(path.end(), tail.rbegin(), tail.rend());
  return path;
}

namespace {

std::vector<std::vector<int>> build_adjacency(
    const std::vector<AccessPoint>& aps, double radius) {
  const int m = static_cast<int>(aps.size());
  std::vector<std::vector<int>> adj(m);
  const double r2 = radius * radius;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double dx = aps[i].x - aps[j].x;
      const double dy = aps[i].y - aps[j].y;
      if (dx * dx + dy * dy <= r2) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  return adj;
}

bool is_connected(const std::vector<std::vector<int>>& adj) {
  const int m = static_cast<int>(adj.size());
  if (m == 0) return false;
  std::vector<char> seen(m, 0);
  std::deque<int> q{0};
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push_back(v);
      }
    }
  }
  return count == m;
}

std::vector<int> bfs_hops(const std::vector<std::vector<int>>& adj, int src) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return dist;
}

// Greedy k-center on hop distance: start at the graph center, then
// repeatedly add the AP farthest from the current host set. Returns the
// chosen hosts and the covering radius in hops.
std::pair<std::vector<int>, int> place_hosts(
    const std::vector<std::vector<int>>& adj, int k) {
  const int m = static_cast<int>(adj.size());
  std::vector<std::vector<int>> hops(m);
  for (int i = 0; i < m; ++i) hops[i] = bfs_hops(adj, i);

  int first = 0;
  int best_ecc = std::numeric_limits<int>::max();
  for (int i = 0; i < m; ++i) {
    int ecc = *std::max_element(hops[i].begin(), hops[i].end());
    if (ecc < best_ecc) {
      best_ecc = ecc;
      first = i;
    }
  }

  std::vector<int> hosts{first};
  std::vector<int> nearest = hops[first];
  while (static_cast<int>(hosts.size()) < k) {
    int far = 0;
    for (int i = 1; i < m; ++i) {
      if (nearest[i] > nearest[far]) far = i;
    }
    hosts.push_back(far);
    for (int i = 0; i < m; ++i) nearest[i] = std::min(nearest[i], hops[far][i]);
  }
  int radius = *std::max_element(nearest.begin(), nearest.end());
  std::sort(hosts.begin(), hosts.end());
  return {hosts, radius};
}

}  // namespace

std::vector<Coverage> build_coverages(const NetworkTopology& topo) {
  const int m = topo.num_aps();
  const int nsrv = topo.num_servers();
  if (nsrv == 0) throw std::invalid_argument("build_coverages: no servers");

  // Claim ordering between servers reaching an AP at the same hop count:
  // higher compute capacity first, then lower server id.
  std::vector<int> rank(nsrv, 0);
  {
    std::vector<int> order(nsrv);
    for (int i = 0; i < nsrv; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& sa = topo.servers[a];
      const auto& sb = topo.servers[b];
      if (sa.compute_capacity != sb.compute_capacity)
        return sa.compute_capacity > sb.compute_capacity;
      return sa.id < sb.id;
    });
    for (int i = 0; i < nsrv; ++i) rank[order[i]] = i;
  }

  std::vector<int> owner(m, -1);
  std::vector<int> parent(m, -1);
  std::vector<int> hop(m, 0);
  std::vector<int> frontier;
  for (const auto& s : topo.servers) {
    if (owner[s.host_ap] != -1) {
      throw std::invalid_argument("build_coverages: shared host AP");
    }
    owner[s.host_ap] = s.id;
    frontier.push_back(s.host_ap);
  }
  std::sort(frontier.begin(), frontier.end());

  int level = 0;
  while (!frontier.empty()) {
    ++level;
    // best claim per unsettled AP: (server rank, via id)
    std::map<int, std::pair<int, int>> claims;
    for (int u : frontier) {
      for (int v : topo.adj[u]) {
        if (owner[v] != -1) continue;
        std::pair<int, int> key{rank[owner[u]], u};
        auto it = claims.find(v);
        if (it == claims.end() || key < it->second) claims[v] = key;
      }
    }
    std::vector<int> next;
    for (const auto& [v, key] : claims) {
      owner[v] = owner[key.second];
      parent[v] = key.second;
      hop[v] = level;
      next.push_back(v);
    }
    frontier = std::move(next);
  }

  for (int i = 0; i < m; ++i) {
    if (owner[i] == -1) {
      throw std::runtime_error("build_coverages: unreachable AP " +
                               std::to_string(i));
    }
  }

  std::vector<Coverage> covs(nsrv);
  for (int s = 0; s < nsrv; ++s) {
    covs[s].server = s;
  }
  for (int i = 0; i < m; ++i) covs[owner[i]].members.push_back(i);

  // Per-coverage routing tree with load-bounded fan-in. Since an AP's
  // neighbor load counts only its direct forwarders, the minimum-backlog
  // tree keeps every relay's modeled arrivals under a headroom fraction of
  // its transmit capacity instead of attaching all members to the host.
  // Falls back to the BFS parent when no parent can stay under the cap
  // within depth_limit.
  const double headroom = 0.8;
  for (Coverage& c : covs) {
    const int host = topo.servers[c.server].host_ap;
    std::map<int, int> depth;
    std::map<int, double> inflow;  // own data plus attached children
    c.next_hop[host] = -1;
    depth[host] = 0;
    inflow[host] = topo.aps[host].data_rate;
    std::set<int> members(c.members.begin(), c.members.end());
    std::set<int> pending(members.begin(), members.end());
    pending.erase(host);
    while (!pending.empty()) {
      int best_v = -1, best_u = -1;
      std::tuple<int, int, double, int> best_key{};
      for (int v : pending) {
        const double rate = topo.aps[v].data_rate;
        for (int u : topo.adj[v]) {
          if (!members.count(u) || !depth.count(u)) continue;
          if (depth[u] + 1 > topo.depth_limit) continue;
          const double load = inflow[u] + rate;
          const bool over = load > headroom * topo.aps[u].transmit_capacity;
          std::tuple<int, int, double, int> key{
              over ? 1 : 0, depth[u], load / topo.aps[u].transmit_capacity, u};
          if (best_v == -1 || key < best_key ||
              (key == best_key && v < best_v)) {
            best_v = v;
            best_u = u;
            best_key = key;
          }
        }
      }
      if (best_v == -1) {
        // capped tree cannot reach the rest: revert to BFS parents
        for (int v : pending) c.next_hop[v] = parent[v];
        break;
      }
      c.next_hop[best_v] = best_u;
      depth[best_v] = depth[best_u] + 1;
      inflow[best_u] += topo.aps[best_v].data_rate;
      inflow[best_v] = topo.aps[best_v].data_rate;
      pending.erase(best_v);
    }
    c.depth = 0;
    for (int ap : c.members) {
      int d = 0;
      for (int cur = ap; c.next_hop.at(cur) != -1; cur = c.next_hop.at(cur)) ++d;
      c.depth = std::max(c.depth, d);
    }
  }
  return covs;
}

NetworkTopology generate_topology(std::uint64_t seed, int m, double mu,
                                  int depth_limit,
                                  const GeneratorParams& params) {
  if (m < 2) throw std::invalid_argument("generate_topology: need m >= 2");
  if (!(mu > 0.0 && mu < 1.0)) {
    throw std::invalid_argument("generate_topology: mu must be in (0,1)");
  }
  const int nsrv = static_cast<int>(std::floor(mu * m));
  if (nsrv < 1) {
    throw std::invalid_argument("generate_topology: floor(mu*m) < 1");
  }
  if (depth_limit < 1) {
    throw std::invalid_argument("generate_topology: depth_limit < 1");
  }

  NetworkTopology topo;
  topo.depth_limit = depth_limit;
  topo.f_bs_cap = params.f_bs_max;
  topo.f_es_cap = params.f_es_max;

  Rng pos_rng(mix_seed(seed, "positions"));
  topo.aps.resize(m);
  for (int i = 0; i < m; ++i) {
    topo.aps[i].id = i;
    topo.aps[i].x = pos_rng.uniform01();
    topo.aps[i].y = pos_rng.uniform01();
  }

  // Auto-tune the connection radius: start near the connectivity threshold
  // of a random geometric graph and widen until the graph is connected and
  // k-center hosts cover every AP within depth_limit hops.
  double radius = std::sqrt(1.6 * std::log(std::max(m, 3)) /
                            (3.14159265358979323846 * m));
  std::vector<int> hosts;
  bool ok = false;
  for (int attempt = 0; attempt < params.connect_retries; ++attempt) {
    topo.adj = build_adjacency(topo.aps, radius);
    if (is_connected(topo.adj)) {
      auto [h, cover_radius] = place_hosts(topo.adj, nsrv);
      if (cover_radius <= depth_limit) {
        hosts = h;
        ok = true;
        break;
      }
    }
    radius *= 1.2;
  }
  if (!ok) {
    throw std::runtime_error(
        "generate_topology: could not reach a connected topology with the "
        "requested depth limit within the retry budget");
  }

  Rng par_rng(mix_seed(seed, "parameters"));
  for (int i = 0; i < m; ++i) {
    AccessPoint& ap = topo.aps[i];
    ap.transmit_capacity = par_rng.uniform(params.f_bs_min, params.f_bs_max);
    ap.attached_users = par_rng.uniform_int(params.users_min, params.users_max);
    double data = 0.0, work = 0.0, size_sum = 0.0;
    for (int u = 0; u < ap.attached_users; ++u) {
      const double rate = par_rng.uniform(params.req_rate_min, params.req_rate_max);
      const double size = par_rng.uniform(params.task_size_min, params.task_size_max);
      const double flop = par_rng.uniform(params.task_work_min, params.task_work_max);
      data += rate * size;
      work += rate * flop;
      size_sum += size;
    }
    ap.data_rate = data * params.data_scale;
    ap.work_rate = work * params.work_scale;
    ap.user_rate = ap.attached_users > 0 ? ap.data_rate / ap.attached_users : 0.0;
    ap.mean_task_size =
        ap.attached_users > 0 ? size_sum / ap.attached_users
                              : 0.5 * (params.task_size_min + params.task_size_max);
  }

  topo.servers.resize(nsrv);
  for (int s = 0; s < nsrv; ++s) {
    topo.servers[s].id = s;
    topo.servers[s].host_ap = hosts[s];
    topo.servers[s].compute_capacity =
        par_rng.uniform(params.f_es_min, params.f_es_max);
    topo.servers[s].operational = true;
  }

  topo.coverages = build_coverages(topo);
  topo.coverage_of.assign(m, -1);
  for (const auto& c : topo.coverages) {
    for (int ap : c.members) topo.coverage_of[ap] = c.server;
  }
  return topo;
}

std::set<int> edge_aps(const Coverage& coverage, const NetworkTopology& topo) {
  std::set<int> members(coverage.members.begin(), coverage.members.end());
  std::set<int> result;
  for (int ap : coverage.members) {
    for (int nb : topo.adj[ap]) {
      if (!members.count(nb)) {
        result.insert(ap);
        break;
      }
    }
  }
  return result;
}

std::set<int> neighbor_servers(int server, const NetworkTopology& topo) {
  const Coverage& cov = topo.coverages.at(server);
  std::set<int> members(cov.members.begin(), cov.members.end());
  std::set<int> result;
  for (int ap : cov.members) {
    for (int nb : topo.adj[ap]) {
      if (!members.count(nb)) result.insert(topo.coverage_of[nb]);
    }
  }
  result.erase(server);
  return result;
}

nlohmann::json topology_to_json(const NetworkTopology& topo) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["depth_limit"] = topo.depth_limit;
  j["f_bs_cap"] = topo.f_bs_cap;
  j["f_es_cap"] = topo.f_es_cap;
  auto& aps = j["aps"] = nlohmann::json::array();
  for (const auto& a : topo.aps) {
    aps.push_back({{"id", a.id},
                   {"x", a.x},
                   {"y", a.y},
                   {"transmit_capacity", a.transmit_capacity},
                   {"attached_users", a.attached_users},
                   {"user_rate", a.user_rate},
                   {"data_rate", a.data_rate},
                   {"work_rate", a.work_rate},
                   {"mean_task_size", a.mean_task_size}});
  }
  auto& servers = j["servers"] = nlohmann::json::array();
  for (const auto& s : topo.servers) {
    servers.push_back({{"id", s.id},
                       {"host_ap", s.host_ap},
                       {"compute_capacity", s.compute_capacity},
                       {"operational", s.operational}});
  }
  auto& edges = j["adjacency"] = nlohmann::json::array();
  for (int i = 0; i < topo.num_aps(); ++i) {
    for (int nb : topo.adj[i]) {
      if (nb > i) edges.push_back({i, nb});
    }
  }
  auto& covs = j["coverages"] = nlohmann::json::array();
  for (const auto& c : topo.coverages) {
    nlohmann::json jc;
    jc["server"] = c.server;
    jc["members"] = c.members;
    jc["depth"] = c.depth;
    auto& hops = jc["next_hop"] = nlohmann::json::array();
    for (const auto& [ap, hop] : c.next_hop) hops.push_back({ap, hop});
    covs.push_back(std::move(jc));
  }
  return j;
}

NetworkTopology topology_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("topology_from_json: unsupported format_version");
  }
  NetworkTopology topo;
  topo.depth_limit = j.at("depth_limit").get<int>();
  topo.f_bs_cap = j.at("f_bs_cap").get<double>();
  topo.f_es_cap = j.at("f_es_cap").get<double>();
  for (const auto& ja : j.at("aps")) {
    AccessPoint a;
    a.id = ja.at("id").get<int>();
    a.x = ja.at("x").get<double>();
    a.y = ja.at("y").get<double>();
    a.transmit_capacity = ja.at("transmit_capacity").get<double>();
    a.attached_users = ja.at("attached_users").get<int>();
    a.user_rate = ja.at("user_rate").get<double>();
    a.data_rate = ja.at("data_rate").get<double>();
    a.work_rate = ja.at("work_rate").get<double>();
    a.mean_task_size = ja.at("mean_task_size").get<double>();
    topo.aps.push_back(a);
  }
  for (const auto& js : j.at("servers")) {
    EdgeServer s;
    s.id = js.at("id").get<int>();
    s.host_ap = js.at("host_ap").get<int>();
    s.compute_capacity = js.at("compute_capacity").get<double>();
    s.operational = js.at("operational").get<bool>();
    topo.servers.push_back(s);
  }
  topo.adj.assign(topo.aps.size(), {});
  for (const auto& je : j.at("adjacency")) {
    int a = je.at(0).get<int>();
    int b = je.at(1).get<int>();
    topo.adj[a].push_back(b);
    topo.adj[b].push_back(a);
  }
  for (auto& n : topo.adj) std::sort(n.begin(), n.end());
  for (const auto& jc : j.at("coverages")) {
    Coverage c;
    c.server = jc.at("server").get<int>();
    c.members = jc.at("members").get<std::vector<int>>();
    c.depth = jc.at("depth").get<int>();
    for (const auto& h : jc.at("next_hop")) {
      c.next_hop[h.at(0).get<int>()] = h.at(1).get<int>();
    }
    topo.coverages.push_back(std::move(c));
  }
  topo.coverage_of.assign(topo.aps.size(), -1);
  for (const auto& c : topo.coverages) {
    for (int ap : c.members) topo.coverage_of[ap] = c.server;
  }
  return topo;
}

}  // namespace efsim
