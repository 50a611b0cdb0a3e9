#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace efsim {

// A base station / network node. Mobile users are aggregated into the AP at
// generation time: data_rate (Mbit/s) drives the AP transmission queue and
// work_rate (MFLOP/s) drives the assigned server's processing queue.
struct AccessPoint {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double transmit_capacity = 0.0;  // f_BS, Mbit/s
  int attached_users = 0;          // N_i
  double user_rate = 0.0;          // mean per-user admitted data rate, Mbit/s
  double data_rate = 0.0;          // lambda_B, Mbit/s (sum over users)
  double work_rate = 0.0;          // MFLOP/s offered compute load
  double mean_task_size = 0.0;     // Mbit per task, used by the cloud path
};

struct EdgeServer {
  int id = 0;
  int host_ap = -1;
  double compute_capacity = 0.0;  // f_es, MFLOP/s
  bool operational = true;
};

// The set of APs served by one server, with the pre-failure routing tree
// rooted at the server's host AP. next_hop maps member -> next AP toward
// the host; the host maps to -1.
struct Coverage {
  int server = -1;
  std::vector<int> members;        // sorted
  std::map<int, int> next_hop;
  int depth = 0;                   // max hops from a member to the host
};

struct GeneratorParams {
  int users_min = 1, users_max = 4;
  double req_rate_min = 3.0, req_rate_max = 5.0;     // tasks/s per user
  double task_size_min = 0.5, task_size_max = 1.0;   // Mbit per task
  double task_work_min = 0.5, task_work_max = 1.0;   // MFLOP per task
  double f_bs_min = 16.0, f_bs_max = 24.0;           // Mbit/s
  double f_es_min = 32.0, f_es_max = 48.0;           // MFLOP/s
  double data_scale = 0.45;  // multiplies per-AP data_rate
  double work_scale = 0.1;   // multiplies per-AP work_rate
  int connect_retries = 24;
};

struct NetworkTopology {
  std::vector<AccessPoint> aps;
  std::vector<EdgeServer> servers;
  std::vector<std::vector<int>> adj;  // sorted neighbor lists, symmetric
  std::vector<Coverage> coverages;    // indexed by server id
  std::vector<int> coverage_of;       // ap id -> server id
  int depth_limit = 3;
  double f_bs_cap = 0.0;  // admissible maxima used when sampling (13.d/e)
  double f_es_cap = 0.0;

  int num_aps() const { return static_cast<int>(aps.size()); }
  int num_servers() const { return static_cast<int>(servers.size()); }
  bool adjacent(int a, int b) const;
  // Server hosted on `ap`, if any.
  std::optional<int> server_on(int ap) const;
  // Tree path between two members of the same coverage (inclusive ends).
  std::vector<int> tree_path(int from, int to) const;
  // Tree path from a member to its coverage host (inclusive ends).
  std::vector<int> path_to_host(int ap) const;
};

// Random geometric graph on the unit square, connection radius auto-tuned
// until the graph is connected and every AP lies within depth_limit hops of
// a greedily chosen (k-center) set of server host APs. Deterministic per
// (seed, parameters).
NetworkTopology generate_topology(std::uint64_t seed, int m, double mu,
                                  int depth_limit,
                                  const GeneratorParams& params = {});

// Assigns each AP to a server by (hop count, server capacity, server id) and
// builds per-coverage routing trees via deterministic multi-source BFS.
// Coverages partition the AP set and trees are internal to their coverage.
std::vector<Coverage> build_coverages(const NetworkTopology& topo);

// Member APs adjacent to at least one AP outside the coverage.
std::set<int> edge_aps(const Coverage& coverage, const NetworkTopology& topo);

// Servers whose coverage contains an AP adjacent to this server's coverage.
std::set<int> neighbor_servers(int server, const NetworkTopology& topo);

nlohmann::json topology_to_json(const NetworkTopology& topo);
NetworkTopology topology_from_json(const nlohmann::json& j);

}  // namespace efsim
