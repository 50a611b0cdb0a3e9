#include "efsim/strategy.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "efsim/topology.hpp"

namespace efsim {

AllocationStrategy baseline_strategy(const NetworkTopology& topo) {
  AllocationStrategy s;
  s.epoch = "pre-failure";
  s.aps.resize(topo.num_aps());
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    ApAllocation& a = s.aps[ap];
    a.server = topo.coverage_of[ap];
    a.cloud = false;
    a.route = topo.path_to_host(ap);
    if (a.route.size() > 1) a.forwarders = {{a.route[1], 1.0}};
  }
  return s;
}

void capture_fragment(const AllocationStrategy& strategy,
                      const Coverage& coverage, StrategyCache& cache) {
  std::vector<std::pair<int, ApAllocation>> frag;
  frag.reserve(coverage.members.size());
  for (int ap : coverage.members) frag.emplace_back(ap, strategy.aps.at(ap));
  cache.fragments[coverage.server] = std::move(frag);
}

void restore_fragment(const StrategyCache& cache, int server,
                      AllocationStrategy& strategy) {
  auto it = cache.fragments.find(server);
  if (it == cache.fragments.end()) {
    throw std::invalid_argument("restore_fragment: server " +
                                std::to_string(server) + " was never captured");
  }
  for (const auto& [ap, alloc] : it->second) strategy.aps.at(ap) = alloc;
}

nlohmann::json strategy_to_json(const AllocationStrategy& s) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["epoch"] = s.epoch;
  j["p_levels"] = s.p_levels;
  auto& aps = j["aps"] = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(s.aps.size()); ++i) {
    const ApAllocation& a = s.aps[i];
    nlohmann::json ja;
    ja["ap"] = i;
    ja["server"] = a.server;
    ja["cloud"] = a.cloud;
    ja["route"] = a.route;
    auto& fw = ja["forwarders"] = nlohmann::json::array();
    for (const auto& [next, p] : a.forwarders) fw.push_back({next, p});
    aps.push_back(std::move(ja));
  }
  return j;
}

AllocationStrategy strategy_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("strategy_from_json: unsupported format_version");
  }
  AllocationStrategy s;
  s.epoch = j.at("epoch").get<std::string>();
  s.p_levels = j.at("p_levels").get<int>();
  s.aps.resize(j.at("aps").size());
  for (const auto& ja : j.at("aps")) {
    ApAllocation a;
    a.server = ja.at("server").get<int>();
    a.cloud = ja.at("cloud").get<bool>();
    a.route = ja.at("route").get<std::vector<int>>();
    for (const auto& f : ja.at("forwarders")) {
      a.forwarders.emplace_back(f.at(0).get<int>(), f.at(1).get<double>());
    }
    s.aps.at(ja.at("ap").get<int>()) = std::move(a);
  }
  return s;
}

}  // namespace efsim
