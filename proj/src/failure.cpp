#include "efsim/failure.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "efsim/rng.hpp"

namespace efsim {

std::set<int> FailureSchedule::failed_set(int slot) const {
  std::set<int> failed;
  for (const auto& ev : events) {
    if (ev.slot > slot) break;
    if (ev.kind == FailureEvent::Kind::fail) {
      failed.insert(ev.server);
    } else {
      failed.erase(ev.server);
    }
  }
  return failed;
}

int FailureSchedule::max_concurrent_failures() const {
  int cur = 0, best = 0;
  for (const auto& ev : events) {
    cur += ev.kind == FailureEvent::Kind::fail ? 1 : -1;
    best = std::max(best, cur);
  }
  return best;
}

FailureSchedule sample_schedule(std::uint64_t seed, int num_servers, double rho,
                                int horizon, const RepairDist& repair) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("sample_schedule: rho must be in [0,1]");
  }
  if (repair.min_slots < 1 || repair.max_slots < repair.min_slots) {
    throw std::invalid_argument("sample_schedule: bad repair distribution");
  }
  FailureSchedule sched;
  sched.rho = rho;
  sched.horizon = horizon;
  sched.repair = repair;
  if (rho == 0.0 || num_servers == 0) return sched;

  if (rho == 1.0) {
    for (int s = 0; s < num_servers; ++s) {
      sched.events.push_back({0, s, FailureEvent::Kind::fail});
    }
    return sched;
  }

  const double mean_repair = 0.5 * (repair.min_slots + repair.max_slots);
  const double hazard = std::min(1.0, rho / ((1.0 - rho) * mean_repair));
  for (int s = 0; s < num_servers; ++s) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    int t = 0;
    while (t < horizon) {
      if (rng.uniform01() < hazard) {
        sched.events.push_back({t, s, FailureEvent::Kind::fail});
        const int dur = rng.uniform_int(repair.min_slots, repair.max_slots);
        if (t + dur < horizon) {
          sched.events.push_back({t + dur, s, FailureEvent::Kind::repair});
        }
        t += dur + 1;  // eligible to fail again the slot after repair
      } else {
        ++t;
      }
    }
  }
  std::sort(sched.events.begin(), sched.events.end(),
            [](const FailureEvent& a, const FailureEvent& b) {
              if (a.slot != b.slot) return a.slot < b.slot;
              if (a.kind != b.kind) return a.kind < b.kind;
              return a.server < b.server;
            });
  return sched;
}

nlohmann::json schedule_to_json(const FailureSchedule& s) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["rho"] = s.rho;
  j["horizon"] = s.horizon;
  j["repair_min"] = s.repair.min_slots;
  j["repair_max"] = s.repair.max_slots;
  auto& evs = j["events"] = nlohmann::json::array();
  for (const auto& ev : s.events) {
    evs.push_back({{"slot", ev.slot},
                   {"server", ev.server},
                   {"kind", ev.kind == FailureEvent::Kind::fail ? "fail"
                                                                : "repair"}});
  }
  return j;
}

FailureSchedule schedule_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("schedule_from_json: unsupported format_version");
  }
  FailureSchedule s;
  s.rho = j.at("rho").get<double>();
  s.horizon = j.at("horizon").get<int>();
  s.repair.min_slots = j.at("repair_min").get<int>();
  s.repair.max_slots = j.at("repair_max").get<int>();
  for (const auto& je : j.at("events")) {
    FailureEvent ev;
    ev.slot = je.at("slot").get<int>();
    ev.server = je.at("server").get<int>();
    ev.kind = je.at("kind").get<std::string>() == "fail"
                  ? FailureEvent::Kind::fail
                  : FailureEvent::Kind::repair;
    s.events.push_back(ev);
  }
  return s;
}

}  // namespace efsim
