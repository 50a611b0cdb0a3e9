#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace efsim {

struct FailureEvent {
  enum class Kind { repair = 0, fail = 1 };  // repairs sort first in a slot
  int slot = 0;
  int server = 0;
  Kind kind = Kind::fail;
  bool operator==(const FailureEvent&) const = default;
};

struct RepairDist {
  int min_slots = 5;
  int max_slots = 50;
};

// Temporary failure/repair timeline. Per-slot fail hazard is calibrated so
// the stationary failed fraction equals rho: h = rho / ((1-rho) * E[repair]).
struct FailureSchedule {
  double rho = 0.0;
  int horizon = 0;
  RepairDist repair;
  std::vector<FailureEvent> events;  // sorted by (slot, kind, server)

  // Servers failed during `slot`, i.e. after applying all events at slots
  // <= slot.
  std::set<int> failed_set(int slot) const;
  // Largest number of simultaneously failed servers over the horizon.
  int max_concurrent_failures() const;
};

FailureSchedule sample_schedule(std::uint64_t seed, int num_servers, double rho,
                                int horizon, const RepairDist& repair = {});

nlohmann::json schedule_to_json(const FailureSchedule& s);
FailureSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace efsim
