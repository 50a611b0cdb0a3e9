#pragma once

#include <vector>

#include "efsim/strategy.hpp"
#include "efsim/topology.hpp"

namespace efsim {

// Slotted fluid-queue model. Backlogs are clamped at zero (Lindley
// recursion); delays are backlog divided by service rate.

struct ApQueueState {
  int ap = -1;
  double backlog = 0.0;  // Mbit
};

struct ServerQueueState {
  int server = -1;
  double backlog = 0.0;  // MFLOP
};

struct OfferedLoad {
  double from_users = 0.0;     // T_U, Mbit/s
  double from_neighbors = 0.0; // T_ne, Mbit/s
  double to_server = 0.0;      // T_bs, MFLOP/s (server-side aggregate)
};

// All queue backlogs of one simulation, indexed by id.
struct QueueState {
  std::vector<double> ap_backlog;
  std::vector<double> server_backlog;
};

QueueState zero_queues(const NetworkTopology& topo);

// T_U = the AP's own admitted user load (zero when the AP is cloud-bound),
// T_ne = sum of data rates of APs whose chosen forwarder is this AP.
OfferedLoad ap_offered_load(int ap, const AllocationStrategy& strategy,
                            const NetworkTopology& topo);

// Aggregate compute load offloaded to a server by its assigned APs.
double server_offered_load(int server, const AllocationStrategy& strategy,
                           const NetworkTopology& topo);

ApQueueState ap_queue_update(const ApQueueState& state, const OfferedLoad& load,
                             double f_bs, double t_z = 1.0);

ServerQueueState server_queue_update(const ServerQueueState& state, double t_bs,
                                     double f_es, double t_z = 1.0);

double transmission_delay(const ApQueueState& state, double f_bs);
double processing_delay(const ServerQueueState& state, double f_es);

// Transmission delay summed along the AP's stored route plus processing
// delay at the assigned server. Throws when the AP is not assigned to
// `server` or is cloud-bound.
double end_to_end_delay(int ap, int server, const AllocationStrategy& strategy,
                        const QueueState& queues, const NetworkTopology& topo);

}  // namespace efsim
