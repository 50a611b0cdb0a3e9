#include "efsim/delay_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace efsim {

QueueState zero_queues(const NetworkTopology& topo) {
  QueueState q;
  q.ap_backlog.assign(topo.num_aps(), 0.0);
  q.server_backlog.assign(topo.num_servers(), 0.0);
  return q;
}

OfferedLoad ap_offered_load(int ap, const AllocationStrategy& strategy,
                            const NetworkTopology& topo) {
  if (ap < 0 || ap >= topo.num_aps()) {
    throw std::out_of_range("ap_offered_load: unknown AP id");
  }
  OfferedLoad load;
  const ApAllocation& own = strategy.aps.at(ap);
  if (!own.cloud) load.from_users = topo.aps[ap].data_rate;
  for (int i = 0; i < topo.num_aps(); ++i) {
    if (i == ap) continue;
    for (const auto& [next, p] : strategy.aps[i].forwarders) {
      if (next == ap) load.from_neighbors += topo.aps[i].data_rate * p;
    }
  }
  return load;
}

double server_offered_load(int server, const AllocationStrategy& strategy,
                           const NetworkTopology& topo) {
  if (server < 0 || server >= topo.num_servers()) {
    throw std::out_of_range("server_offered_load: unknown server id");
  }
  double total = 0.0;
  for (int i = 0; i < topo.num_aps(); ++i) {
    const ApAllocation& a = strategy.aps[i];
    if (!a.cloud && a.server == server) total += topo.aps[i].work_rate;
  }
  return total;
}

ApQueueState ap_queue_update(const ApQueueState& state, const OfferedLoad& load,
                             double f_bs, double t_z) {
  if (f_bs <= 0.0) throw std::invalid_argument("ap_queue_update: f_bs <= 0");
  if (state.backlog < 0.0 || load.from_users < 0.0 || load.from_neighbors < 0.0) {
    throw std::invalid_argument("ap_queue_update: negative input");
  }
  ApQueueState next = state;
  const double arrivals = load.from_users + load.from_neighbors;
  next.backlog = std::max(0.0, state.backlog + (arrivals - f_bs) * t_z);
  return next;
}

ServerQueueState server_queue_update(const ServerQueueState& state, double t_bs,
                                     double f_es, double t_z) {
  if (f_es <= 0.0) throw std::invalid_argument("server_queue_update: f_es <= 0");
  if (state.backlog < 0.0 || t_bs < 0.0) {
    throw std::invalid_argument("server_queue_update: negative input");
  }
  ServerQueueState next = state;
  next.backlog = std::max(0.0, state.backlog + (t_bs - f_es) * t_z);
  return next;
}

double transmission_delay(const ApQueueState& state, double f_bs) {
  if (f_bs <= 0.0) throw std::invalid_argument("transmission_delay: f_bs <= 0");
  return state.backlog / f_bs;
}

double processing_delay(const ServerQueueState& state, double f_es) {
  if (f_es <= 0.0) throw std::invalid_argument("processing_delay: f_es <= 0");
  return state.backlog / f_es;
}

double end_to_end_delay(int ap, int server, const AllocationStrategy& strategy,
                        const QueueState& queues, const NetworkTopology& topo) {
  const ApAllocation& a = strategy.aps.at(ap);
  if (a.cloud || a.server != server) {
    throw std::invalid_argument("end_to_end_delay: AP not assigned to server");
  }
  double d = 0.0;
  for (int hop : a.route) {
    d += queues.ap_backlog.at(hop) / topo.aps[hop].transmit_capacity;
  }
  d += queues.server_backlog.at(server) / topo.servers[server].compute_capacity;
  return d;
}

}  // namespace efsim
