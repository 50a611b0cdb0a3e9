#include "efsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "efsim/delay_model.hpp"
#include "efsim/rng.hpp"

namespace efsim {

NetworkTopology make_topology(const SimulationConfig& config) {
  return generate_topology(mix_seed(config.seed, "topology"), config.m,
                           config.mu, config.depth_limit, config.gen);
}

FailureSchedule make_schedule(const SimulationConfig& config,
                              const NetworkTopology& topo) {
  if (config.scripted) {
    FailureSchedule s;
    s.rho = config.rho;
    s.horizon = config.horizon;
    s.repair = config.repair;
    s.events = *config.scripted;
    std::sort(s.events.begin(), s.events.end(),
              [](const FailureEvent& a, const FailureEvent& b) {
                if (a.slot != b.slot) return a.slot < b.slot;
                if (a.kind != b.kind) return a.kind < b.kind;
                return a.server < b.server;
              });
    return s;
  }
  return sample_schedule(mix_seed(config.seed, "failures"), topo.num_servers(),
                         config.rho, config.horizon, config.repair);
}

double mean_network_delay(const AllocationStrategy& strategy,
                          const NetworkTopology& topo, const QueueState& queues,
                          const DelayEvalParams& params) {
  double total = 0.0;
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    const ApAllocation& a = strategy.aps[ap];
    if (a.cloud) {
      total += cloud_delay(topo.aps[ap], params);
    } else {
      total += end_to_end_delay(ap, a.server, strategy, queues, topo);
    }
  }
  return total / std::max(1, topo.num_aps());
}

void step_queues(const NetworkTopology& topo, const AllocationStrategy& strategy,
                 const std::vector<char>& operational, QueueState& queues,
                 double t_z) {
  const int m = topo.num_aps();
  std::vector<double> arrivals(m, 0.0);
  std::vector<double> server_load(topo.num_servers(), 0.0);
  for (int ap = 0; ap < m; ++ap) {
    const ApAllocation& a = strategy.aps[ap];
    if (a.cloud) continue;
    arrivals[ap] += topo.aps[ap].data_rate;
    for (const auto& [next, p] : a.forwarders) {
      arrivals[next] += topo.aps[ap].data_rate * p;
    }
    server_load[a.server] += topo.aps[ap].work_rate;
  }
  for (int ap = 0; ap < m; ++ap) {
    queues.ap_backlog[ap] = std::max(
        0.0, queues.ap_backlog[ap] +
                 (arrivals[ap] - topo.aps[ap].transmit_capacity) * t_z);
  }
  for (int s = 0; s < topo.num_servers(); ++s) {
    if (!operational[s]) continue;  // failed server: backlog freezes
    queues.server_backlog[s] = std::max(
        0.0, queues.server_backlog[s] +
                 (server_load[s] - topo.servers[s].compute_capacity) * t_z);
  }
}

MetricsRecord run_prepared(const SimulationConfig& config,
                           const NetworkTopology& topo,
                           const FailureSchedule& schedule) {
  MetricsRecord rec;
  AllocationStrategy strategy = baseline_strategy(topo);
  StrategyCache cache;
  for (const auto& cov : topo.coverages) capture_fragment(strategy, cov, cache);
  QueueState queues = zero_queues(topo);
  std::vector<char> operational(topo.num_servers(), 1);

  rec.max_concurrent_failures = schedule.max_concurrent_failures();
  rec.extremes.t_per_ap_max = 0.0;
  for (const auto& ap : topo.aps) {
    rec.extremes.f_bs_min = std::min(rec.extremes.f_bs_min, ap.transmit_capacity);
    rec.extremes.f_bs_max = std::max(rec.extremes.f_bs_max, ap.transmit_capacity);
    const double vol = std::max(ap.data_rate, ap.work_rate) * config.t_z;
    rec.extremes.t_per_ap_max = std::max(rec.extremes.t_per_ap_max, vol);
    rec.extremes.t_per_ap_min = std::min(rec.extremes.t_per_ap_min, vol);
  }
  for (const auto& s : topo.servers) {
    rec.extremes.f_es_min = std::min(rec.extremes.f_es_min, s.compute_capacity);
    rec.extremes.f_es_max = std::max(rec.extremes.f_es_max, s.compute_capacity);
  }

  // Work-conservation ledger (MFLOP): admitted == processed + queued.
  double admitted = 0.0, processed = 0.0;

  size_t next_event = 0;
  for (int slot = 0; slot < config.horizon; ++slot) {
    while (next_event < schedule.events.size() &&
           schedule.events[next_event].slot == slot) {
      const FailureEvent& ev = schedule.events[next_event++];
      const auto start = std::chrono::steady_clock::now();
      PhaseResult phase;
      if (ev.kind == FailureEvent::Kind::fail) {
        operational[ev.server] = 0;
        phase = apply_failure(config.policy, ev.server, topo, strategy, cache,
                              queues, operational, config.pol);
      } else {
        operational[ev.server] = 1;
        phase = apply_repair(config.policy, ev.server, topo, strategy, cache,
                             queues, operational, config.pol);
      }
      if (config.policy == PolicyKind::fodt) {
        // The failure phase stays open for stranded APs; they retry now
        // that the event changed what their neighbors know.
        RescueResult rescue = rescue_stranded(topo, strategy, queues,
                                              operational, config.pol.eval);
        phase.evaluations += rescue.evaluations;
        phase.writes += rescue.writes;
      }
      const auto stop = std::chrono::steady_clock::now();
      EventCost cost;
      cost.slot = slot;
      cost.server = ev.server;
      cost.repair = ev.kind == FailureEvent::Kind::repair;
      cost.evaluations = phase.evaluations;
      cost.writes = phase.writes;
      cost.modeled_ms = (phase.evaluations * config.eval_cost_us +
                         phase.writes * config.write_cost_us) *
                        1e-3;
      cost.wall_ms =
          std::chrono::duration<double, std::milli>(stop - start).count();
      rec.events.push_back(cost);
    }

    // Queue evolution, tracking processed work for the conservation ledger.
    std::vector<double> before = queues.server_backlog;
    std::vector<double> server_load(topo.num_servers(), 0.0);
    for (int ap = 0; ap < topo.num_aps(); ++ap) {
      const ApAllocation& a = strategy.aps[ap];
      if (a.cloud) continue;
      server_load[a.server] += topo.aps[ap].work_rate;
    }
    step_queues(topo, strategy, operational, queues, config.t_z);
    for (int s = 0; s < topo.num_servers(); ++s) {
      admitted += server_load[s] * config.t_z;
      processed += before[s] + server_load[s] * config.t_z -
                   queues.server_backlog[s];
    }

    double slot_total = 0.0;
    for (int ap = 0; ap < topo.num_aps(); ++ap) {
      const ApAllocation& a = strategy.aps[ap];
      if (a.cloud) {
        slot_total += cloud_delay(topo.aps[ap], config.pol.eval);
        ++rec.cloud_ap_slots;
      } else {
        slot_total += end_to_end_delay(ap, a.server, strategy, queues, topo);
        rec.extremes.y_max = std::max(
            rec.extremes.y_max, static_cast<int>(a.route.size()) - 1);
      }
    }
    rec.slot_mean_delay.push_back(slot_total / std::max(1, topo.num_aps()));

    for (double q : queues.ap_backlog) {
      rec.extremes.q_bs_max = std::max(rec.extremes.q_bs_max, q);
    }
    for (double q : queues.server_backlog) {
      rec.extremes.q_es_max = std::max(rec.extremes.q_es_max, q);
    }
  }

  double queued = 0.0;
  for (double q : queues.server_backlog) queued += q;
  rec.conservation_residual = admitted - processed - queued;
  rec.conservation_ok =
      std::abs(rec.conservation_residual) <= 1e-6 * std::max(1.0, admitted);

  const int first = std::min(config.warmup, config.horizon);
  double sum = 0.0;
  int n = 0;
  for (int slot = first; slot < config.horizon; ++slot) {
    sum += rec.slot_mean_delay[slot];
    ++n;
  }
  if (n == 0) {
    for (double d : rec.slot_mean_delay) sum += d;
    n = static_cast<int>(rec.slot_mean_delay.size());
  }
  rec.mean_delay = n > 0 ? sum / n : 0.0;

  for (const auto& ev : rec.events) {
    rec.convergence_count += ev.count();
    rec.convergence_modeled_ms += ev.modeled_ms;
    rec.convergence_wall_ms += ev.wall_ms;
  }
  return rec;
}

MetricsRecord run(const SimulationConfig& config) {
  if (config.horizon < 1) throw std::invalid_argument("run: horizon < 1");
  NetworkTopology topo = make_topology(config);
  FailureSchedule schedule = make_schedule(config, topo);
  return run_prepared(config, topo, schedule);
}

std::optional<CycleCost> measure_convergence(const MetricsRecord& metrics,
                                             int server, int fail_slot) {
  CycleCost cycle;
  bool found_fail = false;
  for (const auto& ev : metrics.events) {
    if (ev.server != server) continue;
    if (!found_fail) {
      if (!ev.repair && ev.slot == fail_slot) {
        found_fail = true;
        cycle.count += ev.count();
        cycle.modeled_ms += ev.modeled_ms;
        cycle.wall_ms += ev.wall_ms;
      }
    } else if (ev.repair && ev.slot > fail_slot) {
      cycle.count += ev.count();
      cycle.modeled_ms += ev.modeled_ms;
      cycle.wall_ms += ev.wall_ms;
      return cycle;
    }
  }
  if (found_fail) return cycle;  // failure without a repair in-horizon
  return std::nullopt;
}

std::vector<SweepRow> sweep(const SimulationConfig& base, const SweepAxes& axes) {
  struct Job {
    SimulationConfig config;
    PolicyKind policy;
    double rho, mu;
    int m;
  };
  std::vector<Job> jobs;
  for (size_t mi = 0; mi < axes.m.size(); ++mi) {
    const std::vector<double>& mus =
        axes.fixed_l > 0 ? std::vector<double>{0.0} : axes.mu;
    for (size_t ui = 0; ui < mus.size(); ++ui) {
      const double mu = axes.fixed_l > 0
                            ? static_cast<double>(axes.fixed_l) / axes.m[mi]
                            : mus[ui];
      for (double rho : axes.rho) {
        for (PolicyKind policy : axes.policies) {
          for (int rep = 0; rep < axes.replications; ++rep) {
            Job job;
            job.config = base;
            job.config.m = axes.m[mi];
            job.config.mu = mu;
            job.config.rho = rho;
            job.config.policy = policy;
            // Same seed across policies, rho and mu: paired comparisons and
            // common random numbers along both sweep axes (position stream,
            // per-AP parameters and per-server failure streams all coincide,
            // so axis deltas are differences in structure, not in luck).
            job.config.seed = mix_seed(
                base.seed, (static_cast<std::uint64_t>(rep) << 16) +
                               (static_cast<std::uint64_t>(mi) << 8));
            (void)ui;
            job.policy = policy;
            job.rho = rho;
            job.mu = mu;
            job.m = axes.m[mi];
            jobs.push_back(std::move(job));
          }
        }
      }
    }
  }

  std::vector<SweepRow> rows(jobs.size());
  std::atomic<size_t> cursor{0};
  unsigned workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("EDGE_FAILOVER_SIM_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) workers = static_cast<unsigned>(v);
  }
  workers = std::max(1u, std::min<unsigned>(workers, jobs.size()));

  auto worker = [&]() {
    while (true) {
      const size_t i = cursor.fetch_add(1);
      if (i >= jobs.size()) break;
      const Job& job = jobs[i];
      SweepRow row;
      row.policy = job.policy;
      row.rho = job.rho;
      row.mu = job.mu;
      row.m = job.m;
      row.seed = job.config.seed;
      row.metrics = run(job.config);
      rows[i] = std::move(row);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

nlohmann::json config_to_json(const SimulationConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["m"] = c.m;
  j["mu"] = c.mu;
  j["rho"] = c.rho;
  j["horizon"] = c.horizon;
  j["warmup"] = c.warmup;
  j["depth_limit"] = c.depth_limit;
  j["policy"] = to_string(c.policy);
  j["t_z"] = c.t_z;
  j["repair_min"] = c.repair.min_slots;
  j["repair_max"] = c.repair.max_slots;
  j["cloud_base_delay"] = c.pol.eval.cloud_base_delay;
  j["cloud_backhaul_rate"] = c.pol.eval.cloud_backhaul_rate;
  j["greedy_max_walk"] = c.pol.greedy_max_walk;
  j["eval_cost_us"] = c.eval_cost_us;
  j["write_cost_us"] = c.write_cost_us;
  j["gen"] = {{"users_min", c.gen.users_min},
              {"users_max", c.gen.users_max},
              {"req_rate_min", c.gen.req_rate_min},
              {"req_rate_max", c.gen.req_rate_max},
              {"task_size_min", c.gen.task_size_min},
              {"task_size_max", c.gen.task_size_max},
              {"task_work_min", c.gen.task_work_min},
              {"task_work_max", c.gen.task_work_max},
              {"f_bs_min", c.gen.f_bs_min},
              {"f_bs_max", c.gen.f_bs_max},
              {"f_es_min", c.gen.f_es_min},
              {"f_es_max", c.gen.f_es_max},
              {"data_scale", c.gen.data_scale},
              {"work_scale", c.gen.work_scale}};
  if (c.scripted) {
    auto& evs = j["scripted"] = nlohmann::json::array();
    for (const auto& ev : *c.scripted) {
      evs.push_back({{"slot", ev.slot},
                     {"server", ev.server},
                     {"kind", ev.kind == FailureEvent::Kind::fail ? "fail"
                                                                  : "repair"}});
    }
  }
  return j;
}

SimulationConfig config_from_json(const nlohmann::json& j) {
  SimulationConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("seed", c.seed);
  get("m", c.m);
  get("mu", c.mu);
  get("rho", c.rho);
  get("horizon", c.horizon);
  get("warmup", c.warmup);
  get("depth_limit", c.depth_limit);
  if (j.contains("policy")) {
    c.policy = policy_from_string(j.at("policy").get<std::string>());
  }
  get("t_z", c.t_z);
  get("repair_min", c.repair.min_slots);
  get("repair_max", c.repair.max_slots);
  get("cloud_base_delay", c.pol.eval.cloud_base_delay);
  get("cloud_backhaul_rate", c.pol.eval.cloud_backhaul_rate);
  get("greedy_max_walk", c.pol.greedy_max_walk);
  get("eval_cost_us", c.eval_cost_us);
  get("write_cost_us", c.write_cost_us);
  c.pol.eval.t_z = c.t_z;
  if (j.contains("gen")) {
    const auto& g = j.at("gen");
    auto gget = [&](const char* key, auto& field) {
      if (g.contains(key)) field = g.at(key).get<std::decay_t<decltype(field)>>();
    };
    gget("users_min", c.gen.users_min);
    gget("users_max", c.gen.users_max);
    gget("req_rate_min", c.gen.req_rate_min);
    gget("req_rate_max", c.gen.req_rate_max);
    gget("task_size_min", c.gen.task_size_min);
    gget("task_size_max", c.gen.task_size_max);
    gget("task_work_min", c.gen.task_work_min);
    gget("task_work_max", c.gen.task_work_max);
    gget("f_bs_min", c.gen.f_bs_min);
    gget("f_bs_max", c.gen.f_bs_max);
    gget("f_es_min", c.gen.f_es_min);
    gget("f_es_max", c.gen.f_es_max);
    gget("data_scale", c.gen.data_scale);
    gget("work_scale", c.gen.work_scale);
  }
  if (j.contains("scripted")) {
    std::vector<FailureEvent> evs;
    for (const auto& je : j.at("scripted")) {
      FailureEvent ev;
      ev.slot = je.at("slot").get<int>();
      ev.server = je.at("server").get<int>();
      ev.kind = je.at("kind").get<std::string>() == "fail"
                    ? FailureEvent::Kind::fail
                    : FailureEvent::Kind::repair;
      evs.push_back(ev);
    }
    c.scripted = std::move(evs);
  }
  return c;
}

}  // namespace efsim
