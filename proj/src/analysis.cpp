#include "efsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "efsim/allocation.hpp"
#include "efsim/benchmarks.hpp"
#include "efsim/fodt.hpp"
#include "efsim/rng.hpp"
#include "efsim/sim.hpp"

namespace efsim {

RatioEstimate approximation_ratio(double recovered_delay, double oracle_delay,
                                  double omega, double tau, double rho,
                                  double l_bar) {
  if (oracle_delay <= 0.0) {
    throw std::invalid_argument("approximation_ratio: oracle delay must be > 0");
  }
  if (tau <= 0.0) {
    throw std::invalid_argument("approximation_ratio: tau must be > 0");
  }
  RatioEstimate r;
  r.rho = rho;
  r.omega = omega;
  r.tau = tau;
  r.l_bar = l_bar;
  r.epsilon_measured = recovered_delay / oracle_delay;
  r.epsilon_predicted = (1.0 + rho * (omega - 1.0)) / tau;
  r.gap = std::abs(r.epsilon_measured - r.epsilon_predicted);
  return r;
}

double omega_lower_bound(double rho, double tau) {
  if (rho <= 0.0) throw std::invalid_argument("omega_lower_bound: rho must be > 0");
  if (tau <= 1.0) throw std::invalid_argument("omega_lower_bound: tau must be > 1");
  return 1.0 + (tau - 1.0) / rho;
}

ComplexityFit complexity_check(
    const std::vector<std::tuple<int, int, double>>& m_l_cost) {
  if (m_l_cost.size() < 3) {
    throw std::invalid_argument("complexity_check: need at least 3 sizes");
  }
  std::vector<double> xs, ys;
  for (const auto& [m, l, cost] : m_l_cost) {
    (void)l;
    if (m <= 0 || cost <= 0.0) {
      throw std::invalid_argument("complexity_check: nonpositive sample");
    }
    xs.push_back(std::log(static_cast<double>(m)));
    ys.push_back(std::log(cost));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  ComplexityFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

int tolerated_failures(double n_bar, int m, int l) {
  if (n_bar <= 0.0) return 0;
  const double s = n_bar * l * l / (m + n_bar * l);
  const int s_t = static_cast<int>(std::floor(s));
  return std::clamp(s_t, 0, l - 1);
}

ToleranceBound tolerance_bound(const RobustnessParams& p, int m, int l) {
  if (p.d_th <= 0.0) {
    throw std::invalid_argument("tolerance_bound: threshold must be > 0");
  }
  if (p.t_bar_min <= 0.0) {
    throw std::invalid_argument("tolerance_bound: t_bar_min must be > 0");
  }
  ToleranceBound b;
  b.n_bar_max =
      (p.eps_l * p.nu * p.nu * p.f_bs_min * p.d_th - p.q_min) / p.t_bar_min;
  b.s_t = tolerated_failures(b.n_bar_max, m, l);
  return b;
}

double latency_bound(int failed, int m, int l, const LatencyBoundParams& p) {
  if (failed >= l) throw std::invalid_argument("latency_bound: S >= L");
  if (failed < 0) throw std::invalid_argument("latency_bound: S < 0");
  if (p.f_min <= 0.0) throw std::invalid_argument("latency_bound: F <= 0");
  const double n_bar = static_cast<double>(m) / (l - failed) -
                       static_cast<double>(m) / l;
  return (1.0 / p.f_min) * (1.0 + p.y_max) * (p.q_max + n_bar * p.t_max);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman: need two equal-length series");
  }
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

OracleInstanceResult run_oracle_instance(std::uint64_t seed,
                                         const OracleStudyParams& params) {
  OracleInstanceResult out;
  Rng rng(mix_seed(seed, "oracle-instance"));
  const int m = 9 + rng.uniform_int(0, 3);        // 9..12
  const int l = 2 + rng.uniform_int(0, 2);        // 2..4
  const double mu = (l + 0.25) / m;

  SimulationConfig cfg;
  cfg.seed = seed;
  cfg.m = m;
  cfg.mu = mu;
  cfg.depth_limit = 3;
  cfg.gen.data_scale *= params.load_boost;
  cfg.gen.work_scale *= params.load_boost;

  NetworkTopology topo = make_topology(cfg);
  AllocationStrategy baseline = baseline_strategy(topo);
  StrategyCache cache;
  for (const auto& cov : topo.coverages) capture_fragment(baseline, cov, cache);
  std::vector<char> operational(topo.num_servers(), 1);

  QueueState queues = zero_queues(topo);
  double pre_delay = 0.0;
  std::vector<double> pre_ap_delay(topo.num_aps(), 0.0);
  for (int slot = 0; slot < params.warm_slots; ++slot) {
    step_queues(topo, baseline, operational, queues, cfg.t_z);
  }
  for (int ap = 0; ap < topo.num_aps(); ++ap) {
    pre_ap_delay[ap] =
        end_to_end_delay(ap, baseline.aps[ap].server, baseline, queues, topo);
    pre_delay += pre_ap_delay[ap];
  }
  pre_delay /= topo.num_aps();
  if (pre_delay <= 1e-9) return out;  // unloaded instance, ratios undefined

  const int failed = rng.uniform_int(0, topo.num_servers() - 1);
  operational[failed] = 0;

  AllocationStrategy recovered = baseline;
  RecoveryPlan plan = on_failure(failed, topo, recovered, queues, operational,
                                 cache, cfg.pol.eval);
  std::set<int> failed_set{failed};
  OracleResult oracle =
      brute_force_optimal(topo, queues, failed_set, cfg.pol.eval);
  const double recovered_delay =
      total_network_delay(recovered, topo, queues, cfg.pol.eval);
  if (oracle.delay <= 1e-12) return out;

  // Absorbing coverages' pre-failure mean delay, for omega's denominator.
  std::set<int> absorbing;
  std::vector<int> affected;
  for (const auto& dec : plan.decisions) {
    affected.push_back(dec.ap);
    if (dec.server >= 0) absorbing.insert(dec.server);
  }
  double pre_absorbing = 0.0;
  int n_absorbing = 0;
  for (int s : absorbing) {
    for (int ap : topo.coverages[s].members) {
      pre_absorbing += pre_ap_delay[ap];
      ++n_absorbing;
    }
  }
  if (n_absorbing == 0 || pre_absorbing <= 1e-9) return out;
  pre_absorbing /= n_absorbing;

  // Evolved inflation factors from short paired runs.
  auto evolved_mean = [&](const AllocationStrategy& s,
                          const std::vector<int>& aps) {
    QueueState q = queues;
    double total = 0.0;
    int count = 0;
    for (int slot = 0; slot < params.post_slots; ++slot) {
      step_queues(topo, s, operational, q, cfg.t_z);
      for (int ap : aps) {
        const ApAllocation& a = s.aps[ap];
        total += a.cloud ? cloud_delay(topo.aps[ap], cfg.pol.eval)
                         : end_to_end_delay(ap, a.server, s, q, topo);
        ++count;
      }
    }
    return count > 0 ? total / count : 0.0;
  };

  std::vector<int> all_aps(topo.num_aps());
  std::iota(all_aps.begin(), all_aps.end(), 0);

  AllocationStrategy full = baseline;
  global_reassign(topo, full, queues, operational);

  const double fodt_affected = evolved_mean(recovered, affected);
  const double full_all = evolved_mean(full, all_aps);
  if (fodt_affected <= 1e-12 || full_all <= 1e-12) return out;

  out.omega = fodt_affected / pre_absorbing;
  out.tau = full_all / pre_delay;
  out.rho = 1.0 / topo.num_servers();
  out.recovered_delay = recovered_delay;
  out.oracle_delay = oracle.delay;
  out.eps_measured = recovered_delay / oracle.delay;
  out.eps_predicted = (1.0 + out.rho * (out.omega - 1.0)) / out.tau;
  out.valid = true;
  return out;
}

nlohmann::json ratio_to_json(const RatioEstimate& r) {
  return {{"rho", r.rho},
          {"omega", r.omega},
          {"tau", r.tau},
          {"epsilon_predicted", r.epsilon_predicted},
          {"epsilon_measured", r.epsilon_measured},
          {"l_bar", r.l_bar},
          {"gap", r.gap}};
}

}  // namespace efsim
