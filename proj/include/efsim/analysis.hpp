#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace efsim {

// Approximation-ratio bookkeeping. omega is the delay inflation of the
// affected APs under coverage-local recovery relative to the absorbing
// coverages' pre-failure delay; tau is the inflation of a full recompute
// relative to the pre-failure network average.
struct RatioEstimate {
  double rho = 0.0;
  double omega = 0.0;
  double tau = 0.0;
  double epsilon_predicted = 0.0;  // (1 + rho*(omega-1)) / tau
  double epsilon_measured = 0.0;   // recovered delay / brute-force optimum
  double l_bar = 0.0;              // average APs per coverage, (M-L)/L
  double gap = 0.0;                // |measured - predicted|
};

RatioEstimate approximation_ratio(double recovered_delay, double oracle_delay,
                                  double omega, double tau, double rho,
                                  double l_bar = 0.0);

// Lower bound on omega implied by a ratio above one: 1 + (tau-1)/rho.
double omega_lower_bound(double rho, double tau);

// Log-log least-squares fit of per-failure recomputation counts against the
// AP count; needs at least three sizes.
struct ComplexityFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
ComplexityFit complexity_check(
    const std::vector<std::tuple<int, int, double>>& m_l_cost);

struct RobustnessParams {
  double eps_l = 0.0;     // f_es_max / f_bs_max
  double nu = 0.0;        // f_bs_max / f_bs_min
  double f_bs_min = 0.0;
  double t_bar_min = 0.0; // minimum per-AP mean offered volume per slot
  double q_min = 0.0;     // min of the queue minima over the run
  double d_th = 0.0;      // latency threshold, seconds
};

// Tolerated failures for a latency threshold: n_max from the threshold and
// capacity ratios, then s_t = floor(n_max L^2 / (M + n_max L)), clipped to
// [0, L-1].
struct ToleranceBound {
  double n_bar_max = 0.0;
  int s_t = 0;
};
ToleranceBound tolerance_bound(const RobustnessParams& params, int m, int l);

// s_t for a given average per-server AP increase n_bar (shared kernel; with
// n_bar = lambda*M/L this reduces to floor(lambda*L/(1+lambda))).
int tolerated_failures(double n_bar, int m, int l);

struct LatencyBoundParams {
  double f_min = 0.0;   // min service rate over APs and servers
  double y_max = 0.0;   // max hops from an AP to its server
  double q_max = 0.0;   // max backlog over the run
  double t_max = 0.0;   // max per-AP offered volume per slot
};

// Guaranteed mean latency with `failed` servers down:
// (1/F)(1+y_max)(Q + n_bar*T_max) with n_bar = M/(L-S) - M/L.
double latency_bound(int failed, int m, int l, const LatencyBoundParams& p);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Small-instance study: warm up a loaded miniature network, fail one server,
// and compare coverage-local recovery against the exhaustive optimum plus
// the evolved-run inflation factors feeding the predicted ratio.
struct OracleStudyParams {
  int warm_slots = 30;
  int post_slots = 15;
  double load_boost = 3.0;  // multiplies data/work scales
};
struct OracleInstanceResult {
  bool valid = false;
  double eps_measured = 0.0;
  double eps_predicted = 0.0;
  double omega = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  double recovered_delay = 0.0;
  double oracle_delay = 0.0;
};
OracleInstanceResult run_oracle_instance(std::uint64_t seed,
                                         const OracleStudyParams& params = {});

nlohmann::json ratio_to_json(const RatioEstimate& r);

}  // namespace efsim
