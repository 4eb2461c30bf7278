#pragma once

#include <map>
#include <string>

#include "mmppctl/mdp_solver.hpp"
#include "mmppctl/model.hpp"

namespace mmppctl {

/// Average Rate Method: the single-phase optimal policy for the stationary
/// mean arrival rate, applied in every phase.
Policy arm_policy(const Scenario& scenario);

/// Phase Rate based Method: in phase s, the single-phase optimal policy for
/// arrival rate lambda_s. Throws Unstable naming the first phase with
/// lambda_s >= u_max.
Policy prm_policy(const Scenario& scenario);

struct FixedRateResult {
  double mu_star;
  double gain;
};

/// Best constant (open-loop) service rate in (mean rate, u_max]: 64-point
/// scan, then golden-section refinement of the bracketing interval to 1e-4.
FixedRateResult fixed_rate_policy(const Scenario& scenario,
                                  PolicyEvaluation method = PolicyEvaluation::Stationary);

struct HeuristicGain {
  double gain;
  double pct_suboptimal;  // 100 (gain - optimal) / optimal
};

struct ComparisonRow {
  std::string label;
  double optimal_gain = 0.0;
  std::map<std::string, HeuristicGain> heuristic_gains;  // "arm", "prm", "fixed"
  double fixed_rate = 0.0;
};

struct ComparisonOptions {
  /// Scoring of the ARM and PRM policies.
  PolicyEvaluation policies = PolicyEvaluation::Relative;
  /// Scoring of constant rates in the fixed-rate search.
  PolicyEvaluation fixed_rate = PolicyEvaluation::Stationary;
};

ComparisonRow compare_heuristics(const Scenario& scenario, std::string label = {},
                                 ComparisonOptions options = {});

/// Single-phase copy of `scenario` with Poisson arrivals at `rate`.
Scenario single_phase_scenario(const Scenario& scenario, double rate);

}  // namespace mmppctl
