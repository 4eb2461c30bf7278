#include "mmppctl/heuristics.hpp"

#include <cmath>
#include <sstream>

#include "mmppctl/errors.hpp"

namespace mmppctl {

Scenario single_phase_scenario(const Scenario& scenario, double rate) {
  SolverSettings settings = scenario.settings();
  settings.alpha = 0.0;
  return Scenario(PhaseProcess(Eigen::MatrixXd::Zero(1, 1), {rate}), scenario.cost(), settings);
}

namespace {

Eigen::VectorXd single_phase_rates(const Scenario& scenario, double rate) {
  return solve_average(single_phase_scenario(scenario, rate)).policy.rates().col(0);
}

}  // namespace

Policy arm_policy(const Scenario& scenario) {
  const double mean = mean_arrival_rate(scenario.phase());
  if (!(scenario.cost().u_max() > mean)) {
    std::ostringstream msg;
    msg << "ARM: u_max = " << scenario.cost().u_max() << " does not exceed the mean rate " << mean;
    throw Unstable(msg.str());
  }
  const Eigen::VectorXd column = single_phase_rates(scenario, mean);
  const auto phases = static_cast<Eigen::Index>(scenario.phase().size());
  return Policy(column.replicate(1, phases));
}

Policy prm_policy(const Scenario& scenario) {
  const auto& rates = scenario.phase().rates();
  const double u_max = scenario.cost().u_max();
  for (std::size_t s = 0; s < rates.size(); ++s) {
    if (!(u_max > rates[s])) {
      std::ostringstream msg;
      msg << "PRM: phase " << s + 1 << " has arrival rate " << rates[s] << " >= u_max = " << u_max;
      throw Unstable(msg.str());
    }
  }
  Eigen::MatrixXd table(scenario.truncation() + 1, static_cast<Eigen::Index>(rates.size()));
  for (std::size_t s = 0; s < rates.size(); ++s) {
    table.col(static_cast<Eigen::Index>(s)) = single_phase_rates(scenario, rates[s]);
  }
  return Policy(std::move(table));
}

FixedRateResult fixed_rate_policy(const Scenario& scenario, PolicyEvaluation method) {
  const double lower = mean_arrival_rate(scenario.phase());
  const double upper = scenario.cost().u_max();
  if (!(upper > lower)) {
    std::ostringstream msg;
    msg << "fixed rate: u_max = " << upper << " does not exceed the mean rate " << lower;
    throw Unstable(msg.str());
  }
  auto gain = [&](double mu) { return open_loop_gain(scenario, mu, method); };

  constexpr int kScan = 64;
  const double step = (upper - lower) / kScan;
  int best = 1;
  double best_gain = gain(lower + step);
  for (int i = 2; i <= kScan; ++i) {
    const double g = gain(lower + i * step);
    if (g < best_gain) {
      best_gain = g;
      best = i;
    }
  }

  // Golden section on the two scan cells around the best grid point. The
  // left end stays strictly above the mean rate.
  double a = lower + (best - 1) * step;
  double b = lower + std::min(best + 1, kScan) * step;
  if (best == 1) a = lower + 1e-3 * step;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = gain(x1);
  double f2 = gain(x2);
  while (b - a > 1e-4) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = gain(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = gain(x2);
    }
  }
  const double mu = f1 <= f2 ? x1 : x2;
  const double g = std::min(f1, f2);
  if (g <= best_gain) return {mu, g};
  return {lower + best * step, best_gain};
}

ComparisonRow compare_heuristics(const Scenario& scenario, std::string label,
                                 ComparisonOptions options) {
  ComparisonRow row;
  row.label = std::move(label);
  const SolveResult optimal = solve_average(scenario);
  row.optimal_gain = *optimal.gain;
  auto entry = [&](double g) {
    return HeuristicGain{g, 100.0 * (g - row.optimal_gain) / row.optimal_gain};
  };
  row.heuristic_gains["arm"] = entry(policy_gain(scenario, arm_policy(scenario), options.policies));
  row.heuristic_gains["prm"] = entry(policy_gain(scenario, prm_policy(scenario), options.policies));
  const FixedRateResult fixed = fixed_rate_policy(scenario, options.fixed_rate);
  row.heuristic_gains["fixed"] = entry(fixed.gain);
  row.fixed_rate = fixed.mu_star;
  return row;
}

}  // namespace mmppctl
