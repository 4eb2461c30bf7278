#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mmppctl/mdp_solver.hpp"
#include "mmppctl/model.hpp"

namespace mmppctl {

/// Step function with levels rates[i] on [breakpoints[i], breakpoints[i+1]).
/// Breakpoints run from 0 to the period.
struct PiecewiseConstantRate {
  std::vector<double> breakpoints;
  std::vector<double> rates;
};

/// lambda(t) = amplitude * sin(2 pi t / T) + offset
struct SinusoidRate {
  double amplitude = 0.0;
  double offset = 0.0;
};

using RateFamily = std::variant<PiecewiseConstantRate, SinusoidRate>;

/// Periodic arrival-rate function of an NHPP.
class RateFunction {
 public:
  /// Throws InvalidModel if the rate can go negative or the breakpoints do
  /// not cover [0, period).
  RateFunction(RateFamily family, double period);

  const RateFamily& family() const { return family_; }
  double period() const { return period_; }

  /// Rate at time t (taken modulo the period). Times within 1e-9 T of a
  /// breakpoint are snapped onto it.
  double rate(double t) const;
  /// Integral of lambda over [a, b] with 0 <= a <= b <= T.
  double integral(double a, double b) const;
  double max_rate() const;
  double mean_rate() const;

 private:
  RateFamily family_;
  double period_;
};

struct NhppSettings {
  int truncation = 50;
  double delta_t = 0.05;
  double tolerance = 1e-6;
  /// Arrivals at N are lost (Block) or the value function continues linearly.
  Boundary boundary = Boundary::Block;
  double damping = 0.5;
  long max_iterations = 10'000'000;
};

class NhppScenario {
 public:
  /// Throws InvalidModel unless T / delta_t is an integer and nu * delta_t < 5.
  NhppScenario(RateFunction rate, CostModel cost, NhppSettings settings = {});

  const RateFunction& rate() const { return rate_; }
  const CostModel& cost() const { return cost_; }
  const NhppSettings& settings() const { return settings_; }
  int truncation() const { return settings_.truncation; }
  double delta_t() const { return settings_.delta_t; }
  int slots() const { return slots_; }
  /// max_t lambda(t) + u_max
  double nu() const { return nu_; }
  double slot_time(int z) const { return z * settings_.delta_t; }
  double slot_rate(int z) const { return slot_rates_[static_cast<std::size_t>(z)]; }

 private:
  RateFunction rate_;
  CostModel cost_;
  NhppSettings settings_;
  int slots_;
  double nu_;
  std::vector<double> slot_rates_;
};

/// Service rates mu(n, z) over {0..N} x time slots.
class NhppPolicy {
 public:
  explicit NhppPolicy(Eigen::MatrixXd rates);

  const Eigen::MatrixXd& rates() const { return rates_; }
  int truncation() const { return static_cast<int>(rates_.rows()) - 1; }
  int slots() const { return static_cast<int>(rates_.cols()); }
  double operator()(int n, int z) const { return rates_(n, z); }

 private:
  Eigen::MatrixXd rates_;
};

/// One-slot transition probabilities out of (n, z) under service rate x.
struct SlotTransition {
  double up;    // arrival
  double down;  // service completion
  double stay;  // fictitious event
  double none;  // no event in the slot
  double total() const { return up + down + stay + none; }
};

SlotTransition slot_transition(const NhppScenario& scenario, int n, int z, double x);

struct NhppSolveResult {
  NhppPolicy policy;
  Eigen::MatrixXd values;  // relative, values(0,0) = 0
  double gain;             // cost per unit time
  double residual;
  long iterations;
};

/// Damped relative value iteration on the discretized average-cost equations.
/// Throws Unstable if the time-averaged rate is not below u_max.
NhppSolveResult solve_nhpp_average(const NhppScenario& scenario);

/// Gain of a fixed policy by the same damped iteration without minimization.
double evaluate_nhpp_policy(const NhppScenario& scenario, const NhppPolicy& policy);

/// 0, T/l, ..., T
std::vector<double> equal_cut_points(double period, int partitions);

/// Cyclic MMPP with one phase per partition interval: lambda_s is the average
/// rate over the interval, phase s moves to s+1 at rate 1 / width. Phases stay
/// in time order. Throws DegeneratePartition if an interval has width <= 0.
PhaseProcess build_mmpp_approximation(const RateFunction& rate, int partitions,
                                      const std::optional<std::vector<double>>& cut_points = {});

/// mu(n, z) = mmpp_policy(n, s) for the interval [t_{s-1}, t_s) holding z.
NhppPolicy lift_policy(const Policy& mmpp_policy, const std::vector<double>& cut_points,
                       const NhppScenario& scenario);

struct NhppApproximation {
  std::vector<double> cut_points;
  PhaseProcess phase;
  SolveResult mmpp;
  NhppPolicy lifted;
  double lifted_gain;
};

/// Build the approximating MMPP, solve it, lift its policy and evaluate it on
/// the NHPP. `mmpp_settings` controls the MMPP solve (its truncation is
/// replaced by the NHPP truncation and alpha by 0).
NhppApproximation approximate_nhpp(const NhppScenario& scenario, int partitions,
                                   const std::optional<std::vector<double>>& cut_points = {},
                                   SolverSettings mmpp_settings = {});

}  // namespace mmppctl
