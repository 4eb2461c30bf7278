#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "mmppctl/model.hpp"

namespace mmppctl {

/// Stationary service-rate table mu(n,s) over {0..N} x {phases}.
class Policy {
 public:
  /// Throws InvalidModel on negative/non-finite rates or a non-zero rate at n = 0.
  explicit Policy(Eigen::MatrixXd rates);

  static Policy constant(int truncation, std::size_t phases, double mu);

  const Eigen::MatrixXd& rates() const { return rates_; }
  int truncation() const { return static_cast<int>(rates_.rows()) - 1; }
  std::size_t phases() const { return static_cast<std::size_t>(rates_.cols()); }
  double operator()(int n, std::size_t s) const { return rates_(n, static_cast<Eigen::Index>(s)); }

 private:
  Eigen::MatrixXd rates_;
};

enum class Criterion { Discounted, Average };

struct ValueFunction {
  Eigen::MatrixXd values;  // (N+1) x L
  Criterion criterion = Criterion::Discounted;
  double alpha = 0.0;
  /// Relative mode only: values(0, reference_phase) == 0.
  std::size_t reference_phase = 0;
};

struct SolveResult {
  ValueFunction value;
  Policy policy;
  std::optional<double> gain;  // average criterion only, cost per unit time
  long iterations = 0;
  double residual = 0.0;
  /// Discounted solves of scenarios failing the stability condition still return.
  std::optional<StabilityReport> stability_warning;
};

/// Value iteration on the uniformized discounted optimality equations.
/// Requires alpha > 0; throws NonConvergence at the iteration cap.
SolveResult solve_discounted(const Scenario& scenario);

/// Relative value iteration for the long-run average cost.
/// Throws Unstable if u_max does not exceed the mean arrival rate.
SolveResult solve_average(const Scenario& scenario);

/// y(n,s) = v(n,s) - v(n-1,s), y(0,s) = 0.
Eigen::MatrixXd first_difference(const Eigen::MatrixXd& values);
Eigen::MatrixXd first_difference(const ValueFunction& value);

/// Largest per-state violation of the discounted optimality equations by `values`.
double discounted_residual(const Scenario& scenario, const Eigen::MatrixXd& values);

/// Long-run average cost of `policy` from the stationary distribution of the
/// CTMC it induces on the truncated lattice (arrivals at N are lost).
/// The service cost is charged while the server is busy (n > 0).
double evaluate_policy(const Scenario& scenario, const Policy& policy);

/// Stationary distribution pi(n,s) of the induced truncated CTMC. States
/// outside the unique closed class get probability 0; throws ReducibleChain
/// if there is more than one closed class.
Eigen::MatrixXd policy_occupancy(const Scenario& scenario, const Policy& policy);

/// Gain of `policy` by fixed-policy relative value iteration on the same
/// uniformized lattice and boundary rule as solve_average.
double relative_policy_gain(const Scenario& scenario, const Policy& policy);

/// How a fixed policy is scored.
enum class PolicyEvaluation {
  /// Stationary distribution of the truncated CTMC (evaluate_policy).
  Stationary,
  /// Fixed-policy relative value iteration (relative_policy_gain).
  Relative,
};

double policy_gain(const Scenario& scenario, const Policy& policy, PolicyEvaluation method);

/// Open-loop server running at `mu` in every state, including while idle, so
/// c(mu) is paid at every instant.
double open_loop_gain(const Scenario& scenario, double mu,
                      PolicyEvaluation method = PolicyEvaluation::Stationary);

}  // namespace mmppctl
