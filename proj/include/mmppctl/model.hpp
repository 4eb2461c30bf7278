#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mmppctl {

// ---------------------------------------------------------------------------
// Phase process
// ---------------------------------------------------------------------------

/**
 * Modulating CTMC of an MMPP: generator Q and one Poisson arrival rate per
 * phase.
 *
 * With Ordering::SortByRate (the default) phases are relabelled so that the
 * rates are non-decreasing; `permutation()[i]` is the input index of the
 * phase now stored at position i and the generator is conjugated
 * accordingly. Ordering::Preserve keeps the input order, which is needed
 * whenever the generator's structure carries meaning (cyclic MMPPs built
 * from a periodic rate function).
 *
 * Construction throws InvalidModel unless every row of Q sums to zero,
 * off-diagonal entries are non-negative, rates are non-negative and the
 * chain is irreducible.
 */
class PhaseProcess {
 public:
  enum class Ordering { SortByRate, Preserve };

  PhaseProcess(Eigen::MatrixXd generator, std::vector<double> rates,
               Ordering ordering = Ordering::SortByRate);

  std::size_t size() const { return rates_.size(); }
  const Eigen::MatrixXd& generator() const { return generator_; }
  const std::vector<double>& rates() const { return rates_; }
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  bool rate_sorted() const { return rate_sorted_; }
  double max_rate() const;

 private:
  Eigen::MatrixXd generator_;
  std::vector<double> rates_;
  std::vector<std::size_t> permutation_;
  bool rate_sorted_ = true;
};

// ---------------------------------------------------------------------------
// Costs
// ---------------------------------------------------------------------------

/// c(mu) = e^mu - 1
struct ExponentialCost {};
/// c(mu) = mu^2 / 2 + offset
struct QuadraticCost {
  double offset = 0.0;
};
/// c(mu) = sum_k a_k mu^k, a_k >= 0
struct PowerSeriesCost {
  std::vector<double> coefficients;
};
using ServiceCost = std::variant<ExponentialCost, QuadraticCost, PowerSeriesCost>;

/// h(n) = n
struct LinearHolding {};
/// h(n) = (n - shift)^+
struct ShiftedLinearHolding {
  int shift = 0;
};
/// h(n) = scale * n^power
struct PowerHolding {
  double scale = 1.0;
  int power = 1;
};
using HoldingCost = std::variant<LinearHolding, ShiftedLinearHolding, PowerHolding>;

class CostModel {
 public:
  /// Throws InvalidModel if c' is not strictly increasing and positive on (0, u_max].
  CostModel(ServiceCost service, HoldingCost holding, double u_max);

  const ServiceCost& service() const { return service_; }
  const HoldingCost& holding() const { return holding_; }
  double u_max() const { return u_max_; }

  double service_cost(double mu) const;
  double marginal_service_cost(double mu) const;
  double holding_cost(int n) const;

  /// Checks that h is non-decreasing and convex on 0..n_max with h(0) = 0.
  void validate_holding(int n_max) const;

 private:
  ServiceCost service_;
  HoldingCost holding_;
  double u_max_;
};

// ---------------------------------------------------------------------------
// Scenario and uniformization
// ---------------------------------------------------------------------------

/// How arrivals are treated at the queue-length cap N.
enum class Boundary {
  /// The value function is continued linearly past N (y(N+1,s) = y(N,s)).
  /// Keeps the relative values convex in n on the truncated lattice.
  Extrapolate,
  /// Arrivals at N are lost (self-loop).
  Block,
};

struct SolverSettings {
  int truncation = 50;
  double alpha = 0.0;  // 0 selects the average-cost criterion
  double tolerance = 1e-8;
  double uniformization_slack = 1.0;
  Boundary boundary = Boundary::Extrapolate;
  long max_iterations = 1'000'000;
};

class Scenario {
 public:
  Scenario(PhaseProcess phase, CostModel cost, SolverSettings settings = {});

  const PhaseProcess& phase() const { return phase_; }
  const CostModel& cost() const { return cost_; }
  const SolverSettings& settings() const { return settings_; }
  int truncation() const { return settings_.truncation; }
  double alpha() const { return settings_.alpha; }
  double tolerance() const { return settings_.tolerance; }

  /// Same cost model and settings, different phase process.
  Scenario with_phase(PhaseProcess phase) const;
  Scenario with_settings(SolverSettings settings) const;

 private:
  PhaseProcess phase_;
  CostModel cost_;
  SolverSettings settings_;
};

struct UniformizedModel {
  double eta_bar;
  double slack;
  double nu;
  Eigen::MatrixXd q_bar;  // eta_bar * I + Q, entrywise non-negative
};

struct StabilityReport {
  bool stable;
  double mean_rate;
  double u_max;
};

/// Solves pQ = 0, sum p = 1. Throws SingularSystem if the solve fails.
Eigen::VectorXd stationary_distribution(const PhaseProcess& phase);

double mean_arrival_rate(const PhaseProcess& phase);

StabilityReport stability_check(const Scenario& scenario);

UniformizedModel uniformize(const Scenario& scenario);

}  // namespace mmppctl
