#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mmppctl/mdp_solver.hpp"
#include "mmppctl/model.hpp"

namespace mmppctl {

struct MonotonicityViolation {
  int n;
  std::size_t s;       // zero-based phase index of the lower entry
  double value_low;    // entry at the lower index
  double value_high;   // entry at the next index, smaller than value_low
};

struct MonotonicityReport {
  bool monotone = true;
  std::vector<MonotonicityViolation> violations;
};

/// Generator form of stochastic monotonicity: with T the lower-triangular
/// all-ones matrix, every off-diagonal entry of T^{-1} Q T is >= -1e-12.
bool check_generator_monotone(const PhaseProcess& phase);
bool check_generator_monotone(const Eigen::MatrixXd& generator);

/// Every (n,s) with mu(n+1,s) < mu(n,s) - 1e-9.
MonotonicityReport verify_monotone_in_n(const Policy& policy);

/// Every (n,s) with mu(n,s+1) < mu(n,s) - 1e-9.
MonotonicityReport verify_monotone_in_s(const Policy& policy);

}  // namespace mmppctl
