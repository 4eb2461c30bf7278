#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mmppctl/model.hpp"

namespace testing {

inline Eigen::MatrixXd matrix(int rows, int cols, std::initializer_list<double> values) {
  Eigen::MatrixXd m(rows, cols);
  auto it = values.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = *it++;
  return m;
}

inline Eigen::MatrixXd example31_q() { return matrix(3, 3, {-1, 1, 0, 1, -2, 1, 0, 1, -1}); }
inline Eigen::MatrixXd example32_q() { return matrix(3, 3, {-1, 1, 0, 0, -1, 1, 1, 0, -1}); }

inline mmppctl::CostModel exp_cost(double u_max) {
  return mmppctl::CostModel(mmppctl::ExponentialCost{}, mmppctl::LinearHolding{}, u_max);
}

inline mmppctl::Scenario single_phase(double lambda, double u_max, int truncation = 50,
                                      double alpha = 0.0) {
  mmppctl::SolverSettings s;
  s.truncation = truncation;
  s.alpha = alpha;
  return mmppctl::Scenario(mmppctl::PhaseProcess(Eigen::MatrixXd::Zero(1, 1), {lambda}),
                           exp_cost(u_max), s);
}

// Random irreducible generator: a random cycle through all phases guarantees
// irreducibility, plus random extra edges.
inline Eigen::MatrixXd random_generator(std::mt19937& rng, int l, double density = 0.5) {
  std::uniform_real_distribution<double> rate(0.05, 2.0);
  std::bernoulli_distribution edge(density);
  std::vector<int> order(l);
  for (int i = 0; i < l; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i < l && l > 1; ++i) q(order[i], order[(i + 1) % l]) = rate(rng);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      if (i != j && q(i, j) == 0.0 && edge(rng)) q(i, j) = rate(rng);
  for (int i = 0; i < l; ++i) q(i, i) = -(q.row(i).sum() - q(i, i));
  return q;
}

inline Eigen::MatrixXd random_birth_death(std::mt19937& rng, int l) {
  std::uniform_real_distribution<double> rate(0.05, 2.0);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i + 1 < l; ++i) {
    q(i, i + 1) = rate(rng);
    q(i + 1, i) = rate(rng);
  }
  for (int i = 0; i < l; ++i) q(i, i) = -q.row(i).sum();
  return q;
}

}  // namespace testing
