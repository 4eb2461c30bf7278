#include <doctest.h>

#include <numeric>
#include <random>

#include "helpers.hpp"
#include "mmppctl/errors.hpp"
#include "mmppctl/experiments.hpp"
#include "mmppctl/mdp_solver.hpp"
#include "mmppctl/model.hpp"

using namespace mmppctl;
using testing::matrix;

TEST_SUITE("model") {
  TEST_CASE("stationary distribution of small chains") {
    CHECK(stationary_distribution(PhaseProcess(Eigen::MatrixXd::Zero(1, 1), {1.0}))(0) ==
          doctest::Approx(1.0));
    for (const auto& q : {testing::example31_q(), testing::example32_q()}) {
      const Eigen::VectorXd p = stationary_distribution(PhaseProcess(q, {0.5, 1, 1.25}));
      for (int s = 0; s < 3; ++s) CHECK(p(s) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
  }

  TEST_CASE("stationary distribution against a two-state closed form") {
    // p = (b, a) / (a + b) for Q = [[-a, a], [b, -b]]
    const double a = 0.3, b = 1.7;
    const Eigen::VectorXd p = stationary_distribution(PhaseProcess(matrix(2, 2, {-a, a, b, -b}), {1, 2}));
    CHECK(p(0) == doctest::Approx(b / (a + b)).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(a / (a + b)).epsilon(1e-12));
  }

  TEST_CASE("stationary distribution residual on random generators") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const int l = 1 + trial % 9;
      const Eigen::MatrixXd q = testing::random_generator(rng, l);
      std::vector<double> rates(l, 1.0);
      const PhaseProcess phase(q, rates, PhaseProcess::Ordering::Preserve);
      const Eigen::VectorXd p = stationary_distribution(phase);
      CHECK((p.transpose() * q).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
      CHECK((p.array() > 0.0).all());
    }
  }

  TEST_CASE("mean arrival rate") {
    CHECK(mean_arrival_rate(PhaseProcess(testing::example31_q(), {0.5, 1, 1.25})) ==
          doctest::Approx(0.916666667).epsilon(1e-8));
    CHECK(mean_arrival_rate(PhaseProcess(birth_death_generator(8, 0.25), test_case_rates(1))) ==
          doctest::Approx(0.975).epsilon(1e-12));
    CHECK(mean_arrival_rate(PhaseProcess(Eigen::MatrixXd::Zero(1, 1), {2.0})) == doctest::Approx(2.0));
  }

  TEST_CASE("stability predicate") {
    CHECK(stability_check(example31_scenario()).stable);
    const Scenario slow(PhaseProcess(birth_death_generator(8, 0.25), test_case_rates(1)),
                        testing::exp_cost(0.5));
    const StabilityReport r = stability_check(slow);
    CHECK_FALSE(r.stable);
    CHECK(r.mean_rate == doctest::Approx(0.975));
    CHECK(stability_check(testing::single_phase(0.0, 1.0)).stable);
  }

  TEST_CASE("uniformization constants") {
    SolverSettings s;
    s.uniformization_slack = 0.0;
    const UniformizedModel u31 = uniformize(example31_scenario().with_settings(s));
    CHECK(u31.eta_bar == 2.0);
    CHECK(u31.nu == doctest::Approx(8.25));
    const UniformizedModel u32 = uniformize(example32_scenario().with_settings(s));
    CHECK(u32.eta_bar == 1.0);
    CHECK(u32.nu == doctest::Approx(7.25));
    const Scenario one(PhaseProcess(Eigen::MatrixXd::Zero(1, 1), {1.0}), testing::exp_cost(1.0), s);
    CHECK(uniformize(one).nu == doctest::Approx(2.0));
    CHECK(uniformize(one).eta_bar == 0.0);
    // Qbar is non-negative with row sums eta_bar.
    CHECK((u31.q_bar.array() >= 0.0).all());
    CHECK((u31.q_bar.rowwise().sum().array() - u31.eta_bar).abs().maxCoeff() < 1e-15);
  }

  TEST_CASE("invalid generators are rejected") {
    CHECK_THROWS_AS(PhaseProcess(matrix(2, 2, {-1, 1, 1, -0.5}), {1, 2}), InvalidModel);
    CHECK_THROWS_AS(PhaseProcess(matrix(2, 2, {1, -1, 1, -1}), {1, 2}), InvalidModel);
    CHECK_THROWS_AS(PhaseProcess(matrix(2, 2, {0, 0, 1, -1}), {1, 2}), InvalidModel);  // reducible
    CHECK_THROWS_AS(PhaseProcess(matrix(2, 2, {-1, 1, 1, -1}), {1}), InvalidModel);
    CHECK_THROWS_AS(PhaseProcess(matrix(2, 2, {-1, 1, 1, -1}), {1, -2}), InvalidModel);
  }

  TEST_CASE("invalid costs are rejected") {
    CHECK_THROWS_AS(CostModel(ExponentialCost{}, LinearHolding{}, 0.0), InvalidModel);
    CHECK_THROWS_AS(CostModel(PowerSeriesCost{{0.0, 1.0}}, LinearHolding{}, 5.0), InvalidModel);
    CHECK_THROWS_AS(CostModel(PowerSeriesCost{{0.0, -1.0, 1.0}}, LinearHolding{}, 5.0), InvalidModel);
    CHECK_NOTHROW(CostModel(PowerSeriesCost{{0.0, 1.0, 0.5, 0.1}}, LinearHolding{}, 5.0));
    CHECK_THROWS_AS(CostModel(ExponentialCost{}, PowerHolding{1.0, 0}, 5.0), InvalidModel);
    CHECK_THROWS_AS(CostModel(ExponentialCost{}, ShiftedLinearHolding{-1}, 5.0), InvalidModel);
    CHECK_THROWS_AS(testing::single_phase(1.0, 5.0, 1), InvalidModel);
  }

  TEST_CASE("cost families evaluate as written") {
    const CostModel q(QuadraticCost{-1.0}, ShiftedLinearHolding{20}, 15.0);
    CHECK(q.service_cost(2.0) == doctest::Approx(1.0));
    CHECK(q.holding_cost(19) == 0.0);
    CHECK(q.holding_cost(25) == 5.0);
    const CostModel p(PowerSeriesCost{{0.0, 1.0, 2.0}}, PowerHolding{0.5, 2}, 3.0);
    CHECK(p.service_cost(2.0) == doctest::Approx(10.0));
    CHECK(p.marginal_service_cost(2.0) == doctest::Approx(9.0));
    CHECK(p.holding_cost(4) == doctest::Approx(8.0));
  }

  TEST_CASE("phases are sorted by rate and the generator conjugated") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const int l = 2 + trial % 6;
      const Eigen::MatrixXd q = testing::random_generator(rng, l);
      std::vector<double> rates(l);
      std::uniform_real_distribution<double> u(0.0, 5.0);
      for (auto& r : rates) r = u(rng);
      const PhaseProcess phase(q, rates);
      const auto& perm = phase.permutation();
      CHECK(std::is_sorted(phase.rates().begin(), phase.rates().end()));
      for (int i = 0; i < l; ++i) {
        CHECK(phase.rates()[i] == rates[perm[i]]);
        for (int j = 0; j < l; ++j) CHECK(phase.generator()(i, j) == q(perm[i], perm[j]));
      }
      // The mean rate does not depend on the labelling.
      const PhaseProcess kept(q, rates, PhaseProcess::Ordering::Preserve);
      CHECK(mean_arrival_rate(phase) == doctest::Approx(mean_arrival_rate(kept)).epsilon(1e-12));
    }
  }

  TEST_CASE("gain is invariant to the uniformization slack") {
    for (const Scenario& base :
         {example31_scenario(), example32_scenario(), comparison_scenario(2, 1, 0.5)}) {
      SolverSettings s0 = base.settings(), s5 = base.settings();
      s0.uniformization_slack = 0.0;
      s5.uniformization_slack = 5.0;
      const double g0 = *solve_average(base.with_settings(s0)).gain;
      const double g5 = *solve_average(base.with_settings(s5)).gain;
      CHECK(std::abs(g0 - g5) <= 10 * base.tolerance());
    }
  }
}
