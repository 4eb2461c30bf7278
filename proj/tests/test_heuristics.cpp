#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mmppctl/errors.hpp"
#include "mmppctl/experiments.hpp"
#include "mmppctl/heuristics.hpp"

using namespace mmppctl;

TEST_SUITE("heuristics") {
  TEST_CASE("ARM ignores the phase") {
    const Scenario sc = comparison_scenario(2, 1, 0.25);
    const Policy p = arm_policy(sc);
    for (Eigen::Index s = 1; s < 8; ++s) CHECK(p.rates().col(s) == p.rates().col(0));
    // It is the single-phase optimum at the mean rate.
    const Policy mm1 = solve_average(single_phase_scenario(sc, mean_arrival_rate(sc.phase()))).policy;
    CHECK(p.rates().col(0) == mm1.rates().col(0));
  }

  TEST_CASE("PRM columns are per-phase optima and monotone in n") {
    const Scenario sc = comparison_scenario(3, 2, 0.5);
    const Policy p = prm_policy(sc);
    for (std::size_t s = 0; s < 8; ++s) {
      const Policy mm1 = solve_average(single_phase_scenario(sc, sc.phase().rates()[s])).policy;
      CHECK(p.rates().col(static_cast<Eigen::Index>(s)) == mm1.rates().col(0));
    }
    CHECK((first_difference(p.rates()).array() >= -1e-9).all());
  }

  TEST_CASE("PRM on a single phase is the optimal policy") {
    const Scenario sc = testing::single_phase(1.3, 6.0);
    CHECK((prm_policy(sc).rates() - solve_average(sc).policy.rates()).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("PRM names the first unstable phase") {
    const Scenario sc(PhaseProcess(birth_death_generator(3, 1.0), {0.5, 2.5, 3.5}),
                      testing::exp_cost(2.0));
    try {
      prm_policy(sc);
      FAIL("expected Unstable");
    } catch (const Unstable& e) {
      CHECK(std::string(e.what()).find("phase 2") != std::string::npos);
    }
  }

  TEST_CASE("fixed rate search against a brute-force grid") {
    const Scenario sc = testing::single_phase(0.5, 5.0);
    const FixedRateResult best = fixed_rate_policy(sc);
    double grid = INFINITY;
    for (int k = 1; k <= 5000; ++k) grid = std::min(grid, open_loop_gain(sc, 0.5 + 4.5 * k / 5000.0));
    CHECK(std::abs(best.gain - grid) <= 1e-3);
    CHECK(best.gain <= grid + 1e-9);
    CHECK(best.mu_star > 0.5);
  }

  TEST_CASE("comparison rows are self-consistent and dominated by the optimum") {
    for (const Scenario& sc : {comparison_scenario(2, 1, 0.25), comparison_scenario(3, 1, 0.75),
                               comparison_scenario(2, 2, 1.0), example32_scenario()}) {
      const ComparisonRow row = compare_heuristics(sc, "x");
      for (const auto& [name, h] : row.heuristic_gains) {
        CHECK(h.pct_suboptimal == doctest::Approx(100 * (h.gain - row.optimal_gain) / row.optimal_gain));
        CHECK(h.gain >= row.optimal_gain - 10 * sc.tolerance());
        CHECK(h.pct_suboptimal >= -0.1);
      }
    }
  }

  TEST_CASE("PRM is nearly optimal when the phases barely move") {
    // With phases frozen the optimal gain tends to the phase mixture of the
    // single-phase optimal gains, which no policy can beat.
    const Scenario base = comparison_scenario(2, 1, 0.25);
    const Scenario frozen =
        base.with_phase(PhaseProcess(base.phase().generator() * 1e-6, base.phase().rates()));
    const Eigen::VectorXd p = stationary_distribution(frozen.phase());
    double mixture = 0.0;
    for (std::size_t s = 0; s < 8; ++s) {
      mixture += p(static_cast<Eigen::Index>(s)) *
                 *solve_average(single_phase_scenario(frozen, frozen.phase().rates()[s])).gain;
    }
    const double prm = evaluate_policy(frozen, prm_policy(frozen));
    CHECK(std::abs(prm - mixture) / mixture <= 0.005);
  }

  TEST_CASE("heuristics require stability") {
    const Scenario sc(PhaseProcess(birth_death_generator(8, 0.25), test_case_rates(1)),
                      testing::exp_cost(0.5));
    CHECK_THROWS_AS(arm_policy(sc), Unstable);
    CHECK_THROWS_AS(fixed_rate_policy(sc), Unstable);
  }
}
