#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mmppctl/errors.hpp"
#include "mmppctl/experiments.hpp"
#include "mmppctl/nhpp.hpp"

using namespace mmppctl;

namespace {

constexpr double kPi = 3.14159265358979323846;

RateFunction step_rate(double period) {
  std::vector<double> b;
  for (int i = 0; i <= 5; ++i) b.push_back(period * i / 5);
  return RateFunction(PiecewiseConstantRate{b, {0.1, 2.0, 4.0, 2.0, 0.1}}, period);
}

NhppScenario small_scenario(RateFunction rate, double delta_t = 0.1, int truncation = 25) {
  NhppSettings s;
  s.truncation = truncation;
  s.delta_t = delta_t;
  s.tolerance = 1e-7;
  return NhppScenario(std::move(rate), testing::exp_cost(6.0), s);
}

}  // namespace

TEST_SUITE("nhpp") {
  TEST_CASE("piecewise-constant rate uses half-open intervals") {
    const RateFunction r = step_rate(4.0);
    CHECK(r.rate(0.0) == 0.1);
    CHECK(r.rate(0.8) == 2.0);
    CHECK(r.rate(0.8 - 1e-6) == 0.1);
    CHECK(r.rate(16 * 0.05) == 2.0);  // 16 * 0.05 is not exactly 0.8
    CHECK(r.rate(4.0) == 0.1);         // wraps to 0
    CHECK(r.rate(5.7) == r.rate(1.7));
    CHECK(r.max_rate() == 4.0);
    CHECK(r.mean_rate() == doctest::Approx(8.2 / 5));
  }

  TEST_CASE("sinusoid integrals in closed form") {
    const double period = 3 * kPi / 2;
    const RateFunction r(SinusoidRate{5.0, 6.0}, period);
    CHECK(r.mean_rate() == doctest::Approx(6.0));
    CHECK(r.max_rate() == 11.0);
    // Midpoint quadrature oracle.
    const double a = 0.3, b = 2.9;
    const int panels = 200000;
    double area = 0.0;
    for (int i = 0; i < panels; ++i) area += r.rate(a + (i + 0.5) * (b - a) / panels);
    area *= (b - a) / panels;
    CHECK(r.integral(a, b) == doctest::Approx(area).epsilon(1e-9));
    CHECK_THROWS_AS(RateFunction(SinusoidRate{5.0, 4.0}, 1.0), InvalidModel);
  }

  TEST_CASE("MMPP approximation of the step rate") {
    const double period = 6.0;
    const PhaseProcess p = build_mmpp_approximation(step_rate(period), 5);
    const std::vector<double> expected{0.1, 2.0, 4.0, 2.0, 0.1};
    for (int s = 0; s < 5; ++s) CHECK(p.rates()[s] == doctest::Approx(expected[s]).epsilon(1e-12));
    for (int s = 0; s < 5; ++s) {
      CHECK(p.generator()(s, (s + 1) % 5) == doctest::Approx(5.0 / period));
      CHECK(p.generator()(s, s) == doctest::Approx(-5.0 / period));
    }
    CHECK(p.generator().cwiseAbs().sum() == doctest::Approx(10 * 5.0 / period));
    CHECK_FALSE(p.rate_sorted());
  }

  TEST_CASE("MMPP approximation of the sinusoid") {
    const PhaseProcess p = build_mmpp_approximation(RateFunction(SinusoidRate{5, 6}, 2 * kPi), 6);
    CHECK(p.rates()[0] == doctest::Approx(6.0 + 7.5 / kPi).epsilon(1e-12));
    CHECK(p.rates()[0] == doctest::Approx(8.3873).epsilon(1e-4));
    CHECK(p.rates()[3] == doctest::Approx(6.0 - 7.5 / kPi).epsilon(1e-12));
  }

  TEST_CASE("constant rate and custom cut points") {
    const RateFunction flat(PiecewiseConstantRate{{0.0, 2.0}, {3.0}}, 2.0);
    for (int l : {1, 3, 7}) {
      const PhaseProcess p = build_mmpp_approximation(flat, l);
      for (double r : p.rates()) CHECK(r == doctest::Approx(3.0));
    }
    const PhaseProcess uneven = build_mmpp_approximation(step_rate(5.0), 2, std::vector<double>{0, 1.5, 5});
    CHECK(uneven.rates()[0] == doctest::Approx((0.1 + 0.5 * 2.0) / 1.5));
    CHECK(uneven.generator()(1, 0) == doctest::Approx(1 / 3.5));
    CHECK_THROWS_AS(build_mmpp_approximation(flat, 2, std::vector<double>{0, 2, 2}), DegeneratePartition);
    CHECK_THROWS_AS(build_mmpp_approximation(flat, 2, std::vector<double>{0, 1}), DegeneratePartition);
    CHECK_THROWS_AS(build_mmpp_approximation(flat, 0), DegeneratePartition);
  }

  TEST_CASE("scenario validation") {
    NhppSettings s;
    s.delta_t = 0.3;
    CHECK_THROWS_AS(NhppScenario(step_rate(4.0), testing::exp_cost(10.0), s), InvalidModel);
    s.delta_t = 0.4;
    CHECK_THROWS_AS(NhppScenario(step_rate(4.0), testing::exp_cost(20.0), s), InvalidModel);  // nu dt = 9.6
    s.delta_t = 0.05;
    const NhppScenario ok(step_rate(4.0), testing::exp_cost(10.0), s);
    CHECK(ok.slots() == 80);
    CHECK(ok.nu() == 14.0);
    CHECK_THROWS_AS(solve_nhpp_average(NhppScenario(step_rate(4.0), testing::exp_cost(1.5), s)), Unstable);
  }

  TEST_CASE("one-slot transition probabilities sum to one") {
    const NhppScenario sc = example43_scenario(4.0);
    double worst = 0.0;
    for (int z = 0; z < sc.slots(); ++z)
      for (int n = 0; n <= sc.truncation(); ++n)
        for (int k = 0; k <= 20; ++k) {
          const SlotTransition t = slot_transition(sc, n, z, 10.0 * k / 20);
          worst = std::max(worst, std::abs(t.total() - 1.0));
          CHECK(std::min({t.up, t.down, t.stay, t.none}) >= 0.0);
        }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("lifting follows the partition") {
    const NhppScenario sc = small_scenario(step_rate(4.0), 0.05);
    const std::vector<double> cuts = equal_cut_points(4.0, 5);
    Eigen::MatrixXd table(26, 5);
    for (int n = 0; n <= 25; ++n)
      for (int s = 0; s < 5; ++s) table(n, s) = n == 0 ? 0.0 : n + 0.1 * s;
    const NhppPolicy lifted = lift_policy(Policy(table), cuts, sc);
    CHECK(lifted.slots() == 80);
    for (int z = 0; z < 80; ++z) {
      const int s = z / 16;  // slot 16 starts exactly at 0.8
      CHECK(lifted.rates().col(z) == table.col(s));
    }
    const NhppPolicy single = lift_policy(Policy(table.leftCols(1)), equal_cut_points(4.0, 1), sc);
    for (int z = 1; z < 80; ++z) CHECK(single.rates().col(z) == single.rates().col(0));
  }

  TEST_CASE("solver is consistent with policy evaluation and the lifted policy") {
    const NhppScenario sc = small_scenario(step_rate(2.0));
    const NhppSolveResult r = solve_nhpp_average(sc);
    CHECK(r.residual < sc.settings().tolerance);
    CHECK(std::abs(evaluate_nhpp_policy(sc, r.policy) - r.gain) <= 10 * sc.settings().tolerance);
    CHECK((r.policy.rates().row(0).array() == 0.0).all());
    CHECK((r.policy.rates().array() <= 6.0).all());
    const NhppApproximation a = approximate_nhpp(sc, 5);
    CHECK(a.lifted_gain >= r.gain - 10 * sc.settings().tolerance);
    CHECK(a.lifted_gain <= 1.05 * r.gain);
  }

  TEST_CASE("a constant rate reduces to the single-phase problem") {
    for (double dt : {0.05, 0.025}) {
      NhppSettings s;
      s.truncation = 30;
      s.delta_t = dt;
      s.tolerance = 1e-8;
      const NhppScenario sc(RateFunction(PiecewiseConstantRate{{0.0, 1.0}, {1.2}}, 1.0),
                            testing::exp_cost(5.0), s);
      SolverSettings m;
      m.truncation = 30;
      m.boundary = Boundary::Block;
      const double mm1 = *solve_average(testing::single_phase(1.2, 5.0, 30).with_settings(m)).gain;
      const double g = solve_nhpp_average(sc).gain;
      // First-order discretization error.
      CHECK(std::abs(g - mm1) / mm1 <= 0.5 * dt);
    }
  }

  TEST_CASE("evaluation rejects a policy that cannot drain the queue") {
    const NhppScenario sc = small_scenario(step_rate(2.0));
    Eigen::MatrixXd slow = Eigen::MatrixXd::Constant(26, sc.slots(), 0.5);
    slow.row(0).setZero();
    CHECK_THROWS_AS(evaluate_nhpp_policy(sc, NhppPolicy(slow)), Unstable);
  }
}

TEST_SUITE("nhpp_refinement") {
  TEST_CASE("halving the time step moves the step-rate gain by under 1%") {
    const NhppScenario coarse = example43_scenario(4.0);
    NhppSettings s = coarse.settings();
    s.delta_t /= 2;
    const NhppScenario fine(coarse.rate(), coarse.cost(), s);
    const double g1 = solve_nhpp_average(coarse).gain;
    const double g2 = solve_nhpp_average(fine).gain;
    CHECK(std::abs(g2 - g1) / g1 < 0.01);
  }
}
