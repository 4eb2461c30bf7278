import math

import numpy as np
import pytest

mmppctl = pytest.importorskip("mmppctl")


def example31(alpha=0.0):
    return mmppctl.example31_scenario(alpha)


def test_stationary_distribution_and_uniformization():
    q = np.array([[-1.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -1.0]])
    phase = mmppctl.PhaseProcess(q, [0.5, 1.0, 1.25])
    np.testing.assert_allclose(mmppctl.stationary_distribution(phase), [1 / 3] * 3, atol=1e-12)
    assert mmppctl.mean_arrival_rate(phase) == pytest.approx(11 / 12)
    settings = mmppctl.SolverSettings()
    settings.uniformization_slack = 0.0
    cost = mmppctl.CostModel(mmppctl.ExponentialCost(), mmppctl.LinearHolding(), 5.0)
    u = mmppctl.uniformize(mmppctl.Scenario(phase, cost, settings))
    assert u.nu == pytest.approx(8.25)


def test_conjugate():
    cp = mmppctl.ConjugatePair(mmppctl.CostModel(mmppctl.ExponentialCost(), mmppctl.LinearHolding(), 5.0))
    assert cp.psi(math.exp(2)) == pytest.approx(2.0)
    assert cp.phi(math.e) == pytest.approx(1.0)


def test_average_and_discounted_solves():
    r = mmppctl.solve_average(example31())
    assert r.gain == pytest.approx(3.514, rel=1e-3)
    assert mmppctl.evaluate_policy(example31(), r.policy) == pytest.approx(r.gain, abs=1e-6)
    assert mmppctl.verify_monotone_in_s(r.policy).monotone
    d = mmppctl.solve_discounted(mmppctl.example32_scenario(0.05))
    report = mmppctl.verify_monotone_in_s(d.policy)
    assert not report.monotone
    assert any(v.n == 4 for v in report.violations)


def test_mm1_policy_evaluation():
    phase = mmppctl.PhaseProcess(np.zeros((1, 1)), [0.5])
    cost = mmppctl.CostModel(mmppctl.ExponentialCost(), mmppctl.LinearHolding(), 5.0)
    sc = mmppctl.Scenario(phase, cost)
    g = mmppctl.evaluate_policy(sc, mmppctl.Policy.constant(50, 1, 1.0))
    assert g == pytest.approx(1.85914, abs=1e-3)


def test_heuristics():
    row = mmppctl.compare_heuristics(mmppctl.comparison_scenario(2, 1, 0.25), "Case I")
    assert row["optimal"] == pytest.approx(4.3651, rel=0.01)
    assert row["prm"][0] == pytest.approx(4.3676, rel=0.01)
    assert row["fixed"][0] == pytest.approx(7.6841, rel=0.01)


def test_nhpp_pipeline():
    rate = mmppctl.RateFunction.piecewise_constant([0, 0.4, 0.8, 1.2, 1.6, 2.0], [0.1, 2, 4, 2, 0.1], 2.0)
    settings = mmppctl.NhppSettings()
    settings.truncation = 25
    settings.delta_t = 0.1
    cost = mmppctl.CostModel(mmppctl.ExponentialCost(), mmppctl.LinearHolding(), 6.0)
    sc = mmppctl.NhppScenario(rate, cost, settings)
    opt = mmppctl.solve_nhpp_average(sc)
    approx = mmppctl.approximate_nhpp(sc, 5)
    assert approx.lifted_gain >= opt.gain - 1e-5
    np.testing.assert_allclose(approx.phase.rates, [0.1, 2, 4, 2, 0.1])


def test_errors_map_to_python_exceptions():
    with pytest.raises(mmppctl.InvalidModel):
        mmppctl.PhaseProcess(np.array([[-1.0, 1.0], [1.0, -0.5]]), [1.0, 2.0])
    with pytest.raises(mmppctl.Unstable):
        phase = mmppctl.PhaseProcess(np.zeros((1, 1)), [3.0])
        cost = mmppctl.CostModel(mmppctl.ExponentialCost(), mmppctl.LinearHolding(), 2.0)
        mmppctl.solve_average(mmppctl.Scenario(phase, cost))
    with pytest.raises(mmppctl.DegeneratePartition):
        mmppctl.build_mmpp_approximation(mmppctl.RateFunction.sinusoid(1, 2, 1.0), 2, [0, 0.5, 0.5])
    assert issubclass(mmppctl.Unstable, mmppctl.NumericError)
