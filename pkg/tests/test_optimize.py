import logging

import numpy as np
import pytest

from fluxon.optimize import NOMINAL_FAIL_PENALTY, Objective, PsoConfig, margin_objective, pso_minimize


def sphere(x):
    return float(np.sum(x * x))


def rosenbrock(x):
    return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)


class TestPso:
    def test_sphere_reaches_global_minimum(self):
        cfg = PsoConfig(bounds=tuple((-10.0, 10.0) for _ in range(5)),
                        n_particles=30, n_iterations=200, seed=0)
        _, best, trace = pso_minimize(sphere, cfg)
        assert best < 1e-6
        assert all(b[1] <= a[1] for a, b in zip(trace, trace[1:]))

    def test_rosenbrock_optimum_location(self):
        cfg = PsoConfig(bounds=((-2.0, 2.0), (-2.0, 2.0)),
                        n_particles=40, n_iterations=400, seed=1)
        best_x, best, _ = pso_minimize(rosenbrock, cfg)
        # oracle: dense local grid confirms (1,1) minimizes the function
        grid = np.linspace(-0.05, 0.05, 41)
        vals = [rosenbrock(np.array([1.0 + dx, 1.0 + dy])) for dx in grid for dy in grid]
        assert min(vals) == rosenbrock(np.array([1.0, 1.0])) == 0.0
        assert np.all(np.abs(best_x - 1.0) < 1e-2)

    def test_single_iteration_is_initial_best(self):
        cfg = PsoConfig(bounds=((-5.0, 5.0),) * 3, n_particles=10, n_iterations=1, seed=4)
        _, best, trace = pso_minimize(sphere, cfg)
        rng = np.random.default_rng(4)
        lo, hi = -5.0, 5.0
        x0 = lo + rng.random((10, 3)) * (hi - lo)
        assert best == pytest.approx(min(sphere(p) for p in x0))
        assert len(trace) == 1

    def test_bounds_respected(self):
        seen = []

        def probe(x):
            seen.append(x.copy())
            return sphere(x)

        cfg = PsoConfig(bounds=((-1.0, 2.0), (0.5, 3.0)), n_particles=8, n_iterations=40, seed=2)
        pso_minimize(probe, cfg)
        arr = np.asarray(seen)
        assert arr[:, 0].min() >= -1.0 and arr[:, 0].max() <= 2.0
        assert arr[:, 1].min() >= 0.5 and arr[:, 1].max() <= 3.0

    def test_seed_determinism(self):
        cfg = PsoConfig(bounds=((-3.0, 3.0),) * 4, n_particles=12, n_iterations=30, seed=9)
        a = pso_minimize(sphere, cfg)
        b = pso_minimize(sphere, cfg)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1] and a[2] == b[2]

    def test_nan_objective_becomes_inf(self, caplog):
        def nasty(x):
            return float("nan") if x[0] > 0 else sphere(x)

        cfg = PsoConfig(bounds=((-1.0, 1.0),), n_particles=6, n_iterations=10, seed=3)
        with caplog.at_level(logging.WARNING, logger="fluxon.optimize"):
            _, best, _ = pso_minimize(Objective(nasty, "nasty"), cfg)
        assert np.isfinite(best)
        assert "NaN" in caplog.text

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PsoConfig(bounds=((0.0, 1.0),), n_particles=1)
        with pytest.raises(ValueError):
            PsoConfig(bounds=((2.0, 1.0),))


@pytest.fixture(scope="module")
def divider_netlist():
    # purely resistive divider: v(1) settles at i*r, margins are analytic
    from fluxon.circuit import parse_netlist

    return parse_netlist(
        """
* current source into a resistor
i1 0 1 dc 1m
r1 1 0 1
.tran 0.1 2
.print v(1)
"""
    )


def v_end_at_least(threshold):
    def pass_test(traces):
        return float(traces.node_voltage["1"][-1]) >= threshold

    return pass_test


class TestMarginObjective:
    def test_nominal_failure_penalty(self, divider_netlist):
        obj = margin_objective(divider_netlist, ["r1.r"], v_end_at_least(2e-3))
        assert obj(np.array([1.0])) == NOMINAL_FAIL_PENALTY

    def test_score_is_negated_margin_sum(self, divider_netlist):
        # pass iff v >= 0.75 mV: resistance margin is -25% (low), +90% capped
        obj = margin_objective(divider_netlist, ["r1.r"], v_end_at_least(0.75e-3), resolution=0.01)
        score = obj(np.array([1.0]))
        assert score == pytest.approx(-(0.25), abs=0.02)

    def test_irrelevant_bounds_leave_score_unchanged(self, divider_netlist):
        obj = margin_objective(divider_netlist, ["r1.r"], v_end_at_least(0.75e-3), resolution=0.05)
        s1 = obj(np.array([1.0]))
        s2 = obj(np.array([1.0]))  # bounds live in PsoConfig, not the objective
        assert s1 == s2

    def test_bad_selector(self, divider_netlist):
        with pytest.raises(KeyError):
            margin_objective(divider_netlist, ["r9.r"], v_end_at_least(0.0))
