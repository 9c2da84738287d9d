import math

import numpy as np
import pytest

from fluxon.circuit import CircuitError, parse_netlist, run_transient
from fluxon.core import PHI0


class TestJunctionStatics:
    def test_subcritical_phase_settles(self):
        nl = parse_netlist("b1 1 0 ic=100u\ni1 0 1 dc 50u\n.tran 0.05 200")
        tr = run_transient(nl)
        assert tr.junction_phase["b1"][-1] == pytest.approx(math.asin(0.5), abs=1e-3)
        assert abs(tr.junction_voltage["b1"][-1]) < 1e-9

    def test_overdriven_matches_rk_oracle(self):
        # independent adaptive integrator of the single-junction ODE
        from scipy.integrate import solve_ivp

        ic, rn = 100e-6, 2.5
        cap = PHI0 / (2 * math.pi * ic * rn * rn)  # beta_c = 1
        drive = 150e-6

        def rhs(t, y):
            phi, v = y
            return [2 * math.pi / PHI0 * v, (drive - ic * math.sin(phi) - v / rn) / cap]

        sol = solve_ivp(rhs, (0.0, 500e-12), [0.0, 0.0], rtol=1e-10, atol=1e-14,
                        dense_output=True)
        ts = np.linspace(250e-12, 500e-12, 20000)
        v_oracle = float(np.mean(sol.sol(ts)[1]))

        nl = parse_netlist("b1 1 0 ic=100u\ni1 0 1 dc 150u\n.tran 0.02 500")
        tr = run_transient(nl, step=0.02)
        sel = tr.time_ps >= 250.0
        v_sim = float(np.mean(tr.junction_voltage["b1"][sel]))
        assert v_sim == pytest.approx(v_oracle, rel=0.01)

    def test_overdamped_matches_analytic_dc_branch(self):
        # strongly overdamped junction: mean V = Ic Rn sqrt((I/Ic)^2 - 1)
        nl = parse_netlist("b1 1 0 ic=100u rn=2.5 cap=1e-18\ni1 0 1 dc 150u\n.tran 0.01 400")
        tr = run_transient(nl, step=0.01)
        v = tr.junction_voltage["b1"]
        v_mean = float(np.mean(v[len(v) // 2 :]))
        analytic = 100e-6 * 2.5 * math.sqrt(1.5**2 - 1.0)
        assert v_mean == pytest.approx(analytic, rel=0.05)


class TestPassiveNetworks:
    def test_rl_decay(self):
        nl = parse_netlist("l1 1 0 10p ic=1m\nr1 1 0 1\n.tran 0.05 50")
        tr = run_transient(nl)
        ref = 1e-3 * np.exp(-tr.time_ps / 10.0)
        err = np.max(np.abs(tr.inductor_current["l1"] - ref)) / 1e-3
        assert err < 0.01

    def test_rl_step_response(self):
        # series R-L driven by a dc voltage: i = (V/R)(1 - exp(-tR/L))
        nl = parse_netlist("v1 1 0 dc 1m\nr1 1 2 2\nl1 2 0 10p\n.tran 0.05 40")
        tr = run_transient(nl)
        ref = 0.5e-3 * (1.0 - np.exp(-tr.time_ps * 2.0 / 10.0))
        err = np.max(np.abs(tr.inductor_current["l1"] - ref)) / 0.5e-3
        assert err < 0.01

    def test_rc_charging_via_junction_capacitance(self):
        # junction reduced to its capacitor (negligible ic, huge rn)
        nl = parse_netlist(
            "v1 1 0 dc 1m\nr1 1 2 2\nb1 2 0 ic=1e-9 rn=1e9 cap=0.5p\n.tran 0.05 10"
        )
        tr = run_transient(nl)
        ref = 1e-3 * (1.0 - np.exp(-tr.time_ps / 1.0))  # tau = RC = 1 ps
        err = np.max(np.abs(tr.node_voltage["2"] - ref)) / 1e-3
        assert err < 0.01

    def test_resistive_divider_dc(self):
        nl = parse_netlist("i1 0 1 dc 1m\nr1 1 0 1\nr2 1 0 1\n.tran 0.1 1")
        tr = run_transient(nl)
        assert tr.node_voltage["1"][-1] == pytest.approx(0.5e-3, rel=1e-9)


class TestSolverContract:
    def test_determinism_bit_identical(self):
        nl = parse_netlist("b1 1 0 ic=100u\ni1 0 1 dc 150u\n.tran 0.05 100")
        a = run_transient(nl)
        b = run_transient(nl)
        assert np.array_equal(a.junction_phase["b1"], b.junction_phase["b1"])
        assert np.array_equal(a.junction_voltage["b1"], b.junction_voltage["b1"])

    def test_step_limit(self):
        nl = parse_netlist("r1 1 0 1\ni1 0 1 dc 1m\n.tran 0.5 10")
        with pytest.raises(CircuitError):
            run_transient(nl)

    def test_missing_stop(self):
        nl = parse_netlist("r1 1 0 1")
        with pytest.raises(CircuitError):
            run_transient(nl)

    def test_empty_netlist(self):
        with pytest.raises(CircuitError):
            run_transient(parse_netlist(""), stop=10.0, step=0.05)

    def test_singular_system(self):
        # inductor loop with a current source in series: no DC path for KCL
        nl = parse_netlist("v1 1 0 dc 1m\nv2 1 0 dc 2m\n.tran 0.1 1")
        with pytest.raises(CircuitError):
            run_transient(nl)

    def test_requested_node_traces(self):
        nl = parse_netlist("r1 1 2 1\nr2 2 0 1\ni1 0 1 dc 1m\n.tran 0.1 1\n.print v(2)")
        tr = run_transient(nl)
        assert set(tr.node_voltage) == {"2"}
        with pytest.raises(CircuitError):
            run_transient(parse_netlist("r1 1 0 1\ni1 0 1 dc 1m\n.tran 0.1 1\n.print v(9)"))

    def test_phase_continuity(self):
        nl = parse_netlist("b1 1 0 ic=100u\ni1 0 1 dc 150u\n.tran 0.05 200")
        tr = run_transient(nl)
        assert np.max(np.abs(np.diff(tr.junction_phase["b1"]))) < math.pi
