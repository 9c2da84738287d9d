import pytest

from fluxon.circuit import MarginError, margin_scan, parse_netlist, run_transient

DIVIDER = """
* current source into a resistor: v(1) = i * r
i1 0 1 dc 1m
r1 1 0 1
.tran 0.1 2
.print v(1)
"""


def v_at_least(threshold):
    def pass_test(traces):
        return float(traces.node_voltage["1"][-1]) >= threshold

    return pass_test


@pytest.fixture(scope="module")
def divider():
    return parse_netlist(DIVIDER)


def test_trivially_true_hits_search_bound(divider):
    low, high = margin_scan(divider, "r1.r", lambda tr: True)
    assert low == 0.9 and high == 0.9


def test_nominal_failure_raises(divider):
    with pytest.raises(MarginError, match="nominal fails"):
        margin_scan(divider, "r1.r", v_at_least(2e-3))


def test_analytic_one_sided_margin(divider):
    # pass iff r >= 0.75: low margin 25%, high side saturates at the bound
    low, high = margin_scan(divider, "r1.r", v_at_least(0.75e-3), resolution=0.01)
    assert low == pytest.approx(0.25, abs=0.011)
    assert high == 0.9


def test_bisection_matches_exhaustive_sweep(divider):
    # oracle: walk outward in 1% steps until pass_test flips
    pass_test = v_at_least(0.62e-3)

    def sweep(sign):
        frac = 0.0
        while frac + 0.01 <= 0.9:
            nl = divider.with_param("r1.r", 1.0 * (1.0 + sign * (frac + 0.01)))
            if not pass_test(run_transient(nl)):
                return frac
            frac += 0.01
        return 0.9

    low, high = margin_scan(divider, "r1.r", pass_test, resolution=0.01)
    assert abs(low - sweep(-1.0)) <= 0.011
    assert abs(high - sweep(+1.0)) <= 0.011


def test_unknown_selector(divider):
    with pytest.raises(KeyError):
        margin_scan(divider, "r9.r", lambda tr: True)
