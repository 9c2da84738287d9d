import io

import pytest
from hypothesis import given, strategies as st

from fluxon.core import (
    DUP_TOL_PS,
    PHI0,
    PulseEvent,
    SpikeTrain,
    merge_trains,
    read_event_log,
    write_event_log,
)


def test_flux_quantum_constant_exact():
    assert PHI0 == 2.068e-15


def test_pulse_event_rejects_negative_time():
    with pytest.raises(ValueError):
        PulseEvent(-1.0, "n")


def test_spike_train_sorts_and_collapses():
    tr = SpikeTrain("n", (40.0, 0.0, 0.0 + 0.5 * DUP_TOL_PS, 20.0))
    assert tr.times == (0.0, 20.0, 40.0)


def test_merge_simple():
    a = SpikeTrain("d", (0.0, 40.0))
    b = SpikeTrain("d", (20.0,))
    assert merge_trains([a, b]).times == (0.0, 20.0, 40.0)


def test_merge_empty():
    assert merge_trains([SpikeTrain("d"), SpikeTrain("d")]).times == ()
    assert merge_trains([]).times == ()


def test_merge_many_against_sort_oracle():
    import numpy as np

    rng = np.random.default_rng(42)
    trains = [SpikeTrain("d", tuple(rng.uniform(0, 1e5, 100))) for _ in range(3)]
    merged = merge_trains(trains)
    oracle = sorted(t for tr in trains for t in tr.times)
    assert list(merged.times) == oracle
    assert len(merged) == 300


times_strategy = st.lists(
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False), max_size=30
)


@given(times_strategy, times_strategy, times_strategy)
def test_merge_associative_commutative(ta, tb, tc):
    a, b, c = (SpikeTrain("d", tuple(t)) for t in (ta, tb, tc))
    left = merge_trains([merge_trains([a, b]), c], node="d")
    right = merge_trains([a, merge_trains([b, c], node="d")], node="d")
    swapped = merge_trains([c, b, a], node="d")
    assert left.times == right.times
    # commutative up to event ordering; duplicate collapse may keep a
    # different representative but never a different count
    assert len(swapped) == len(left)
    assert all(abs(x - y) < 2 * DUP_TOL_PS for x, y in zip(swapped.times, left.times))


@given(times_strategy, st.floats(min_value=0.0, max_value=1e3, allow_nan=False))
def test_no_negative_timestamps(ts, delay):
    tr = SpikeTrain("n", tuple(ts)).shifted(delay)
    assert all(t >= 0.0 for t in tr.times)


def test_event_log_roundtrip():
    events = [PulseEvent(3.25, "a/1"), PulseEvent(1.5, "b"), PulseEvent(1.5, "a/0")]
    buf = io.StringIO()
    write_event_log(buf, events)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time_ps,node"
    back = read_event_log(io.StringIO(buf.getvalue()))
    assert [e.time for e in back] == [1.5, 1.5, 3.25]
    assert back[0].node == "a/0"  # ties break by node name


def test_event_log_bad_header():
    with pytest.raises(ValueError):
        read_event_log(io.StringIO("t,who\n1,a\n"))
