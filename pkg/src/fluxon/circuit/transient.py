"""Fixed-step transient solver for small superconducting netlists.

Modified nodal analysis over the node voltages plus one branch current
per inductor and per voltage source. Josephson junctions follow the
RCSJ model

    I = Ic sin(phi) + V/Rn + C dV/dt,   V = (PHI0 / 2 pi) dphi/dt

integrated with the trapezoidal rule; the first step uses backward
Euler, which needs no derivative history and so honors inductor
initial currents cleanly. The sin(phi) term is handled by Newton
iteration with companion conductance Ic cos(phi) dphi/dV folded into
the nodal matrix. Assembly order is fixed by netlist order and the
arithmetic is pure float64, so identical inputs give bit-identical
traces.

Because the junction phase update is the trapezoidal rule applied to
dphi/dt = (2 pi / PHI0) V, trapezoid-rule quadrature of a junction's
voltage trace equals (PHI0 / 2 pi) * (phase advance) exactly; detected
pulses therefore integrate to one flux quantum up to window clipping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import PHI0
from .netlist import (
    CurrentSource,
    Inductor,
    Junction,
    Mutual,
    Netlist,
    Resistor,
    VoltageSource,
)

DEFAULT_STEP_PS = 0.05
MAX_STEP_PS = 0.1
NEWTON_MAX_ITER = 50
NEWTON_RTOL = 1e-9
_TWO_PI = 2.0 * math.pi


class CircuitError(RuntimeError):
    pass


class NewtonError(CircuitError):
    def __init__(self, time_ps: float):
        super().__init__(
            f"Newton iteration failed to converge within {NEWTON_MAX_ITER} "
            f"iterations at t = {time_ps:.4f} ps"
        )
        self.time_ps = time_ps


@dataclass
class TraceSet:
    """Uniform-grid transient results.

    node_voltage holds the requested nodes (all nodes when the netlist
    carries no print requests); junction phases/voltages and inductor
    currents are always recorded in full.
    """

    time_ps: np.ndarray
    node_voltage: dict[str, np.ndarray]
    junction_phase: dict[str, np.ndarray]
    junction_voltage: dict[str, np.ndarray]
    inductor_current: dict[str, np.ndarray]
    step_ps: float = 0.0


def run_transient(
    netlist: Netlist,
    stop: float | None = None,
    step: float | None = None,
) -> TraceSet:
    """Simulate [0, stop] ps on a uniform grid of `step` ps.

    Arguments default to the netlist's .tran directive, then to a
    0.05 ps step. Steps above 0.1 ps are rejected: the junction
    switching waveforms need the resolution.
    """
    step = step if step is not None else (netlist.tran_step or DEFAULT_STEP_PS)
    stop = stop if stop is not None else netlist.tran_stop
    if stop is None:
        raise CircuitError("no stop time: pass stop= or add a .tran directive")
    if not 0.0 < step <= MAX_STEP_PS:
        raise CircuitError(f"step must lie in (0, {MAX_STEP_PS}] ps, got {step}")
    if not netlist.devices:
        raise CircuitError("empty netlist")

    h = step * 1e-12  # SI seconds
    n_steps = int(round(stop / step))

    nodes = netlist.nodes
    node_ix = {n: i for i, n in enumerate(nodes)}
    node_ix["0"] = -1
    n_nodes = len(nodes)

    inductors = [d for d in netlist.devices if isinstance(d, Inductor)]
    vsources = [d for d in netlist.devices if isinstance(d, VoltageSource)]
    isources = [d for d in netlist.devices if isinstance(d, CurrentSource)]
    junctions = [d for d in netlist.devices if isinstance(d, Junction)]
    resistors = [d for d in netlist.devices if isinstance(d, Resistor)]
    mutuals = [d for d in netlist.devices if isinstance(d, Mutual)]

    n_branch = len(inductors) + len(vsources)
    dim = n_nodes + n_branch
    lbr = {d.name: i for i, d in enumerate(inductors)}

    # Junction arrays.
    j_a = np.array([node_ix[d.np_] for d in junctions], dtype=int)
    j_b = np.array([node_ix[d.nm] for d in junctions], dtype=int)
    j_ic = np.array([d.ic for d in junctions])
    j_gs = np.array([1.0 / d.rn for d in junctions])
    j_c = np.array([d.cap for d in junctions])

    def base_matrix(fac: float) -> np.ndarray:
        """Linear stamps for a step factor fac = 1/h (BE) or 2/h (TR)."""
        A = np.zeros((dim, dim))
        for r in resistors:
            _stamp_g(A, node_ix[r.np_], node_ix[r.nm], 1.0 / r.r)
        for g, a, b in zip(j_gs + j_c * fac, j_a, j_b):
            _stamp_g(A, a, b, g)
        for i, L in enumerate(inductors):
            br = n_nodes + i
            a, b = node_ix[L.np_], node_ix[L.nm]
            _stamp_branch(A, a, b, br)
            A[br, br] = -fac * L.l
        for m in mutuals:
            b1 = n_nodes + lbr[m.l1]
            b2 = n_nodes + lbr[m.l2]
            A[b1, b2] += -fac * m.m
            A[b2, b1] += -fac * m.m
        for i, V in enumerate(vsources):
            br = n_nodes + len(inductors) + i
            _stamp_branch(A, node_ix[V.np_], node_ix[V.nm], br)
        return A

    A_be = base_matrix(1.0 / h)
    A_tr = base_matrix(2.0 / h)

    # Flat index arrays for vectorized junction stamping.
    j_stamp_idx: list[np.ndarray] = []
    j_stamp_sign: list[np.ndarray] = []
    j_node_idx: list[np.ndarray] = []
    j_node_sign: list[np.ndarray] = []
    for a, b in zip(j_a, j_b):
        idx, sgn, nix, nsn = [], [], [], []
        if a >= 0:
            idx.append(a * dim + a); sgn.append(1.0)
            nix.append(a); nsn.append(-1.0)
        if b >= 0:
            idx.append(b * dim + b); sgn.append(1.0)
            nix.append(b); nsn.append(1.0)
        if a >= 0 and b >= 0:
            idx.extend([a * dim + b, b * dim + a]); sgn.extend([-1.0, -1.0])
        j_stamp_idx.append(np.asarray(idx, dtype=int))
        j_stamp_sign.append(np.asarray(sgn))
        j_node_idx.append(np.asarray(nix, dtype=int))
        j_node_sign.append(np.asarray(nsn))
    if junctions:
        jg_idx = np.concatenate(j_stamp_idx)
        jg_sign = np.concatenate(j_stamp_sign)
        jg_rep = np.repeat(np.arange(len(junctions)), [len(i) for i in j_stamp_idx])
        jr_idx = np.concatenate(j_node_idx)
        jr_sign = np.concatenate(j_node_sign)
        jr_rep = np.repeat(np.arange(len(junctions)), [len(i) for i in j_node_idx])
    # Mutual partners per inductor: (partner branch index, M).
    l_partners: list[list[tuple[int, float]]] = [[] for _ in inductors]
    for m in mutuals:
        l_partners[lbr[m.l1]].append((n_nodes + lbr[m.l2], m.m))
        l_partners[lbr[m.l2]].append((n_nodes + lbr[m.l1], m.m))

    # State.
    x = np.zeros(dim)                 # node voltages then branch currents
    x[n_nodes : n_nodes + len(inductors)] = [L.ic for L in inductors]
    phi = np.zeros(len(junctions))
    i_cap = np.zeros(len(junctions))  # capacitor branch current history
    v_jct = np.zeros(len(junctions))
    v_ind = np.zeros(len(inductors))  # inductor branch voltage history

    times = np.arange(n_steps + 1) * step
    want_nodes = [n for kind, n in netlist.prints if kind == "v"] or nodes
    for n in want_nodes:
        if n not in node_ix:
            raise CircuitError(f"print request for unknown node {n!r}")
    node_tr = {n: np.zeros(n_steps + 1) for n in want_nodes}
    phase_tr = {d.name: np.zeros(n_steps + 1) for d in junctions}
    vj_tr = {d.name: np.zeros(n_steps + 1) for d in junctions}
    il_tr = {d.name: np.zeros(n_steps + 1) for d in inductors}
    for name, i0 in ((L.name, L.ic) for L in inductors):
        il_tr[name][0] = i0

    def node_v(vec: np.ndarray, ix: int) -> float:
        return vec[ix] if ix >= 0 else 0.0

    jv = lambda vec: np.where(j_a >= 0, vec[j_a], 0.0) - np.where(j_b >= 0, vec[j_b], 0.0)

    for n in range(1, n_steps + 1):
        t_new = n * step
        first = n == 1
        fac = (1.0 / h) if first else (2.0 / h)
        A_base = A_be if first else A_tr
        # Phase update phi_new = phi_old + a_coef*V_new + b_coef*V_old.
        a_coef = (_TWO_PI / PHI0) * h if first else (math.pi / PHI0) * h
        b_coef = 0.0 if first else (math.pi / PHI0) * h

        rhs_base = np.zeros(dim)
        for s in isources:
            w = s.waveform(t_new)
            a, b = node_ix[s.np_], node_ix[s.nm]
            if a >= 0:
                rhs_base[a] -= w
            if b >= 0:
                rhs_base[b] += w
        for i, L in enumerate(inductors):
            br = n_nodes + i
            hist = -fac * L.l * x[br]
            for pbr, m_val in l_partners[i]:
                hist += -fac * m_val * x[pbr]
            if not first:
                hist -= v_ind[i]
            rhs_base[br] = hist
        for i, V in enumerate(vsources):
            rhs_base[n_nodes + len(inductors) + i] = V.waveform(t_new)
        # Junction capacitor history current.
        hist_c = -(fac * j_c) * v_jct - (0.0 if first else i_cap)

        x_new = x.copy()
        converged = False
        for _ in range(NEWTON_MAX_ITER):
            A = A_base.copy()
            rhs = rhs_base.copy()
            if junctions:
                v_new = jv(x_new)
                phi_new = phi + a_coef * v_new + b_coef * v_jct
                g_nl = j_ic * np.cos(phi_new) * a_coef
                i_fixed = j_ic * np.sin(phi_new) - g_nl * v_new + hist_c
                np.add.at(A.reshape(-1), jg_idx, jg_sign * g_nl[jg_rep])
                np.add.at(rhs, jr_idx, jr_sign * i_fixed[jr_rep])
            try:
                x_next = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError as exc:
                raise CircuitError(f"singular system matrix: {exc}") from None
            delta = float(np.max(np.abs(x_next - x_new)))
            x_new = x_next
            if delta <= NEWTON_RTOL * max(float(np.max(np.abs(x_new))), 1e-3):
                converged = True
                break
        if not converged:
            raise NewtonError(t_new)

        v_new = jv(x_new)
        phi = phi + a_coef * v_new + b_coef * v_jct
        i_cap = (fac * j_c) * v_new + hist_c
        v_jct = v_new
        for i, L in enumerate(inductors):
            v_ind[i] = node_v(x_new, node_ix[L.np_]) - node_v(x_new, node_ix[L.nm])
        x = x_new

        for name in want_nodes:
            node_tr[name][n] = node_v(x, node_ix[name])
        for k, d in enumerate(junctions):
            phase_tr[d.name][n] = phi[k]
            vj_tr[d.name][n] = v_jct[k]
        for i, L in enumerate(inductors):
            il_tr[L.name][n] = x[n_nodes + i]

    return TraceSet(
        time_ps=times,
        node_voltage=node_tr,
        junction_phase=phase_tr,
        junction_voltage=vj_tr,
        inductor_current=il_tr,
        step_ps=step,
    )


def _stamp_g(A: np.ndarray, a: int, b: int, g: float) -> None:
    if a >= 0:
        A[a, a] += g
    if b >= 0:
        A[b, b] += g
    if a >= 0 and b >= 0:
        A[a, b] -= g
        A[b, a] -= g


def _stamp_branch(A: np.ndarray, a: int, b: int, br: int) -> None:
    if a >= 0:
        A[a, br] += 1.0
        A[br, a] += 1.0
    if b >= 0:
        A[b, br] -= 1.0
        A[br, b] -= 1.0


def write_waveform_csv(fh, traces: TraceSet, netlist: Netlist) -> None:
    """Waveform CSV: time_ps then one column per print request."""
    cols: list[tuple[str, np.ndarray]] = []
    requests = netlist.prints or tuple(("v", n) for n in traces.node_voltage)
    for kind, name in requests:
        if kind == "v":
            cols.append((f"v({name})", traces.node_voltage[name]))
        else:
            cols.append((f"phi({name})", traces.junction_phase[name]))
    fh.write(",".join(["time_ps"] + [c[0] for c in cols]) + "\n")
    for i, t in enumerate(traces.time_ps):
        fh.write(",".join([repr(float(t))] + [repr(float(c[1][i])) for c in cols]) + "\n")
