"""Parameter margin scans: how far a device value can move before a
functional test breaks.

The scan searches the largest fractional deviations low/high such that
pass_test still holds at nominal*(1-low) and nominal*(1+high),
bisecting each side separately down to `resolution` and capping the
search at +-`bound` (90% by default).
"""

from __future__ import annotations

from typing import Callable

from .netlist import Netlist
from .transient import TraceSet, run_transient


class MarginError(ValueError):
    pass


def margin_scan(
    netlist: Netlist,
    param: str,
    pass_test: Callable[[TraceSet], bool],
    *,
    resolution: float = 0.01,
    bound: float = 0.9,
    step: float | None = None,
) -> tuple[float, float]:
    """Fractional (low, high) margins of `param` ('name.field') under pass_test."""
    _, _, nominal = netlist.resolve_selector(param)

    def passes(fraction: float) -> bool:
        nl = netlist.with_param(param, nominal * (1.0 + fraction))
        return bool(pass_test(run_transient(nl, step=step)))

    if not passes(0.0):
        raise MarginError(f"nominal fails: pass_test is false at {param} = {nominal}")

    def search(sign: float) -> float:
        if passes(sign * bound):
            return bound
        lo, hi = 0.0, bound  # lo passes, hi fails
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if passes(sign * mid):
                lo = mid
            else:
                hi = mid
        return lo

    return search(-1.0), search(+1.0)
