"""Pre-flight non-overflow predicates for each kernel.

Conditions are evaluated with unbounded integers, so checking can never
overflow itself. Each report lists the violated conditions by the same names
the kernels use in :class:`~ilscale.lane.LaneOverflow`, and a satisfied report
guarantees the matching kernel returns a value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ilscale import core
from ilscale.core import Algorithm, ScaleProblem
from ilscale.decomposition import ChunkPlan, plan_chunks
from ilscale.lane import Width

ADDS_CHUNK = "(κ_n−i_n)A + i_n(A−D) ± A/2 bound"


@dataclass(frozen=True)
class GuardReport:
    algorithm: Algorithm
    violated_conditions: tuple[str, ...] = field(default=())

    @property
    def satisfied(self) -> bool:
        return not self.violated_conditions

    def __bool__(self) -> bool:
        return self.satisfied


class _Collector:
    def __init__(self, w: Width):
        self.w = w
        self.lo, self.hi = w.min, w.max
        self.violated: list[str] = []

    def need(self, ok: bool, name: str) -> None:
        if not ok and name not in self.violated:
            self.violated.append(name)

    def fits(self, x: int, name: str) -> None:
        if not self.lo <= x <= self.hi and name not in self.violated:
            self.violated.append(name)


def _half_up(i: int, D: int, A: int) -> int:
    return (2 * i * D + A) // (2 * A)


def _common(c: _Collector, i: int, D: int, A: int, output: int) -> None:
    c.fits(i, core.I_BOUND)
    c.fits(D, core.D_BOUND)
    c.fits(A, core.A_BOUND)
    c.fits(output, core.OUTPUT_BOUND)


def check_rounded_div(p: ScaleProblem, w: Width = Width.W64) -> GuardReport:
    i, D, A = p
    c = _Collector(w)
    _common(c, i, D, A, _half_up(i, D, A))
    c.fits(i * D, core.DIV_PRODUCT)
    c.fits(i * D + A // 2, core.DIV_SUM)
    return GuardReport(Algorithm.ROUNDED_DIV, tuple(c.violated))


def check_mdid(p: ScaleProblem, w: Width = Width.W64) -> GuardReport:
    i, D, A = p
    c = _Collector(w)
    _common(c, i, D, A, _half_up(i, D, A))
    if i < A and D < A:
        c.fits(i * D, core.MDID_REDUCED)
    else:
        c.fits((i // A) * D, core.MDID_QUOTIENT)
        c.fits((i % A) * D + A // 2, core.MDID_REMAINDER)
    return GuardReport(Algorithm.MDID, tuple(c.violated))


def _ds_conditions(c: _Collector, i: int, D: int, A: int, kappa: int, carry: int, init_name: str) -> None:
    """Record every direct-search intermediate that would leave the lane."""
    c.need(0 <= kappa <= c.hi, core.DS_KAPPA)
    c.fits(carry, core.DS_CARRY)
    t1 = (kappa - i) * A
    t2 = i * (A - D)
    c.fits(t1, core.DS_KAPPA_TERM)
    c.fits(t2, core.DS_SKEW_TERM)
    c.fits(t1 + t2, core.DS_PARTIAL)
    d0 = t1 + t2 + carry
    c.fits(d0, init_name)
    if d0 == 0:
        return
    q = abs(d0) // A
    k1 = kappa - q if d0 > 0 else kappa + q
    c.fits(k1, core.DS_K1)
    r = abs(d0) % A
    if d0 > 0 and A - r < r:
        c.fits(k1 - 1, core.DS_STEP)
    elif d0 < 0 and A - r < r:
        c.fits(k1 + 1, core.DS_STEP)


def check_ds(
    p: ScaleProblem, kappa: int | None = None, carry: int = 0, w: Width = Width.W64
) -> GuardReport:
    """Exact check for one direct-search call.

    Besides the initialisation bound, reports the ``k1`` update separately
    under :data:`ilscale.core.DS_K1`.
    """
    i, D, A = p
    kappa = i if kappa is None else kappa
    c = _Collector(w)
    _common(c, i, D, A, _half_up(i, D, A))
    _ds_conditions(c, i, D, A, kappa, carry, core.DS_INIT)
    return GuardReport(Algorithm.DS, tuple(c.violated))


def check_adds(plan: ChunkPlan, D: int, A: int, w: Width | None = None) -> GuardReport:
    """Per-chunk check with the worst-case carry ``±ceil(A/2)``.

    Every direct-search intermediate is monotone in the carry, so checking the
    two extreme carries covers every carry the chain can actually produce.
    """
    w = plan.width if w is None else w
    c = _Collector(w)
    # the total i may exceed the lane; only the chunks have to fit
    c.fits(D, core.D_BOUND)
    c.fits(A, core.A_BOUND)
    # prefix sums of j_n never exceed the final half-up answer, so this also
    # covers the running total
    c.fits(_half_up(plan.total, D, A), core.OUTPUT_BOUND)
    margin = (A + 1) // 2
    # equal-size plans repeat chunks; each distinct one needs checking once
    for i_n, kappa in dict.fromkeys(zip(plan.chunks, plan.kappas())):
        c.fits(i_n, core.I_BOUND)
        base = (kappa - i_n) * A + i_n * (A - D)
        c.need(w.min + margin <= base <= w.max - margin, ADDS_CHUNK)
        for carry in (-margin, margin):
            _ds_conditions(c, i_n, D, A, kappa, carry, ADDS_CHUNK)
    return GuardReport(Algorithm.ADDS, tuple(c.violated))


def check(
    algo: Algorithm,
    p: ScaleProblem,
    w: Width = Width.W64,
    *,
    kappa: int | None = None,
    plan: ChunkPlan | None = None,
) -> GuardReport:
    if algo is Algorithm.ROUNDED_DIV:
        return check_rounded_div(p, w)
    if algo is Algorithm.MDID:
        return check_mdid(p, w)
    if algo is Algorithm.DS:
        return check_ds(p, kappa, 0, w)
    if plan is None:
        plan = plan_chunks(p.i, p.D, p.A, w)
    return check_adds(plan, p.D, p.A, w)
