"""Nearest-integer scaling kernels over a checked W-bit signed lane.

All three kernels compute an integer ``j`` nearest to ``i*D/A`` together with
the exact residual ``delta = j*A - i*D``, using only lane-sized integer
operations. Any intermediate that would leave the lane raises
:class:`~ilscale.lane.LaneOverflow` naming the failing condition.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ilscale import lane
from ilscale.lane import LaneOverflow, Width

# condition names, shared with ilscale.guard
I_BOUND = "i bound"
D_BOUND = "D bound"
A_BOUND = "A bound"
OUTPUT_BOUND = "output bound"

DIV_PRODUCT = "i·D product"
DIV_SUM = "i·D + ⌊A/2⌋ sum"

MDID_QUOTIENT = "⌊i/A⌋·D bound"
MDID_REMAINDER = "(i mod A)·D + ⌊A/2⌋ bound"
MDID_REDUCED = "iD bound (i<A, D<A case)"

DS_KAPPA = "κ bound"
DS_CARRY = "carry bound"
DS_KAPPA_TERM = "(κ−i)·A term"
DS_SKEW_TERM = "i·(A−D) term"
DS_PARTIAL = "(κ−i)A + i(A−D) partial sum"
DS_INIT = "(κ−i)A + i(A−D) + carry bound"
DS_K1 = "k1 update bound"
DS_STEP = "k1 ± 1 step bound"


class Algorithm(enum.Enum):
    ROUNDED_DIV = "div"
    MDID = "mdid"
    DS = "ds"
    ADDS = "adds"


@dataclass(frozen=True)
class ScaleProblem:
    """One scaling instance ``i * D / A`` with ``i, D >= 0`` and ``A >= 1``."""

    i: int
    D: int
    A: int

    def __post_init__(self) -> None:
        for name in ("i", "D", "A"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"{name} must be an int, got {type(v).__name__}")
        if self.i < 0 or self.D < 0:
            raise ValueError(f"i and D must be non-negative, got i={self.i} D={self.D}")
        if self.A < 1:
            raise ValueError(f"A must be positive, got {self.A}")

    def __iter__(self):
        return iter((self.i, self.D, self.A))


@dataclass(frozen=True)
class SignedScaleProblem:
    magnitude: ScaleProblem
    sign: int = 1

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        m = self.magnitude
        if self.sign == -1 and m.i * m.D == 0:
            raise ValueError("sign must be +1 when i*D == 0")

    @classmethod
    def from_signed(cls, i: int, D: int, A: int) -> SignedScaleProblem:
        """Split a general-sign ``i*D/A`` into magnitude and overall sign."""
        if A == 0:
            raise ValueError("A must be non-zero")
        sign = -1 if (i < 0) ^ (D < 0) ^ (A < 0) else 1
        if i == 0 or D == 0:
            sign = 1
        return cls(ScaleProblem(abs(i), abs(D), abs(A)), sign)


@dataclass(frozen=True)
class NearestSolution:
    """Nearest integer ``j`` and exact residual ``delta = j*A - i*D``."""

    j: int
    delta: int


def _check_inputs(i: int, D: int, A: int, w: Width) -> None:
    hi = w.max
    if i > hi:
        raise LaneOverflow(I_BOUND, i, w)
    if D > hi:
        raise LaneOverflow(D_BOUND, D, w)
    if A > hi:
        raise LaneOverflow(A_BOUND, A, w)


def round_half_up_div(p: ScaleProblem, w: Width = Width.W64) -> NearestSolution:
    """Plain rounded division ``(i*D + A//2) // A``, needing ``i*D`` in the lane."""
    i, D, A = p.i, p.D, p.A
    _check_inputs(i, D, A, w)
    prod = lane.mul(i, D, w, DIV_PRODUCT)
    num = lane.add(prod, A // 2, w, DIV_SUM)
    j, rem = divmod(num, A)
    # j*A - i*D == (num - rem) - (num - A//2), never leaves the lane
    return NearestSolution(j, A // 2 - rem)


def mdid(p: ScaleProblem, w: Width = Width.W64) -> NearestSolution:
    """Multiplicative decomposition: ``i = q*A + r`` so ``i*D/A = q*D + r*D/A``.

    The full product ``i*D`` is never formed unless both ``i`` and ``D`` are
    below ``A``, where the split degenerates to plain rounded division. That
    branch rounds via the remainder instead of adding ``A//2`` so that only the
    product itself has to fit.
    """
    i, D, A = p.i, p.D, p.A
    _check_inputs(i, D, A, w)
    half = A // 2
    if i < A and D < A:
        prod = lane.mul(i, D, w, MDID_REDUCED)
        j, rem = divmod(prod, A)
        if rem >= A - half:
            return NearestSolution(j + 1, A - rem)
        return NearestSolution(j, -rem)
    q, r = divmod(i, A)
    whole = lane.mul(q, D, w, MDID_QUOTIENT)
    t = lane.add(lane.mul(r, D, w, MDID_REMAINDER), half, w, MDID_REMAINDER)
    f, rem = divmod(t, A)
    j = lane.add(whole, f, w, OUTPUT_BOUND)
    # j*A - i*D == f*A - r*D == (t - rem) - (t - half)
    return NearestSolution(j, half - rem)


def direct_search(
    p: ScaleProblem,
    kappa: int | None = None,
    carry: int = 0,
    w: Width = Width.W64,
) -> NearestSolution:
    """Jump from the initial guess ``kappa`` to the minimiser of ``|k*A - i*D + carry|``.

    Returns ``j`` nearest to ``(i*D - carry)/A`` and ``delta = j*A - i*D + carry``.
    ``kappa`` defaults to ``i``, which zeroes the ``(kappa - i)*A`` term when
    ``D/A`` is close to one.

    At an exact half the result depends on which side ``kappa`` starts from:
    approached from above the upper neighbour is kept (``delta = +A/2``), from
    below the lower one (``delta = -A/2``). Both are nearest solutions; use
    :func:`ilscale.oracle.normalize_half_up` for a canonical answer.
    """
    i, D, A = p.i, p.D, p.A
    _check_inputs(i, D, A, w)
    if kappa is None:
        kappa = i
    lo, hi = w.min, w.max
    if not 0 <= kappa <= hi:
        raise LaneOverflow(DS_KAPPA, kappa, w)
    if not lo <= carry <= hi:
        raise LaneOverflow(DS_CARRY, carry, w)

    # fixed association: the non-overflow condition is stated on exactly this
    # sum. Checks are inlined; this is the hot loop of every decomposition.
    t1 = (kappa - i) * A
    if not lo <= t1 <= hi:
        raise LaneOverflow(DS_KAPPA_TERM, t1, w)
    t2 = i * (A - D)
    if not lo <= t2 <= hi:
        raise LaneOverflow(DS_SKEW_TERM, t2, w)
    t = t1 + t2
    if not lo <= t <= hi:
        raise LaneOverflow(DS_PARTIAL, t, w)
    d0 = t + carry
    if not lo <= d0 <= hi:
        raise LaneOverflow(DS_INIT, d0, w)

    if d0 == 0:
        return NearestSolution(kappa, 0)
    if d0 > 0:
        q, d1 = divmod(d0, A)
        k1 = kappa - q
        if k1 < lo:
            raise LaneOverflow(DS_K1, k1, w)
        # |d1 - A| < |d1| with 0 <= d1 < A
        if A - d1 < d1:
            if k1 - 1 < lo:
                raise LaneOverflow(DS_STEP, k1 - 1, w)
            return NearestSolution(k1 - 1, d1 - A)
        return NearestSolution(k1, d1)
    # quotient toward zero: d1 = -(|d0| mod A) lies in (-A, 0]
    q, d1 = lane.truncdiv(d0, A, w, DS_K1)
    k1 = kappa - q
    if k1 > hi:
        raise LaneOverflow(DS_K1, k1, w)
    # |d1 + A| < |d1| with -A < d1 <= 0
    if d1 + A < -d1:
        if k1 + 1 > hi:
            raise LaneOverflow(DS_STEP, k1 + 1, w)
        return NearestSolution(k1 + 1, d1 + A)
    return NearestSolution(k1, d1)


def solve_signed(
    p: SignedScaleProblem,
    algo: Algorithm = Algorithm.MDID,
    w: Width = Width.W64,
    kappa: int | None = None,
) -> NearestSolution:
    """Solve the magnitude problem, then apply the overall sign.

    On the signed axis this turns half-up into half-away-from-zero.
    """
    m = p.magnitude
    if algo is Algorithm.ROUNDED_DIV:
        sol = round_half_up_div(m, w)
    elif algo is Algorithm.MDID:
        sol = mdid(m, w)
    elif algo is Algorithm.DS:
        sol = direct_search(m, kappa, 0, w)
    else:
        raise ValueError(f"solve_signed does not support {algo}")
    if p.sign == 1:
        return sol
    j = lane.check(-sol.j, w, OUTPUT_BOUND)
    return NearestSolution(j, -sol.delta)
