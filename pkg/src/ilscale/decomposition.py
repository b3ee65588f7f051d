"""Additive decomposition of direct search.

A large ``i`` is split into chunks ``i_1 + ... + i_N``; each chunk is solved
with :func:`~ilscale.core.direct_search`, seeded with the exact residual left
by the previous chunk. Because that residual carries the rounding error
forward, the summed answer is a nearest solution for the full ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ilscale import lane
from ilscale.core import NearestSolution, ScaleProblem, direct_search
from ilscale.lane import LaneOverflow, Width

ADDS_ACCUMULATE = "Σ j_n accumulation"


class UnsatisfiableError(ValueError):
    """No chunk size keeps the per-chunk initialisation inside the lane."""


@dataclass(frozen=True)
class ChunkPlan:
    """Ordered chunks ``i_n`` of ``i`` for one lane width.

    Every chunk uses the initial guess ``kappa_n = i_n``.
    """

    chunks: tuple[int, ...]
    width: Width = Width.W64

    def __post_init__(self) -> None:
        object.__setattr__(self, "chunks", tuple(int(c) for c in self.chunks))
        if not self.chunks:
            raise ValueError("a plan needs at least one chunk")
        if any(c < 0 for c in self.chunks):
            raise ValueError("chunks must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.chunks)

    @property
    def n(self) -> int:
        return len(self.chunks)

    def kappas(self) -> tuple[int, ...]:
        return self.chunks

    @classmethod
    def equal(cls, i: int, n: int, width: Width = Width.W64) -> ChunkPlan:
        """``n`` chunks of size ``ceil(i/n)``, the last one absorbing the shortfall.

        With ``n`` larger than ``i`` the trailing chunks are zero.
        """
        if n < 1:
            raise ValueError("n must be at least 1")
        size = -(-i // n)
        chunks = []
        left = i
        for _ in range(n):
            c = min(size, left)
            chunks.append(c)
            left -= c
        return cls(tuple(chunks), width)


@dataclass(frozen=True)
class CarrySolution:
    j: int
    delta: int
    per_chunk: tuple[tuple[int, int], ...] = field(default=(), compare=False)


def chunk_cap(D: int, A: int, w: Width) -> int | None:
    """Largest chunk size keeping ``|i_n (A-D)| + ceil(A/2)`` inside the lane.

    ``None`` means unbounded (``A == D``).
    """
    if A == D:
        return None
    return (w.max - (A + 1) // 2) // abs(A - D)


def plan_chunks(i: int, D: int, A: int, w: Width = Width.W64) -> ChunkPlan:
    """Fewest equal-size chunks satisfying the per-chunk non-overflow condition."""
    if i < 0 or D < 0 or A < 1:
        raise ValueError("need i, D >= 0 and A >= 1")
    for name, v in (("i", i), ("D", D), ("A", A)):
        if v > w.max:
            raise LaneOverflow(f"{name} bound", v, w)
    cap = chunk_cap(D, A, w)
    if cap is None or i == 0:
        return ChunkPlan((i,), w)
    if cap < 1:
        raise UnsatisfiableError(
            f"|A-D| = {abs(A - D)} too large for any chunk at int{w.value}"
        )
    n = -(-i // cap)
    chunks = [cap] * (n - 1) + [i - cap * (n - 1)]
    return ChunkPlan(tuple(chunks), w)


def _run(plan: ChunkPlan, D: int, A: int, w: Width | None, keep_carry: bool, trace: bool) -> CarrySolution:
    w = plan.width if w is None else w
    total_j = 0
    carry = 0
    steps = []
    for n, (i_n, kappa) in enumerate(zip(plan.chunks, plan.kappas())):
        try:
            sol: NearestSolution = direct_search(
                ScaleProblem(i_n, D, A), kappa, carry if keep_carry else 0, w
            )
            total_j = lane.add(total_j, sol.j, w, ADDS_ACCUMULATE)
        except LaneOverflow as exc:
            raise LaneOverflow(exc.condition, exc.value, exc.width, chunk=n) from exc
        carry = sol.delta
        if trace:
            steps.append((sol.j, sol.delta))
    return CarrySolution(total_j, carry, tuple(steps))


def additive_direct_search(
    plan: ChunkPlan, D: int, A: int, w: Width | None = None, *, trace: bool = False
) -> CarrySolution:
    """Chain direct search over the plan's chunks, carrying each exact residual.

    Returns ``j = sum(j_n)`` and the final residual ``j*A - i*D``. Overflow
    errors carry the index of the failing chunk in ``.chunk``.
    """
    return _run(plan, D, A, w, keep_carry=True, trace=trace)


def additive_zeroed(
    plan: ChunkPlan, D: int, A: int, w: Width | None = None, *, trace: bool = False
) -> CarrySolution:
    """Diagnostic variant that drops the carry before every chunk.

    Each chunk rounds independently, so the sum drifts from the true nearest
    integer by up to ``N/2``. ``delta`` is the last chunk's own residual.
    """
    return _run(plan, D, A, w, keep_carry=False, trace=trace)
