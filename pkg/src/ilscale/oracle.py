"""Arbitrary-precision ground truth and IEEE float reference evaluators.

Everything here uses unbounded Python integers, so it
can serve as the reference side of differential tests against the W-bit
kernels. Nothing in this module imports the kernels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class OverflowMark(enum.Enum):
    """Stands in for a kernel result that overflowed; excluded from statistics."""

    OVERFLOW = "Overflow"

    def __repr__(self) -> str:
        return "OVERFLOW"


OVERFLOW = OverflowMark.OVERFLOW
ErrorValue = Union[int, OverflowMark]


class NonFiniteError(ArithmeticError):
    """A floating-point reference evaluation produced inf or NaN."""


@dataclass(frozen=True)
class BigNearest:
    j: int
    delta: int
    tie: bool


class FloatPrecision(enum.Enum):
    BINARY32 = "binary32"
    BINARY64 = "binary64"

    @property
    def dtype(self) -> type[np.floating]:
        return np.float32 if self is FloatPrecision.BINARY32 else np.float64


def _require_problem(i: int, D: int, A: int) -> None:
    for name, v in (("i", i), ("D", D), ("A", A)):
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
            raise TypeError(f"{name} must be an integer, got {type(v).__name__}")
    if i < 0 or D < 0:
        raise ValueError("i and D must be non-negative")
    if A < 1:
        raise ValueError("A must be positive")


def exact_nearest_half_up(i: int, D: int, A: int) -> BigNearest:
    """Round-half-up nearest integer to ``i*D/A`` and its residual ``j*A - i*D``."""
    _require_problem(i, D, A)
    i, D, A = int(i), int(D), int(A)
    prod = i * D
    j = (2 * prod + A) // (2 * A)
    delta = j * A - prod
    return BigNearest(j, delta, 2 * abs(delta) == A)


def normalize_half_up(j: int, delta: int, A: int) -> tuple[int, int]:
    """Map a tie resolved downward (``2*delta == -A``) onto the half-up solution.

    Direct search may land on either neighbour of an exact half; callers that
    need the canonical half-up answer pass the kernel result through here.
    """
    if 2 * delta == -A:
        return j + 1, delta + A
    return j, delta


def brute_force_nearest(i: int, D: int, A: int, bound: int | None = None) -> frozenset[int]:
    """Every ``k`` in ``[0, bound]`` minimising ``|k*A - i*D|``.

    ``bound`` defaults to the smallest value that is guaranteed to bracket
    the true minimiser, ``ceil(i*D/A) + 1``.
    """
    _require_problem(i, D, A)
    prod = int(i) * int(D)
    need = -(-prod // A) + 1
    if bound is None:
        bound = need
    if bound < need:
        raise ValueError(f"bound {bound} does not cover ceil(iD/A)+1 = {need}")
    # numpy only pays off for long scans
    if bound > 512 and prod < 2**62 and bound * A < 2**62:
        k = np.arange(bound + 1, dtype=np.int64)
        err = np.abs(k * A - prod)
        best = err.min()
        return frozenset(int(x) for x in np.flatnonzero(err == best))
    errs = [abs(k * A - prod) for k in range(bound + 1)]
    best = min(errs)
    return frozenset(k for k, e in enumerate(errs) if e == best)


def _floor_half_up(r: float) -> int:
    # exact: r - floor(r) is representable for any finite binary float
    f = math.floor(r)
    return int(f) + (1 if r - f >= 0.5 else 0)


def fp_reference(prec: FloatPrecision, i: int, D: int, A: int) -> int:
    """``floor(i * (D / A) + 0.5)`` with the product and quotient in ``prec``.

    Only the division and the multiplication round in the target format; the
    half-add and floor are exact.
    """
    dt = prec.dtype
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        r = dt(i) * (dt(D) / dt(A))
    if not np.isfinite(r):
        raise NonFiniteError(f"{prec.value} evaluation of {i}*({D}/{A}) is {r}")
    return _floor_half_up(float(r))


def fp_reference_many(prec: FloatPrecision, i: int, D: int, A: np.ndarray) -> np.ndarray:
    """Vectorised :func:`fp_reference` over an array of ``A`` values.

    Returns an ``int64`` array when every result fits, else an object array.
    """
    dt = prec.dtype
    A = np.asarray(A)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        r = dt(i) * (dt(D) / A.astype(dt))
    if not np.all(np.isfinite(r)):
        raise NonFiniteError(f"{prec.value} evaluation of {i}*({D}/A) is not finite")
    r = r.astype(np.float64)  # exact widening
    f = np.floor(r)
    bump = (r - f) >= 0.5
    if np.all(np.abs(f) < 2.0**62):
        return f.astype(np.int64) + bump
    return np.array([int(x) + int(b) for x, b in zip(f.tolist(), bump.tolist())], dtype=object)


def exact_nearest_many(i: int, D: int, A: np.ndarray) -> np.ndarray:
    """Vectorised half-up oracle ``j`` over an array of ``A`` values."""
    A = np.asarray(A)
    prod = int(i) * int(D)
    if 2 * prod + int(A.max(initial=1)) < 2**63 and A.size and int(A.min()) >= 1:
        a = A.astype(np.int64)
        return (np.int64(2 * prod) + a) // (2 * a)
    return np.array([(2 * prod + a) // (2 * a) for a in A.tolist()], dtype=object)


def compensation_error(result: ErrorValue, i: int, D: int, A: int) -> ErrorValue:
    """Signed error of ``result`` against the exact half-up answer.

    An :data:`OVERFLOW` result passes straight through so it can be tallied
    apart from numeric errors.
    """
    if result is OVERFLOW:
        return OVERFLOW
    return int(result) - exact_nearest_half_up(i, D, A).j
