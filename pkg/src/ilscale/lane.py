"""Checked arithmetic on a fixed-width signed integer lane.

Every helper computes the exact mathematical result and raises
:class:`LaneOverflow` if it is not representable in the lane, the same
contract as a hardware ``checked_*`` operation. Nothing ever wraps.
"""

from __future__ import annotations

import enum

_BOUNDS = {32: (-(1 << 31), (1 << 31) - 1), 64: (-(1 << 63), (1 << 63) - 1)}


class Width(enum.IntEnum):
    """Signed lane width in bits."""

    W32 = 32
    W64 = 64

    @property
    def max(self) -> int:
        return _BOUNDS[self][1]

    @property
    def min(self) -> int:
        return _BOUNDS[self][0]

    def fits(self, x: int) -> bool:
        lo, hi = _BOUNDS[self]
        return lo <= x <= hi

    @classmethod
    def parse(cls, value: int | str | Width) -> Width:
        if isinstance(value, Width):
            return value
        text = str(value).upper().lstrip("W")
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError(f"unsupported lane width: {value!r}") from None


class LaneOverflow(OverflowError):
    """An intermediate left the W-bit lane.

    ``condition`` names the violated non-overflow condition (or kernel step),
    ``value`` is the exact out-of-range result.
    """

    def __init__(self, condition: str, value: int, width: Width, chunk: int | None = None):
        self.condition = condition
        self.value = value
        self.width = width
        self.chunk = chunk
        where = f" in chunk {chunk}" if chunk is not None else ""
        super().__init__(
            f"{condition}: {value} outside int{width.value} lane{where}"
        )


def check(x: int, w: Width, condition: str) -> int:
    lo, hi = _BOUNDS[w]
    if x > hi or x < lo:
        raise LaneOverflow(condition, x, w)
    return x


def add(a: int, b: int, w: Width, condition: str) -> int:
    return check(a + b, w, condition)


def sub(a: int, b: int, w: Width, condition: str) -> int:
    return check(a - b, w, condition)


def mul(a: int, b: int, w: Width, condition: str) -> int:
    return check(a * b, w, condition)


def floordiv(a: int, b: int, w: Width, condition: str) -> tuple[int, int]:
    """Floored quotient and remainder (remainder has the sign of ``b``)."""
    q, r = divmod(a, b)
    return check(q, w, condition), r


def truncdiv(a: int, b: int, w: Width, condition: str) -> tuple[int, int]:
    """C-style quotient rounded toward zero; remainder has the sign of ``a``.

    Never forms ``abs(a)``, which is unrepresentable for ``a == w.min``.
    """
    q, r = divmod(a, b)
    if r and (a < 0) != (b < 0):
        q += 1
        r -= b
    return check(q, w, condition), r
