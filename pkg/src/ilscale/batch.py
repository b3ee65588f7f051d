"""Vectorised kernels over many ``A`` values for the experiment harness.

Same arithmetic as :mod:`ilscale.core` and :mod:`ilscale.decomposition`, but
run across a whole sample array at once with ``int64`` storage. Overflow is
detected per element without ever relying on wrapped values: each sample whose
computation leaves the lane is flagged in a boolean mask, and its numeric
result is meaningless.
"""

from __future__ import annotations

import numpy as np

from ilscale.lane import Width

I64 = np.int64


class _Lane:
    """Checked int64 array arithmetic clipped to a W-bit lane."""

    def __init__(self, w: Width, size: int):
        self.lo = I64(w.min)
        self.hi = I64(w.max)
        self.narrow = w.value < 64
        self.ovf = np.zeros(size, dtype=bool)

    def _range(self, x: np.ndarray) -> np.ndarray:
        if self.narrow:
            self.ovf |= (x < self.lo) | (x > self.hi)
        return x

    def add(self, a, b) -> np.ndarray:
        s = np.add(a, b, dtype=I64)
        if not self.narrow:
            self.ovf |= ((a ^ s) & (b ^ s)) < 0
        return self._range(s)

    def sub(self, a, b) -> np.ndarray:
        d = np.subtract(a, b, dtype=I64)
        if not self.narrow:
            self.ovf |= ((a ^ b) & (a ^ d)) < 0
        return self._range(d)

    def mul(self, x, y) -> np.ndarray:
        """``x * y`` for ``y >= 0``; ``x`` may have either sign."""
        y = np.asarray(y, dtype=I64)
        ys = np.maximum(y, 1)
        # x*y in [lo, hi]  <=>  ceil(lo/y) <= x <= floor(hi/y)
        bad = (x > self.hi // ys) | (x < (self.lo + ys - 1) // ys)
        self.ovf |= bad & (y != 0)
        with np.errstate(over="ignore"):
            return np.multiply(x, y, dtype=I64)


def _init_term(ln: _Lane, i: int, D: int, A: np.ndarray, kappa: int) -> np.ndarray:
    """``(kappa - i)*A + i*(A - D)``, the carry-independent part of the start residual."""
    return ln.add(ln.mul(I64(kappa - i), A), ln.mul(A - I64(D), I64(i)))


def _ds_from(ln: _Lane, t: np.ndarray, A: np.ndarray, kappa: int, carry) -> tuple[np.ndarray, np.ndarray]:
    d0 = ln.add(t, carry)
    r = np.fmod(d0, A)  # sign of d0, so (d0 - r)/A is the quotient toward zero
    q = (d0 - r) // A
    k1 = ln.sub(I64(kappa), q)
    down = (d0 > 0) & (A - r < r)
    up = (d0 < 0) & (r + A < -r)
    ln.ovf |= (down & (k1 == ln.lo)) | (up & (k1 == ln.hi))
    j = k1 - down + up
    delta = r - A * down + A * up
    return j, delta


def adds_many(
    chunks: tuple[int, ...], D: int, A: np.ndarray, w: Width, *, keep_carry: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Additive direct search for every ``A``; returns ``(j, delta, overflow)``.

    ``keep_carry=False`` gives the zeroed-carry diagnostic.
    """
    A = np.asarray(A, dtype=I64)
    ln = _Lane(w, A.size)
    ln.ovf |= (A > ln.hi) | (I64(D) > ln.hi)
    total = np.zeros(A.size, dtype=I64)
    carry = np.zeros(A.size, dtype=I64)
    zero = np.zeros(A.size, dtype=I64)
    # equal-size plans repeat the same chunk, whose start term depends only on
    # (i_n, D, A); its overflow flags are folded into ln.ovf once, here
    terms: dict[int, np.ndarray] = {}
    for i_n in chunks:
        t = terms.get(i_n)
        if t is None:
            t = terms[i_n] = _init_term(ln, i_n, D, A, i_n)
        j, delta = _ds_from(ln, t, A, i_n, carry if keep_carry else zero)
        total = ln.add(total, j)
        carry = delta
    return total, carry, ln.ovf.copy()


def mdid_many(i: int, D: int, A: np.ndarray, w: Width) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Multiplicative decomposition for every ``A``; returns ``(j, delta, overflow)``."""
    A = np.asarray(A, dtype=I64)
    ln = _Lane(w, A.size)
    if i > w.max or D > w.max:
        ln.ovf[:] = True
        z = np.zeros(A.size, dtype=I64)
        return z, z, ln.ovf
    iv, Dv = I64(i), I64(D)
    half = A // 2
    j = np.zeros(A.size, dtype=I64)
    delta = np.zeros(A.size, dtype=I64)

    reduced = (iv < A) & (Dv < A)
    if reduced.any():
        a = A[reduced]
        sub = _Lane(w, a.size)
        prod = sub.mul(np.full(a.size, iv), Dv)
        q, rem = np.divmod(prod, a)
        bump = rem >= a - a // 2
        j[reduced] = q + bump
        delta[reduced] = np.where(bump, a - rem, -rem)
        ln.ovf[reduced] = sub.ovf

    gen = ~reduced
    if gen.any():
        a = A[gen]
        sub = _Lane(w, a.size)
        q, r = np.divmod(iv, a)
        whole = sub.mul(q, Dv)
        t = sub.add(sub.mul(r, Dv), half[gen])
        f, rem = np.divmod(t, a)
        j[gen] = sub.add(whole, f)
        delta[gen] = half[gen] - rem
        ln.ovf[gen] = sub.ovf
    ln.ovf |= A > ln.hi
    return j, delta, ln.ovf
