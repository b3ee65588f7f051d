"""Clock-skew compensation experiments and the zeroed-carry sweep.

Each sample draws a clock skew uniformly from ``[-skew_ppm, +skew_ppm]`` ppm
and turns it into an integer interarrival time ``A = round(D * (1 + eps))``.
The skew is a rational with denominator ``10**12``, so sample generation
itself never touches floating point. Every sample's random draw is a pure
function of ``(seed, index)``, which keeps output identical however the
samples are batched.
"""

from __future__ import annotations

import csv
import logging
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ilscale import batch
from ilscale.decomposition import ChunkPlan
from ilscale.lane import Width
from ilscale.oracle import (
    OVERFLOW,
    ErrorValue,
    FloatPrecision,
    exact_nearest_many,
    fp_reference_many,
)

log = logging.getLogger(__name__)

SKEW_DENOM = 10**12  # eps = numerator / SKEW_DENOM
PPM = 10**6

TABLE_COLUMNS = (
    "algorithm", "width", "D", "i", "N", "samples",
    "err_min", "err_max", "err_avg", "overflow_count", "note",
)
SWEEP_COLUMNS = ("width", "D", "i", "N", "sample", "u", "error")

ALGORITHMS = ("binary64", "binary32", "mdid", "adds")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class EmptyDataError(ValueError):
    """Every sample overflowed, so no error statistic exists."""


class SweepBoundError(AssertionError):
    """A zeroed-carry error exceeded ``N/2``."""


# -- deterministic keyed stream ---------------------------------------------

def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finaliser; multiplication is meant to wrap mod 2**64
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def keyed_uint64(seed: int, index: np.ndarray | int, stream: int = 0) -> np.ndarray:
    """64-bit draw for each ``index``, a pure function of ``(seed, stream, index)``."""
    key = _mix64(np.uint64((seed * _GOLDEN + stream) & _MASK64))
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(key + (idx + np.uint64(1)) * np.uint64(_GOLDEN))


def _uniform_int(seed: int, index, lo: int, hi: int, stream: int = 0) -> np.ndarray:
    """Integers uniform on ``[lo, hi]`` (modulo bias below 2**-20 for spans < 2**44)."""
    span = np.uint64(hi - lo + 1)
    raw = np.atleast_1d(keyed_uint64(seed, index, stream))
    return (raw % span).astype(np.int64) + np.int64(lo)


# -- configs ------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    width: Width
    D: int
    i_values: tuple[int, ...]
    samples: int = 10**6
    skew_ppm: int = 100
    seed: int = 1
    adds_n_override: Mapping[int, int] | None = None
    algorithms: tuple[str, ...] = ALGORITHMS

    def __post_init__(self) -> None:
        object.__setattr__(self, "width", Width.parse(self.width))
        object.__setattr__(self, "i_values", tuple(int(i) for i in self.i_values))
        if self.D < 1:
            raise ValueError("D must be positive")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.skew_ppm < 0 or self.skew_ppm >= PPM:
            raise ValueError("skew_ppm must be in [0, 1e6)")
        if not self.i_values or any(i < 1 for i in self.i_values):
            raise ValueError("i_values must be positive")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        over = [i for i in self.i_values if i > self.width.max]
        if over:
            raise ValueError(f"i values {over} not representable at int{self.width.value}")


@dataclass(frozen=True)
class FigureSweepConfig:
    width: Width
    i_equals_D: int
    u_range: int
    n_values: tuple[int, ...] = tuple(range(1, 21))
    samples: int = 10**4
    seed: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "width", Width.parse(self.width))
        if self.i_equals_D < 1 or self.u_range < 1 or self.samples < 1:
            raise ValueError("i_equals_D, u_range and samples must be positive")
        if not self.n_values or min(self.n_values) < 1:
            raise ValueError("n_values must be positive")


@dataclass(frozen=True)
class ErrorStats:
    """Error statistics over the non-overflow samples of one table cell."""

    samples: int
    overflow_count: int
    _min: int | None = None
    _max: int | None = None
    _sum: int = 0

    @property
    def count(self) -> int:
        return self.samples - self.overflow_count

    def _need(self) -> None:
        if self.count == 0:
            raise EmptyDataError("all samples overflowed")

    @property
    def err_min(self) -> int:
        self._need()
        return self._min

    @property
    def err_max(self) -> int:
        self._need()
        return self._max

    @property
    def err_avg(self) -> Fraction:
        self._need()
        return Fraction(self._sum, self.count)

    @property
    def note(self) -> str:
        return "Overflow" if self.overflow_count else ""


def summarize(errors: Iterable[ErrorValue]) -> ErrorStats:
    n = ovf = total = 0
    lo = hi = None
    for e in errors:
        n += 1
        if e is OVERFLOW:
            ovf += 1
            continue
        e = int(e)
        total += e
        lo = e if lo is None or e < lo else lo
        hi = e if hi is None or e > hi else hi
    return ErrorStats(n, ovf, lo, hi, total)


def summarize_array(err: np.ndarray, overflow: np.ndarray) -> ErrorStats:
    """Array form of :func:`summarize`; ``overflow`` masks excluded samples."""
    ok = err[~overflow]
    n, ovf = len(err), int(overflow.sum())
    if ok.size == 0:
        return ErrorStats(n, ovf)
    total = int(ok.astype(object).sum())
    return ErrorStats(n, ovf, int(ok.min()), int(ok.max()), total)


# -- sample generation --------------------------------------------------------

def _skew_numerators(cfg: ScenarioConfig, index) -> np.ndarray:
    k = cfg.skew_ppm * (SKEW_DENOM // PPM)
    return _uniform_int(cfg.seed, index, -k, k)


def _a_from_skew(D: int, num: int) -> int:
    # round-half-up of D * (SKEW_DENOM + num) / SKEW_DENOM, clamped to >= 1
    return max(1, (2 * D * (SKEW_DENOM + num) + SKEW_DENOM) // (2 * SKEW_DENOM))


def gen_sample(cfg: ScenarioConfig, index: int) -> tuple[int, Fraction]:
    """Interarrival time ``A`` and skew ``eps`` for sample ``index``."""
    if not 0 <= index < cfg.samples:
        raise IndexError(f"sample index {index} outside [0, {cfg.samples})")
    num = int(_skew_numerators(cfg, index)[0])
    return _a_from_skew(cfg.D, num), Fraction(num, SKEW_DENOM)


def gen_samples(cfg: ScenarioConfig) -> np.ndarray:
    nums = _skew_numerators(cfg, np.arange(cfg.samples, dtype=np.uint64))
    D = cfg.D
    return np.array([_a_from_skew(D, n) for n in nums.tolist()], dtype=np.int64)


# -- table experiment ---------------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    algorithm: str
    i: int
    n: int | None
    stats: ErrorStats

    def csv_fields(self, cfg: ScenarioConfig) -> list[str]:
        s = self.stats
        if s.count:
            mn, mx, avg = str(s.err_min), str(s.err_max), format_avg(s.err_avg)
        else:
            mn = mx = avg = ""
        return [
            self.algorithm, str(cfg.width.value), str(cfg.D), str(self.i),
            "" if self.n is None else str(self.n), str(s.samples),
            mn, mx, avg, str(s.overflow_count), s.note,
        ]


def format_avg(x: Fraction) -> str:
    if x == 0:
        return "0"
    return f"{float(x):.6g}" if abs(x) >= Fraction(1, 10**4) else f"{float(x):.5e}"


def plan_for_samples(i: int, D: int, A: np.ndarray, w: Width) -> ChunkPlan:
    """Fewest equal chunks that are safe for every ``A`` in the sample set."""
    worst_gap = int(np.abs(A - D).max())
    if worst_gap == 0:
        return ChunkPlan((i,), w)
    # the cap shrinks as |A-D| and A grow, so the two maxima bound every sample
    cap = (w.max - (int(A.max()) + 1) // 2) // worst_gap
    if cap >= i:
        return ChunkPlan((i,), w)
    n = -(-i // cap)
    return ChunkPlan(tuple([cap] * (n - 1) + [i - cap * (n - 1)]), w)


def _errors(result: np.ndarray, truth: np.ndarray) -> np.ndarray:
    if result.dtype == object or truth.dtype == object:
        return np.array([int(a) - int(b) for a, b in zip(result.tolist(), truth.tolist())], dtype=object)
    return result - truth


def run_table_experiment(cfg: ScenarioConfig, A: np.ndarray | None = None) -> list[TableRow]:
    """One row per (algorithm, i), ordered as ``cfg.algorithms`` then ``cfg.i_values``."""
    if A is None:
        A = gen_samples(cfg)
    w = cfg.width
    truth = {i: exact_nearest_many(i, cfg.D, A) for i in cfg.i_values}
    none = np.zeros(A.size, dtype=bool)
    rows = []
    for algo in cfg.algorithms:
        for i in cfg.i_values:
            n = None
            if algo in ("binary64", "binary32"):
                prec = FloatPrecision(algo)
                err, ovf = _errors(fp_reference_many(prec, i, cfg.D, A), truth[i]), none
            elif algo == "mdid":
                j, _, ovf = batch.mdid_many(i, cfg.D, A, w)
                err = _errors(j, truth[i])
            else:
                override = (cfg.adds_n_override or {}).get(i)
                plan = ChunkPlan.equal(i, override, w) if override else plan_for_samples(i, cfg.D, A, w)
                n = plan.n
                j, _, ovf = batch.adds_many(plan.chunks, cfg.D, A, w)
                err = _errors(j, truth[i])
            stats = summarize_array(err, ovf)
            log.info("%s i=%d N=%s overflow=%d", algo, i, n, stats.overflow_count)
            rows.append(TableRow(algo, i, n, stats))
    return rows


# -- zeroed-carry sweep ---------------------------------------------------------

@dataclass(frozen=True)
class SweepResult:
    config: FigureSweepConfig
    u: np.ndarray
    errors: dict[int, np.ndarray] = field(default_factory=dict)

    def max_abs(self, n: int) -> int:
        return int(np.abs(self.errors[n]).max())

    def violations(self) -> dict[int, int]:
        """Count of samples with ``2*|error| > N`` per ``N`` (only nonzero entries)."""
        out = {}
        for n, e in self.errors.items():
            bad = int((2 * np.abs(e) > n).sum())
            if bad:
                out[n] = bad
        return out

    def rows(self) -> Iterable[tuple[int, int, int, int]]:
        for n in self.config.n_values:
            for k, (u, e) in enumerate(zip(self.u.tolist(), self.errors[n].tolist())):
                yield n, k, u, e


def sweep_u(cfg: FigureSweepConfig) -> np.ndarray:
    return _uniform_int(cfg.seed, np.arange(cfg.samples, dtype=np.uint64), 1, cfg.u_range, stream=1)


def run_zeroed_sweep(cfg: FigureSweepConfig, *, check: bool = True) -> SweepResult:
    """Zeroed-carry decomposition error against the exact answer for every ``N``.

    ``A = D + u`` with the same ``u`` draw for a given sample index across all
    ``N``. Raises :class:`SweepBoundError` if any error exceeds ``N/2`` unless
    ``check`` is false.
    """
    w = cfg.width
    i = D = cfg.i_equals_D
    u = sweep_u(cfg)
    A = D + u
    truth = exact_nearest_many(i, D, A)
    result = SweepResult(cfg, u)
    for n in cfg.n_values:
        plan = ChunkPlan.equal(i, n, w)
        j, _, ovf = batch.adds_many(plan.chunks, D, A, w, keep_carry=False)
        if ovf.any():
            raise OverflowError(f"zeroed sweep overflowed at N={n}")
        result.errors[n] = _errors(j, truth).astype(np.int64)
    if check:
        bad = result.violations()
        if bad:
            raise SweepBoundError(f"|error| > N/2 for {bad}")
    return result


# -- CSV output -----------------------------------------------------------------

def _atomic_write(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    count = 0
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
                count += 1
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return count


def write_table_csv(path: Path, cfg: ScenarioConfig, rows: Sequence[TableRow]) -> int:
    return _atomic_write(path, TABLE_COLUMNS, (r.csv_fields(cfg) for r in rows))


def write_sweep_csv(path: Path, result: SweepResult) -> int:
    cfg = result.config
    w, d = cfg.width.value, cfg.i_equals_D
    return _atomic_write(
        path, SWEEP_COLUMNS, ((w, d, d, n, k, u, e) for n, k, u, e in result.rows())
    )


# -- presets ------------------------------------------------------------------

def _decades(lo: int, hi: int) -> tuple[int, ...]:
    return tuple(10**k for k in range(lo, hi + 1))


TABLE_PRESETS: dict[str, dict] = {
    "int32-d1e6": dict(
        width=Width.W32, D=10**6, i_values=_decades(6, 9),
        adds_n_override={10**6: 1, 10**7: 1, 10**8: 10, 10**9: 100},
    ),
    "int32-d1e8": dict(width=Width.W32, D=10**8, i_values=_decades(3, 7)),
    "int64-d1e9": dict(
        width=Width.W64, D=10**9, i_values=_decades(12, 18),
        adds_n_override={10**12: 1, 10**13: 1, 10**14: 10, 10**15: 100,
                         10**16: 1000, 10**17: 10**4, 10**18: 10**5},
    ),
    "int64-d1e12": dict(width=Width.W64, D=10**12, i_values=_decades(7, 14)),
}

SWEEP_PRESETS: dict[str, dict] = {
    "fig3-int32": dict(width=Width.W32, i_equals_D=10**6, u_range=10**3),
    "fig3-int64": dict(width=Width.W64, i_equals_D=10**12, u_range=10**6),
}


def table_preset(name: str, **overrides) -> ScenarioConfig:
    params = dict(TABLE_PRESETS[name])
    params.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig(**params)


def sweep_preset(name: str, **overrides) -> FigureSweepConfig:
    params = dict(SWEEP_PRESETS[name])
    params.update({k: v for k, v in overrides.items() if v is not None})
    return FigureSweepConfig(**params)


def approx_note(algorithm: str) -> bool:
    """Float rows depend on unknowable evaluation details and are approximate."""
    return algorithm in ("binary32", "binary64")

