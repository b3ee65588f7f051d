"""Command-line front end: ``ilscale {solve,check,fuzz,bench,sweep}``.

Exit codes: 0 success, 1 bad arguments or unusable output path, 2 overflow
(or an unsatisfied guard for ``check``), 3 a fuzz invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from ilscale import bench, guard
from ilscale.core import (
    Algorithm,
    ScaleProblem,
    SignedScaleProblem,
    direct_search,
    mdid,
    round_half_up_div,
    solve_signed,
)
from ilscale.decomposition import ChunkPlan, additive_direct_search, plan_chunks
from ilscale.lane import LaneOverflow, Width
from ilscale.oracle import exact_nearest_half_up

EXIT_OK, EXIT_USAGE, EXIT_OVERFLOW, EXIT_FUZZ = 0, 1, 2, 3
SUITES = ("oracle-agreement", "residual-bound", "guard-soundness", "partition-invariance")

_INT_RE = re.compile(r"[+-]?\d+")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def exact_int(text: str) -> int:
    """Parse a decimal integer literal; float spellings like ``1e8`` are rejected."""
    t = text.strip().replace("_", "")
    if not _INT_RE.fullmatch(t):
        raise argparse.ArgumentTypeError(f"not an exact decimal integer: {text!r}")
    return int(t)


def int_list(text: str) -> list[int]:
    return [exact_int(t) for t in text.split(",") if t.strip()]


def n_override(text: str) -> dict[int, int]:
    out = {}
    for part in text.split(","):
        try:
            i, n = part.split(":")
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected i:N pairs, got {part!r}") from None
        out[exact_int(i)] = exact_int(n)
    return out


def default_seed() -> int:
    env = os.environ.get("ILS_SEED")
    return exact_int(env) if env else 1


# -- solve / check ----------------------------------------------------------------

def _plan_from_args(args, p: ScaleProblem, w: Width) -> ChunkPlan:
    if args.chunks:
        plan = ChunkPlan(tuple(args.chunks), w)
        if plan.total != p.i:
            raise UsageError(f"chunks sum to {plan.total}, expected i={p.i}")
        return plan
    if args.n:
        return ChunkPlan.equal(p.i, args.n, w)
    return plan_chunks(p.i, p.D, p.A, w)


def run_solve(args) -> int:
    w = Width.parse(args.width)
    p = ScaleProblem(args.i, args.d, args.a)
    truth = exact_nearest_half_up(p.i, p.D, p.A)
    sign = args.sign
    if sign == -1 and p.i * p.D == 0:
        sign = 1
    if args.algo == "oracle":
        j, delta = truth.j, truth.delta
    elif args.algo == "adds":
        sol = additive_direct_search(_plan_from_args(args, p, w), p.D, p.A, w)
        j, delta = sign * sol.j, sign * sol.delta
    else:
        algo = Algorithm(args.algo)
        sol = solve_signed(SignedScaleProblem(p, sign), algo, w, kappa=args.kappa)
        j, delta = sol.j, sol.delta
    if args.algo == "oracle" and sign == -1:
        j, delta = -j, -delta
    print(f"j={j} delta={delta} algo={args.algo} ties={str(truth.tie).lower()}")
    return EXIT_OK


def run_check(args) -> int:
    w = Width.parse(args.width)
    p = ScaleProblem(args.i, args.d, args.a)
    algo = Algorithm(args.algo)
    plan = _plan_from_args(args, p, w) if algo is Algorithm.ADDS else None
    report = guard.check(algo, p, w, kappa=args.kappa, plan=plan)
    print(f"algo={algo.value} satisfied={str(report.satisfied).lower()}")
    for name in report.violated_conditions:
        print(f"violated: {name}")
    return EXIT_OK if report.satisfied else EXIT_OVERFLOW


# -- fuzz -------------------------------------------------------------------------

@dataclass
class SuiteResult:
    passed: int = 0
    failed: int = 0
    failures: list[tuple] = field(default_factory=list)

    def record(self, ok: bool, instance: tuple) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(instance)


def _magnitude(rng: random.Random, w: Width) -> int:
    bits = rng.randint(0, w.value - 1)
    return rng.randint(0, min(w.max, (1 << bits)))


def random_instance(rng: random.Random, w: Width) -> tuple[int, int, int]:
    """Mix of skew-regime (``A`` close to ``D``), boundary and log-uniform draws."""
    mode = rng.random()
    D = _magnitude(rng, w)
    if mode < 0.4:
        gap = rng.randint(-(D // 1000) - 1, D // 1000 + 1)
        A = min(w.max, max(1, D + gap))
    elif mode < 0.5:
        A = w.max - rng.randint(0, 3)
        D = w.max - rng.randint(0, 3) if rng.random() < 0.5 else D
    else:
        A = max(1, _magnitude(rng, w))
    i = _magnitude(rng, w)
    return i, D, A


def _kernel_ok(fn: Callable[[], object]) -> object | None:
    try:
        return fn()
    except LaneOverflow:
        return None


def fuzz(w: Width, trials: int, seed: int) -> dict[str, SuiteResult]:
    rng = random.Random(seed)
    res = {s: SuiteResult() for s in SUITES}
    for _ in range(trials):
        i, D, A = random_instance(rng, w)
        p = ScaleProblem(i, D, A)
        truth = exact_nearest_half_up(i, D, A)
        kappa = rng.choice((i, 0, min(w.max, 2 * i)))
        runs = {
            Algorithm.ROUNDED_DIV: (guard.check_rounded_div(p, w), lambda: round_half_up_div(p, w)),
            Algorithm.MDID: (guard.check_mdid(p, w), lambda: mdid(p, w)),
            Algorithm.DS: (guard.check_ds(p, kappa, 0, w), lambda: direct_search(p, kappa, 0, w)),
        }
        for algo, (report, call) in runs.items():
            sol = _kernel_ok(call)
            inst = (algo.value, i, D, A, kappa)
            if report.satisfied:
                res["guard-soundness"].record(sol is not None, inst)
            elif algo is not Algorithm.DS:
                # div/mdid guards are exact apart from the output bound
                only_output = set(report.violated_conditions) <= {"output bound"}
                res["guard-soundness"].record(sol is None or only_output, inst)
            if sol is None:
                continue
            exact = sol.delta == sol.j * A - i * D
            res["residual-bound"].record(exact and 2 * abs(sol.delta) <= A, inst)
            if 2 * abs(sol.delta) < A or algo is not Algorithm.DS:
                agree = sol.j == truth.j
            else:
                agree = sol.j in (truth.j, truth.j - 1)
            res["oracle-agreement"].record(agree, inst)

        n = rng.randint(2, 32)
        cuts = sorted(rng.randint(0, i) for _ in range(n - 1))
        chunks = tuple(b - a for a, b in zip([0] + cuts, cuts + [i]))
        plan = ChunkPlan(chunks, w)
        if guard.check_adds(plan, D, A, w).satisfied:
            sol = _kernel_ok(lambda: additive_direct_search(plan, D, A, w))
            inst = ("adds", i, D, A, n)
            res["guard-soundness"].record(sol is not None, inst)
            if sol is not None:
                ok = sol.delta == sol.j * A - i * D and 2 * abs(sol.delta) <= A
                ok &= sol.j == truth.j or (2 * abs(sol.delta) == A and sol.j == truth.j - 1)
                res["partition-invariance"].record(ok, inst)
    return res


def run_fuzz(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    w = Width.parse(args.width)
    results = fuzz(w, args.trials, args.seed)
    failed = False
    for name, r in results.items():
        status = "pass" if r.failed == 0 else "FAIL"
        print(f"{name}: {status} passed={r.passed} failed={r.failed}")
        if r.failures:
            failed = True
            worst = min(r.failures, key=lambda t: sum(x for x in t[1:] if isinstance(x, int)))
            print(f"  minimal failing instance: {worst}")
    return EXIT_FUZZ if failed else EXIT_OK


# -- bench / sweep ----------------------------------------------------------------

def _check_out(path: Path) -> Path:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise UsageError(f"cannot write to {path}")
    return path


def _run_sweep(cfg: bench.FigureSweepConfig, out: Path) -> int:
    result = bench.run_zeroed_sweep(cfg)
    rows = bench.write_sweep_csv(out, result)
    worst = {n: result.max_abs(n) for n in cfg.n_values}
    print(f"wrote {out} rows={rows}")
    print("max |error| by N: " + " ".join(f"{n}:{e}" for n, e in worst.items()))
    return EXIT_OK


def run_bench(args) -> int:
    out = _check_out(Path(args.out))
    if args.scenario in bench.SWEEP_PRESETS:
        cfg = bench.sweep_preset(args.scenario, samples=args.samples, seed=args.seed)
        return _run_sweep(cfg, out)
    overrides = dict(
        samples=args.samples, seed=args.seed, skew_ppm=args.skew_ppm,
        adds_n_override=args.n_override,
        algorithms=tuple(args.algorithms) if args.algorithms else None,
    )
    if args.scenario:
        if args.scenario not in bench.TABLE_PRESETS:
            known = sorted(bench.TABLE_PRESETS) + sorted(bench.SWEEP_PRESETS)
            raise UsageError(f"unknown scenario {args.scenario!r}; choose from {known}")
        cfg = bench.table_preset(args.scenario, **overrides)
    else:
        if args.width is None or args.d is None or not args.i:
            raise UsageError("without --scenario, --width, --d and --i are required")
        cfg = bench.ScenarioConfig(
            width=Width.parse(args.width), D=args.d, i_values=tuple(args.i),
            **{k: v for k, v in overrides.items() if v is not None},
        )
    rows = bench.run_table_experiment(cfg)
    count = bench.write_table_csv(out, cfg, rows)
    print(f"wrote {out} rows={count}")
    floats = [a for a in cfg.algorithms if bench.approx_note(a)]
    if floats:
        print(f"note: {','.join(floats)} rows are approximate (evaluated as i*(D/A))")
    return EXIT_OK


def run_sweep_cmd(args) -> int:
    out = _check_out(Path(args.out))
    cfg = bench.FigureSweepConfig(
        width=Width.parse(args.width), i_equals_D=args.i_equals_d, u_range=args.u_range,
        n_values=tuple(args.n_values), samples=args.samples, seed=args.seed,
    )
    return _run_sweep(cfg, out)


# -- parser -----------------------------------------------------------------------

def _add_problem(p: argparse.ArgumentParser, algos: Sequence[str]) -> None:
    p.add_argument("--algo", choices=algos, default="mdid")
    p.add_argument("--width", choices=("32", "64"), default="64")
    p.add_argument("--i", type=exact_int, required=True)
    p.add_argument("--d", type=exact_int, required=True)
    p.add_argument("--a", type=exact_int, required=True)
    p.add_argument("--kappa", type=exact_int, default=None, help="initial guess for ds")
    chunking = p.add_mutually_exclusive_group()
    chunking.add_argument("--chunks", type=int_list, help="explicit chunk sizes for adds")
    chunking.add_argument("--n", type=exact_int, help="number of equal chunks for adds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ilscale", description="Exact nearest-integer scaling i*D/A.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one instance")
    _add_problem(p, ("div", "mdid", "ds", "adds", "oracle"))
    p.add_argument("--sign", type=exact_int, choices=(1, -1), default=1)
    p.set_defaults(func=run_solve)

    p = sub.add_parser("check", help="evaluate non-overflow conditions")
    _add_problem(p, ("div", "mdid", "ds", "adds"))
    p.set_defaults(func=run_check)

    p = sub.add_parser("fuzz", help="differential checks against the oracle")
    p.add_argument("--width", choices=("32", "64"), default="64")
    p.add_argument("--trials", type=exact_int, default=10000)
    p.add_argument("--seed", type=exact_int, default=None)
    p.set_defaults(func=run_fuzz)

    p = sub.add_parser("bench", help="clock-skew compensation experiments")
    p.add_argument("--scenario")
    p.add_argument("--width", choices=("32", "64"))
    p.add_argument("--d", type=exact_int)
    p.add_argument("--i", type=int_list, help="comma-separated i values")
    p.add_argument("--samples", type=exact_int)
    p.add_argument("--seed", type=exact_int, default=None)
    p.add_argument("--skew-ppm", type=exact_int)
    p.add_argument("--n-override", type=n_override, help="i:N pairs for adds")
    p.add_argument("--algorithms", type=lambda s: s.split(","))
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_bench)

    p = sub.add_parser("sweep", help="zeroed-carry error sweep")
    p.add_argument("--width", choices=("32", "64"), default="32")
    p.add_argument("--i-equals-d", type=exact_int, required=True)
    p.add_argument("--u-range", type=exact_int, required=True)
    p.add_argument("--n-values", type=int_list, default=list(range(1, 21)))
    p.add_argument("--samples", type=exact_int, default=10**4)
    p.add_argument("--seed", type=exact_int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_sweep_cmd)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if getattr(args, "seed", 0) is None:
        args.seed = default_seed()
    try:
        return args.func(args)
    except LaneOverflow as exc:
        print(f"overflow: {exc.condition}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (UsageError, ValueError, KeyError) as exc:
        print(f"ilscale: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
