"""Exact nearest-integer scaling ``i*D/A`` inside fixed-width signed integers."""

from ilscale.core import (
    Algorithm,
    NearestSolution,
    ScaleProblem,
    SignedScaleProblem,
    direct_search,
    mdid,
    round_half_up_div,
    solve_signed,
)
from ilscale.decomposition import (
    CarrySolution,
    ChunkPlan,
    UnsatisfiableError,
    additive_direct_search,
    additive_zeroed,
    plan_chunks,
)
from ilscale.guard import GuardReport, check, check_adds, check_ds, check_mdid, check_rounded_div
from ilscale.lane import LaneOverflow, Width
from ilscale.oracle import brute_force_nearest, exact_nearest_half_up

__all__ = [
    "Algorithm",
    "CarrySolution",
    "ChunkPlan",
    "GuardReport",
    "LaneOverflow",
    "NearestSolution",
    "ScaleProblem",
    "SignedScaleProblem",
    "UnsatisfiableError",
    "Width",
    "additive_direct_search",
    "additive_zeroed",
    "brute_force_nearest",
    "check",
    "check_adds",
    "check_ds",
    "check_mdid",
    "check_rounded_div",
    "direct_search",
    "exact_nearest_half_up",
    "mdid",
    "plan_chunks",
    "round_half_up_div",
    "solve_signed",
]
