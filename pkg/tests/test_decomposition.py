import pytest
from hypothesis import given, settings, strategies as st

from ilscale.core import ScaleProblem, direct_search
from ilscale.decomposition import (
    ChunkPlan,
    UnsatisfiableError,
    additive_direct_search,
    additive_zeroed,
    chunk_cap,
    plan_chunks,
)
from ilscale.guard import ADDS_CHUNK, check_adds
from ilscale.lane import LaneOverflow, Width
from ilscale.oracle import exact_nearest_half_up

W32, W64 = Width.W32, Width.W64


def test_plan_examples():
    assert chunk_cap(10**6, 1000100, W32) == 21469835
    assert plan_chunks(10**8, 10**6, 1000100, W32).n == 5
    assert plan_chunks(10**9, 10**6, 10**6, W32).chunks == (10**9,)
    assert plan_chunks(10**18, 10**9, 1000100000, W64).n == 10843


def test_plan_unsatisfiable():
    with pytest.raises(UnsatisfiableError):
        plan_chunks(5, 0, W32.max, W32)


def test_plan_rejects_out_of_lane_input():
    with pytest.raises(LaneOverflow):
        plan_chunks(2**31, 1, 1, W32)


def test_equal_plan():
    assert ChunkPlan.equal(10, 3).chunks == (4, 4, 2)
    assert ChunkPlan.equal(2, 4).chunks == (1, 1, 0, 0)
    with pytest.raises(ValueError):
        ChunkPlan.equal(10, 0)


def test_carried_examples():
    sol = additive_direct_search(ChunkPlan((5, 5)), 3, 4, trace=True)
    assert (sol.j, sol.delta) == (8, 2)
    assert sol.per_chunk == ((4, 1), (4, 2))
    sol = additive_direct_search(ChunkPlan((1, 1)), 1, 3, trace=True)
    assert (sol.j, sol.delta) == (1, 1)
    assert sol.per_chunk == ((0, -1), (1, 1))


def test_zeroed_examples():
    assert additive_zeroed(ChunkPlan((1, 1)), 1, 3).j == 0
    assert additive_zeroed(ChunkPlan((5, 5)), 3, 4).j == 8


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(1, 10**6))
def test_single_chunk_is_direct_search(i, D, A):
    a = additive_direct_search(ChunkPlan((i,)), D, A)
    z = additive_zeroed(ChunkPlan((i,)), D, A)
    d = direct_search(ScaleProblem(i, D, A), i, 0)
    assert (a.j, a.delta) == (z.j, z.delta) == (d.j, d.delta)


def _partition(draw, i, n):
    cuts = sorted(draw(st.lists(st.integers(0, i), min_size=n - 1, max_size=n - 1)))
    return tuple(b - a for a, b in zip([0] + cuts, cuts + [i]))


@st.composite
def partitioned(draw, w=W64):
    A = draw(st.integers(1, 10**9))
    D = draw(st.integers(max(0, A - 10**4), A + 10**4))
    i = draw(st.integers(0, 10**12))
    n = draw(st.integers(1, 32))
    return ChunkPlan(_partition(draw, i, n), w), D, A


@given(partitioned())
def test_composition_is_exact(case):
    plan, D, A = case
    sol = additive_direct_search(plan, D, A)
    truth = exact_nearest_half_up(plan.total, D, A)
    assert sol.delta == sol.j * A - plan.total * D
    assert 2 * abs(sol.delta) <= A
    if 2 * abs(sol.delta) < A:
        assert sol.j == truth.j


@given(partitioned(), st.randoms(use_true_random=False))
def test_partition_invariance(case, rnd):
    plan, D, A = case
    shuffled = list(plan.chunks)
    rnd.shuffle(shuffled)
    a = additive_direct_search(plan, D, A)
    b = additive_direct_search(ChunkPlan(tuple(shuffled)), D, A)
    assert abs(a.j - b.j) <= 1
    if a.j != b.j:
        assert 2 * abs(a.delta) == A


@given(partitioned())
def test_prefixes_are_nearest(case):
    plan, D, A = case
    sol = additive_direct_search(plan, D, A, trace=True)
    total_i = total_j = 0
    for i_n, (j_n, delta_n) in zip(plan.chunks, sol.per_chunk):
        total_i += i_n
        total_j += j_n
        assert delta_n == total_j * A - total_i * D
        assert 2 * abs(delta_n) <= A


@given(partitioned())
def test_zeroed_error_bound(case):
    plan, D, A = case
    err = additive_zeroed(plan, D, A).j - exact_nearest_half_up(plan.total, D, A).j
    assert 2 * abs(err) <= plan.n


@settings(max_examples=200)
@given(st.integers(0, W32.max), st.integers(1, W32.max), st.integers(-20000, 20000))
def test_planner_plans_pass_guard_and_run(i, D, gap):
    A = min(W32.max, max(1, D + gap))
    if (2 * i * D + A) // (2 * A) > W32.max:
        return  # the planner presumes the answer itself fits
    try:
        plan = plan_chunks(i, D, A, W32)
    except UnsatisfiableError:
        return
    if plan.n > 2000:
        return
    assert plan.total == i
    report = check_adds(plan, D, A, W32)
    assert ADDS_CHUNK not in report.violated_conditions
    # at worst-case carries the guard can be stricter than any real chain
    if report.satisfied:
        sol = additive_direct_search(plan, D, A, W32)
        assert sol.delta == sol.j * A - i * D


def test_overflow_reports_chunk():
    with pytest.raises(LaneOverflow) as exc:
        additive_direct_search(ChunkPlan((10, 10**9), W32), 10**6, 1000100)
    assert exc.value.chunk == 1


@given(
    st.integers(0, W64.max), st.integers(1, W64.max), st.integers(-(10**12), 10**12), st.sampled_from([W32, W64])
)
def test_planner_init_interval(i, D, gap, w):
    A = max(1, D + gap)
    if max(i, D, A) > w.max:
        return
    cap = chunk_cap(D, A, w)
    if cap is not None and cap > 0 and i // cap > 10**4:
        return
    try:
        plan = plan_chunks(i, D, A, w)
    except UnsatisfiableError:
        return
    assert plan.total == i
    # carries range over 2|c| <= A; the init expression is linear in c
    for i_n in set(plan.chunks):
        base = i_n * (A - D)
        assert w.min <= base - (A + 1) // 2 and base + (A + 1) // 2 <= w.max or plan.n == 1 and A == D
