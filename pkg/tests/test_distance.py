import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PENTAGON, random_pointset, square
from flipcenter.distance import (
    BudgetExhausted,
    DistanceResult,
    FlipSequence,
    InvalidStep,
    distance_lower_bound,
    exact_distance,
    heuristic_distance,
    replay,
    sequential_walk_length,
)
from flipcenter.triangulation import (
    PointSet,
    PointSetMismatch,
    crossing_number,
    greedy_random_triangulation,
)
from oracles import bfs_distance

# exact parallel distances between the five pentagon fans, by breadth-first
# search over all parallel flip sequences (oracles.bfs_distance)
PENTAGON_DISTANCES = [
    [0, 2, 1, 1, 2],
    [2, 0, 2, 1, 1],
    [1, 2, 0, 2, 1],
    [1, 1, 2, 0, 2],
    [2, 1, 1, 2, 0],
]


def _pair(seed: int, n: int, span: int = 40):
    rng = np.random.default_rng(seed)
    ps = random_pointset(rng, n, span=span)
    return greedy_random_triangulation(ps, seed), greedy_random_triangulation(ps, seed + 7919)


def test_lower_bound_examples(fans):
    S, S2 = square((0, 2)), square((1, 3))
    assert distance_lower_bound(S, S) == 0
    assert distance_lower_bound(S, S2) == 1
    assert distance_lower_bound(fans[0], fans[1]) == 2


def test_exact_examples(fans):
    S, S2 = square((0, 2)), square((1, 3))
    r = exact_distance(S, S)
    assert (r.lower, r.upper, r.exact, len(r.witness)) == (0, 0, True, 0)
    r = exact_distance(S, S2)
    assert (r.lower, r.upper, r.exact) == (1, 1, True)
    r = exact_distance(fans[0], fans[1])
    assert (r.lower, r.upper, r.exact) == (2, 2, True)


def test_pentagon_matrix_matches_bfs(fans):
    for i in range(5):
        for j in range(5):
            assert bfs_distance(PENTAGON, fans[i].edges, fans[j].edges) == PENTAGON_DISTANCES[i][j]
            assert exact_distance(fans[i], fans[j]).upper == PENTAGON_DISTANCES[i][j]
            assert heuristic_distance(fans[i], fans[j]).upper == PENTAGON_DISTANCES[i][j]


def test_heuristic_examples():
    S, S2 = square((0, 2)), square((1, 3))
    assert heuristic_distance(S, S).upper == 0
    r = heuristic_distance(S, S2)
    assert r.upper == 1 and r.witness.steps == (((0, 2),),)


def test_replay_examples(fans):
    S, S2 = square((0, 2)), square((1, 3))
    assert replay(S, []) == S
    assert replay(fans[0], exact_distance(fans[0], fans[1]).witness) == fans[1]
    assert replay(fans[0], heuristic_distance(fans[0], fans[1]).witness) == fans[1]
    with pytest.raises(InvalidStep) as err:
        replay(S, [[(0, 2)], [(0, 2)]])
    assert err.value.index == 1
    with pytest.raises(InvalidStep):
        replay(fans[0], [[(0, 2), (0, 3)]])
    with pytest.raises(InvalidStep):
        replay(S, [[(0, 1)]])


def test_mismatch(fans):
    with pytest.raises(PointSetMismatch):
        distance_lower_bound(fans[0], square((0, 2)))
    with pytest.raises(PointSetMismatch):
        heuristic_distance(fans[0], square((0, 2)))
    with pytest.raises(PointSetMismatch):
        exact_distance(fans[0], square((0, 2)))


def test_budget_exhausted_carries_bounds():
    T1, T2 = _pair(4, 40, span=400)
    with pytest.raises(BudgetExhausted) as err:
        exact_distance(T1, T2, node_limit=5)
    r = err.value.result
    assert isinstance(r, DistanceResult) and not r.exact
    assert r.lower <= r.upper and replay(T1, r.witness) == T2


def test_flip_sequence_round_trip():
    seq = FlipSequence.from_lists([[[2, 0], [3, 1]], [[4, 1]]])
    assert seq.steps == (((0, 2), (1, 3)), ((1, 4),))
    assert FlipSequence.from_lists(seq.to_lists()) == seq


def test_python_walk_on_large_coordinates():
    # same combinatorics at a scale the compiled kernels refuse
    T1, T2 = _pair(11, 25, span=200)
    big = PointSet([(p.x << 36, p.y << 36) for p in T1.pointset.points])
    assert big.arrays is None
    B1 = greedy_random_triangulation(big, 11)
    B2 = greedy_random_triangulation(big, 11 + 7919)
    assert B1.edge_set == T1.edge_set and B2.edge_set == T2.edge_set
    r = heuristic_distance(B1, B2)
    assert replay(B1, r.witness) == B2
    assert r.lower == distance_lower_bound(T1, T2)
    assert crossing_number(B1, B2) == crossing_number(T1, T2)


def test_restart_count_does_not_hurt():
    T1, T2 = _pair(2, 200, span=2000)
    u1 = heuristic_distance(T1, T2, restarts=1).upper
    u8 = heuristic_distance(T1, T2, restarts=8).upper
    assert u8 <= u1
    assert heuristic_distance(T1, T2, seed=3) == heuristic_distance(T1, T2, seed=3)


def test_linear_regime():
    # regression metric: the greedy walk stays well inside a linear number of steps
    for seed in range(3):
        T1, T2 = _pair(seed, 300, span=3000)
        assert heuristic_distance(T1, T2).upper <= 0.2 * T1.n


pair = st.tuples(st.integers(0, 10**6), st.integers(4, 7))


@settings(max_examples=40)
@given(pair)
def test_exact_matches_bfs(params):
    seed, n = params
    T1, T2 = _pair(seed, n, span=12)
    d = bfs_distance(T1.pointset.points, T1.edges, T2.edges)
    r = exact_distance(T1, T2)
    assert r.exact and r.upper == r.lower == d
    assert replay(T1, r.witness) == T2


@given(st.tuples(st.integers(0, 10**6), st.integers(4, 10)))
def test_sandwich(params):
    seed, n = params
    T1, T2 = _pair(seed, n)
    lb = distance_lower_bound(T1, T2)
    ex = exact_distance(T1, T2)
    back = exact_distance(T2, T1)
    h = heuristic_distance(T1, T2, seed=seed)
    assert lb <= ex.upper == back.upper <= h.upper
    assert h.upper <= sequential_walk_length(T1, T2) <= crossing_number(T1, T2)
    assert replay(T1, h.witness) == T2 and replay(T2, back.witness) == T1


@given(st.tuples(st.integers(0, 10**6), st.integers(4, 9)))
def test_triangle_inequality(params):
    seed, n = params
    rng = np.random.default_rng(seed)
    ps = random_pointset(rng, n, span=30)
    A, B, C = (greedy_random_triangulation(ps, seed + k) for k in range(3))
    ab, bc, ac = (exact_distance(*p).upper for p in ((A, B), (B, C), (A, C)))
    assert ac <= ab + bc


@given(st.tuples(st.integers(0, 10**6), st.integers(20, 120)), st.integers(0, 2**31 - 1))
def test_heuristic_witness_always_replays(params, seed):
    T1, T2 = _pair(params[0], params[1], span=10 * params[1])
    r = heuristic_distance(T1, T2, seed=seed, restarts=2)
    assert distance_lower_bound(T1, T2) == r.lower <= r.upper
    assert replay(T1, r.witness) == T2
