import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semtraj.distance import (
    DistanceMatrix,
    classify_edits,
    decimate,
    dfd,
    dtw,
    group_similarity,
    levenshtein,
    pairwise_matrix,
)
from semtraj.errors import EmptyPath, InsufficientGroup
from semtraj.model import SemanticSequence

from oracles import brute_dfd, brute_dtw, naive_levenshtein

E = frozenset()
G = frozenset({"grasp"})
GC = frozenset({"grasp", "cut"})
GCL = frozenset({"grasp", "clean"})
OPTIMAL_CUT = [E, G, GC, G, GC, G, GC, G, E]
ALPHABET = [E, G, GC, GCL]

tokens = st.lists(st.sampled_from(ALPHABET), max_size=8)
coords = st.floats(-1, 1, allow_nan=False)
paths = st.lists(st.tuples(coords, coords, coords), min_size=1, max_size=6)


# --- edit distance ----------------------------------------------------------


def test_levenshtein_examples():
    assert levenshtein(OPTIMAL_CUT, OPTIMAL_CUT) == 0
    assert levenshtein([E, G, E], [E, G, GCL, G, E]) == 2
    assert naive_levenshtein((E, G, E), (E, G, GCL, G, E)) == 2
    assert levenshtein([E], [E, G]) == 1
    assert levenshtein([], []) == 0
    assert levenshtein([], [E, G]) == 2


@given(tokens, tokens)
def test_levenshtein_matches_recursion(a, b):
    d, script = levenshtein(a, b, script=True)
    assert d == naive_levenshtein(tuple(a), tuple(b))
    assert script.cost == d
    assert script.apply(a, b) == b


@given(tokens, tokens, tokens)
def test_levenshtein_is_metric(a, b, c):
    assert levenshtein(a, a) == 0
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
    assert (levenshtein(a, b) == 0) == (a == b)


def test_tie_break_prefers_substitute_then_delete():
    _, s = levenshtein([G], [GC], script=True)
    assert [op.kind for op in s] == ["substitute"]
    _, s = levenshtein([G, GC], [GC], script=True)
    assert [op.kind for op in s] == ["delete", "match"]


def test_classify_edits():
    d, s = levenshtein(OPTIMAL_CUT, OPTIMAL_CUT, script=True)
    assert classify_edits(s) == (0, 0, 0)
    # one extra grasp/release pair before the first cut
    observed = [E, G, E, G, GC, G, GC, G, GC, G, E]
    d, s = levenshtein(observed, OPTIMAL_CUT, script=True)
    assert d == 2 and classify_edits(s) == (2, 0, 0)
    d, s = levenshtein(OPTIMAL_CUT[:-1], OPTIMAL_CUT, script=True)
    assert classify_edits(s) == (0, 1, 0)
    d, s = levenshtein([E, G, GCL, G, E], [E, G, GC, G, E], script=True)
    assert classify_edits(s) == (0, 0, 1)
    assert classify_edits(s, a_is_observed=False) == (0, 0, 1)
    d, s = levenshtein([E, G, E], [E], script=True)
    assert classify_edits(s, a_is_observed=False) == (0, 2, 0)


@given(tokens, tokens)
def test_classification_sums_to_distance(a, b):
    d, s = levenshtein(a, b, script=True)
    assert sum(classify_edits(s)) == d


# --- DTW / DFD --------------------------------------------------------------


def test_dtw_examples():
    p = [(0, 0, 0), (1, 0, 0)]
    assert dtw(p, p) == 0.0
    assert dtw(p, [(0, 0, 0), (2, 0, 0)]) == pytest.approx(1.0, abs=1e-12)
    assert brute_dtw(p, [(0, 0, 0), (2, 0, 0)]) == pytest.approx(1.0, abs=1e-12)
    assert dtw([(0, 0, 0)], [(3, 4, 0)]) == 5.0


def test_dfd_examples():
    p = [(0, 0, 0), (1, 0, 0)]
    assert dfd(p, p) == 0.0
    assert dfd(p, [(0, 1, 0), (1, 1, 0)]) == pytest.approx(1.0, abs=1e-12)
    assert brute_dfd(p, [(0, 1, 0), (1, 1, 0)]) == pytest.approx(1.0, abs=1e-12)
    assert dfd([(0, 0, 0)], [(3, 4, 0)]) == 5.0


def test_empty_and_bad_shapes():
    with pytest.raises(EmptyPath):
        dtw([], [(0, 0, 0)])
    with pytest.raises(EmptyPath):
        dfd(np.zeros((0, 3)), [(0, 0, 0)])
    with pytest.raises(ValueError):
        dtw([(0, 0)], [(0, 0)])


@settings(max_examples=150)
@given(paths, paths)
def test_kernels_match_enumeration(p, q):
    assert abs(dtw(p, q) - brute_dtw(p, q)) <= 1e-9
    assert abs(dfd(p, q) - brute_dfd(p, q)) <= 1e-9


@given(paths, paths)
def test_kernel_properties(p, q):
    assert dtw(p, p) == 0.0 and dfd(p, p) == 0.0
    assert dtw(p, q) == pytest.approx(dtw(q, p), abs=1e-12)
    assert dfd(p, q) == dfd(q, p)
    pa, qa = np.asarray(p), np.asarray(q)
    ends = max(np.linalg.norm(pa[0] - qa[0]), np.linalg.norm(pa[-1] - qa[-1]))
    assert dfd(p, q) >= ends - 1e-12
    assert dfd(p, q) <= dtw(p, q) + 1e-12
    if len(p) == len(q):
        assert dfd(p, q) <= np.linalg.norm(pa - qa, axis=1).max() + 1e-12


def _random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def test_rigid_invariance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p, q = rng.uniform(-1, 1, (rng.integers(1, 30), 3)), rng.uniform(-1, 1, (rng.integers(1, 30), 3))
        r, t = _random_rotation(rng), rng.uniform(-5, 5, 3)
        for f in (dtw, dfd):
            assert abs(f(p @ r.T + t, q @ r.T + t) - f(p, q)) <= 1e-9


# --- matrices ---------------------------------------------------------------


def test_decimate_keeps_last():
    p = np.arange(30, dtype=float).reshape(10, 3)
    assert decimate(p, 1) is p or np.array_equal(decimate(p, 1), p)
    assert decimate(p, 3)[:, 0].tolist() == [0, 9, 18, 27]
    assert decimate(p, 4)[:, 0].tolist() == [0, 12, 24, 27]
    with pytest.raises(ValueError):
        decimate(p, 0)


def _paths(n=5, length=40, seed=0):
    rng = np.random.default_rng(seed)
    return [(f"e{i}", rng.uniform(-1, 1, (length + i, 3))) for i in range(n)]


def test_matrix_examples():
    p = np.random.default_rng(1).uniform(size=(12, 3))
    m = pairwise_matrix([("a", p), ("b", p), ("c", p)])
    assert np.all(m.values == 0)
    (la, a), (lb, b) = _paths(2)
    m = pairwise_matrix([(la, a), (lb, b)], "dfd")
    assert m.values[0, 1] == dfd(a, b) and m.labels == ("e0", "e1")
    with pytest.raises(InsufficientGroup):
        pairwise_matrix([("a", p)])


def test_matrix_symmetry_and_stride_consistency():
    items = _paths()
    for metric in ("dtw", "dfd"):
        m = pairwise_matrix(items, metric, stride=3)
        assert np.array_equal(m.values, m.values.T)
        assert np.all(np.diag(m.values) == 0)
        pre = [(k, decimate(v, 3)) for k, v in items]
        assert np.array_equal(m.values, pairwise_matrix(pre, metric).values)


def test_matrix_parallel_is_bitwise_identical():
    items = _paths(8, 200)
    serial = pairwise_matrix(items, "dtw")
    for w in (2, 3, 8):
        assert np.array_equal(pairwise_matrix(items, "dtw", workers=w).values, serial.values)
    assert np.array_equal(pairwise_matrix(items, "dtw").values, serial.values)


def test_normalize_translation():
    rng = np.random.default_rng(2)
    p = rng.uniform(size=(20, 3))
    m = pairwise_matrix([("a", p), ("b", p + 5.0)], normalize_translation=True)
    assert m.values[0, 1] == pytest.approx(0.0, abs=1e-12)


def test_group_similarity_examples():
    d = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
    sim = group_similarity(DistanceMatrix(("a", "b", "c"), d))
    assert sim["a"].median == 2.0
    assert sim["a"].sd == pytest.approx(math.sqrt(2), abs=1e-15)
    eq = group_similarity(DistanceMatrix(("a", "b", "c"), np.full((3, 3), 4.0) - 4 * np.eye(3)))
    assert all(s == (4.0, 0.0) for s in eq.values())
    two = group_similarity(DistanceMatrix(("a", "b"), np.array([[0, 7.0], [7.0, 0]])))
    assert two["a"] == (7.0, 0.0)
    with pytest.raises(InsufficientGroup):
        group_similarity(DistanceMatrix(("a",), np.zeros((1, 1))))


def test_group_similarity_even_median():
    d = np.zeros((5, 5))
    d[0, 1:] = d[1:, 0] = [1, 2, 4, 8]
    assert group_similarity(DistanceMatrix(tuple("abcde"), d))["a"].median == 3.0


def test_semantic_sequence_tokens_work():
    a = SemanticSequence(OPTIMAL_CUT)
    assert levenshtein(a, OPTIMAL_CUT) == 0
