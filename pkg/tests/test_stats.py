import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semtraj.errors import DegenerateInput, EmptyGroup
from semtraj.stats import (
    DASH,
    PairComparison,
    anova_oneway,
    cliffs_delta,
    compare_groups,
    conover_holm,
    direction_string,
    holm,
    kruskal_wallis,
    levene,
    rankdata,
    t_test,
)

from oracle_values import STATS_DATASETS

TOL = 1e-6


@pytest.mark.parametrize("name", list(STATS_DATASETS))
def test_against_frozen_reference(name):
    ref = STATS_DATASETS[name]
    g = ref["data"]
    a, b = list(g.values())[:2]
    checks = {
        "kw": kruskal_wallis(g),
        "levene": levene(g),
        "anova": anova_oneway(g),
        "ttest": t_test(a, b),
    }
    for key, res in checks.items():
        stat, p = ref[key]
        assert abs(res.pvalue - p) <= TOL, key
        assert res.statistic == pytest.approx(stat, rel=1e-9, abs=1e-12), key
    ours = conover_holm(g)
    for pair, (raw, adj) in ref["conover"].items():
        assert abs(ours[pair].raw_p - raw) <= TOL
        assert abs(ours[pair].holm_p - adj) <= TOL


def test_rankdata_midranks():
    assert rankdata(np.array([3.0, 1.0, 3.0, 2.0])).tolist() == [3.5, 1.0, 3.5, 2.0]


def test_kruskal_trivial_and_ordered():
    assert kruskal_wallis({"a": [5, 5], "b": [5, 5], "c": [5]}) == (0.0, 1.0)
    h, p = kruskal_wallis({"a": [1, 2, 3], "b": [4, 5, 6], "c": [7, 8, 9]})
    assert h == pytest.approx(7.2, abs=1e-12)
    assert p == pytest.approx(math.exp(-3.6), rel=1e-12)  # chi2(2) tail is exp(-x/2)
    with pytest.raises(DegenerateInput):
        kruskal_wallis({"a": [1, 2], "b": []})


def test_kruskal_two_groups():
    # two groups: H equals the squared normal score of the rank sum
    a, b = [1.1, 2.3, 3.0, 4.8], [2.0, 5.5, 6.1, 7.7, 8.0]
    h, p = kruskal_wallis({"a": a, "b": b})
    n1, n2 = len(a), len(b)
    w = rankdata(np.array(a + b))[:n1].sum()
    z = (w - n1 * (n1 + n2 + 1) / 2) / math.sqrt(n1 * n2 * (n1 + n2 + 1) / 12)
    assert h == pytest.approx(z * z, rel=1e-12)
    assert p == pytest.approx(math.erfc(abs(z) / math.sqrt(2)), rel=1e-10)


def test_holm_examples():
    assert holm([0.01, 0.02, 0.04]) == pytest.approx([0.03, 0.04, 0.04], abs=1e-15)
    assert holm([0.04, 0.01, 0.02]) == pytest.approx([0.04, 0.03, 0.04], abs=1e-15)
    assert holm([0.5, 0.9]) == [1.0, 1.0]


@given(st.lists(st.floats(0, 1), min_size=1, max_size=10))
def test_holm_properties(p):
    adj = holm(p)
    order = sorted(range(len(p)), key=lambda i: p[i])
    for x, y in zip(order, order[1:]):
        assert adj[x] <= adj[y]
    assert all(r <= a <= 1 for r, a in zip(p, adj))


def test_conover_examples():
    same = conover_holm({"a": [1, 2, 3, 4], "b": [1, 2, 3, 4], "c": [9, 10, 11, 12]})
    assert same[("a", "b")].raw_p == 1.0 and same[("a", "b")].holm_p == 1.0
    sep = conover_holm({"a": list(range(10)), "b": list(range(10, 20)), "c": list(range(20, 30))})
    assert all(pp.holm_p < 0.05 for pp in sep.values())
    with pytest.raises(DegenerateInput):
        conover_holm({"a": [1], "b": [2, 3]})


def test_cliffs_delta():
    assert cliffs_delta([1, 2, 3], [4, 5, 6]) == -1.0
    assert cliffs_delta([1, 2, 2, 5], [1, 2, 2, 5]) == 0.0
    assert cliffs_delta([1, 3], [2]) == 0.0
    with pytest.raises(EmptyGroup):
        cliffs_delta([], [1])


small = st.lists(st.integers(-20, 20).map(float), min_size=1, max_size=12)


@given(small, small, st.integers(-100, 100))
def test_cliffs_antisymmetric_and_shift_free(a, b, c):
    d = cliffs_delta(a, b)
    assert -1 <= d <= 1
    assert cliffs_delta(b, a) == -d
    assert cliffs_delta([x + c for x in a], [y + c for y in b]) == d


def test_levene_examples():
    base = [1.0, 2.0, 4.0, 7.0]
    w, p = levene({"a": base, "b": [x + 10 for x in base], "c": [x - 3 for x in base]})
    assert w == pytest.approx(0.0, abs=1e-12) and p == pytest.approx(1.0, abs=1e-12)
    spread = levene({"a": [5.0] * 10, "b": [0, 10, -5, 15, 3, -9, 20, -12, 7, 1]})
    assert spread.pvalue < 0.05
    bf = levene({"a": [1, 2, 3, 4, 50], "b": [2, 3, 4, 5, 6]}, center="median")
    assert 0 <= bf.pvalue <= 1
    with pytest.raises(DegenerateInput):
        levene({"a": [1.0], "b": [1.0, 2.0]})


def test_anova_examples():
    res = anova_oneway({"a": [1.0, 2.0, 3.0], "b": [3.0, 2.0, 1.0]})
    assert res.statistic == 0.0 and res.pvalue == 1.0 and (res.df1, res.df2) == (1, 4)
    with pytest.raises(DegenerateInput):
        anova_oneway({"a": [1.0, 2.0], "b": [3.0]})


def test_t_test_examples():
    assert t_test([1, 2, 3], [1, 2, 3]) == (0.0, 4, 1.0)
    a, b = [4.1, 5.0, 6.2, 5.5], [6.0, 7.1, 6.6, 8.0, 7.2]
    r, s = t_test(a, b), t_test(b, a)
    assert r.statistic == -s.statistic and r.pvalue == s.pvalue and r.df == 7
    with pytest.raises(DegenerateInput):
        t_test([1.0], [1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=9, max_size=24), st.floats(0.1, 10), st.floats(-5, 5))
def test_affine_and_rank_invariance(x, alpha, beta):
    x = [round(v, 2) for v in x]
    k = len(x) // 3
    g = {"a": x[:k], "b": x[k:2 * k], "c": x[2 * k:]}
    if len(set(x)) < 2 or any(len(set(v)) < 2 for v in g.values()):
        return
    affine = {key: [alpha * v + beta for v in vals] for key, vals in g.items()}
    f1, f2 = anova_oneway(g).statistic, anova_oneway(affine).statistic
    assert f2 == pytest.approx(f1, rel=1e-6, abs=1e-9)
    t1, t2 = t_test(g["a"], g["b"]).statistic, t_test(affine["a"], affine["b"]).statistic
    assert t2 == pytest.approx(t1, rel=1e-6, abs=1e-9)
    # strictly increasing map preserves every rank, so rank statistics agree exactly
    mono = {key: [math.exp(v / 10.0) + v for v in vals] for key, vals in g.items()}
    assert kruskal_wallis(mono) == kruskal_wallis(g)
    assert conover_holm(mono) == conover_holm(g)


def test_compare_groups_identical():
    g = {"M": [1.0, 2.0, 3.0], "H": [1.0, 2.0, 3.0], "C": [1.0, 2.0, 3.0]}
    res = compare_groups(g)
    assert res.omnibus_p == 1.0 and res.direction == DASH and not res.pairs


def test_compare_groups_forced_order():
    g = {"C1": list(range(1, 11)), "C2": list(range(11, 21)), "C3": list(range(21, 31))}
    res = compare_groups(g)
    assert res.direction == "C3 > C2 > C1"
    assert res.pairs[("C1", "C3")].delta == -1.0
    assert compare_groups(g) == res


def test_compare_groups_parametric():
    rng = np.random.default_rng(0)
    g = {"M": rng.normal(9, 2, 20).tolist(), "H": rng.normal(6, 2, 20).tolist(), "C": rng.normal(6.2, 2, 20).tolist()}
    res = compare_groups(g, family="parametric")
    assert res.family == "parametric" and res.levene_p > 0.05
    assert res.direction.startswith("M >")
    for pc in res.pairs.values():
        assert pc.raw_p <= pc.holm_p <= 1
    hetero = {"a": [5.0, 5.1, 4.9, 5.0, 5.05] * 2, "b": [0, 10, -5, 15, 3, -9, 20, -12, 7, 1]}
    assert compare_groups(hetero, family="parametric").family == "nonparametric"
    with pytest.raises(ValueError):
        compare_groups(g, family="bayes")


def test_direction_strings():
    centers = {"M": 3.0, "H": 2.0, "C": 1.0}
    sig, ns = PairComparison(0.01, 0.01, 0.8), PairComparison(0.5, 0.5, 0.1)
    assert direction_string(centers, {("M", "H"): ns, ("M", "C"): sig, ("H", "C"): ns}) == "M > C"
    assert direction_string(centers, {("M", "H"): ns, ("M", "C"): sig, ("H", "C"): sig}) == "M, H > C"
    assert direction_string(centers, {("M", "H"): ns, ("M", "C"): ns, ("H", "C"): ns}) == DASH


def test_partial_direction_from_data():
    g = {"M": [8, 8, 10, 11, 11, 11], "H": [4, 4, 5, 9, 10, 10], "C": [3, 4, 5, 6, 7, 9]}
    res = compare_groups(g)
    sig = [p for p, pc in res.pairs.items() if pc.holm_p < 0.05]
    assert res.significant and sig == [("M", "C")]
    assert res.direction == "M > C"
