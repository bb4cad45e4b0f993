"""Group comparison tests.

The nonparametric battery is Kruskal-Wallis followed, when significant, by
Conover-Iman pairwise tests with Holm step-down correction and Cliff's
delta. The parametric battery gates on Levene's test, then runs one-way
ANOVA and pooled-variance t-tests. Tail probabilities come from
:mod:`semtraj._special`.

Groups are passed as a mapping ``label -> values``; iteration order of the
mapping fixes the order of pairs in every result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from ._special import chi2_sf, f_sf, t_sf_two_sided
from .errors import DegenerateInput, EmptyGroup

ALPHA = 0.05
DASH = "–"

Groups = Mapping[str, Sequence[float]]


def _groups(g: Groups, min_groups: int = 2, min_size: int = 1) -> dict[str, np.ndarray]:
    out = {str(k): np.asarray(v, dtype=float) for k, v in g.items()}
    if len(out) < min_groups:
        raise DegenerateInput(f"need at least {min_groups} groups, got {len(out)}")
    for k, v in out.items():
        if v.ndim != 1 or len(v) < min_size:
            raise DegenerateInput(f"group {k!r} needs at least {min_size} values, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise DegenerateInput(f"group {k!r} contains non-finite values")
    return out


def rankdata(x: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(len(x))
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_term(values: np.ndarray) -> float:
    _, counts = np.unique(values, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


class TestResult(NamedTuple):
    statistic: float
    pvalue: float


class AnovaResult(NamedTuple):
    statistic: float
    df1: int
    df2: int
    pvalue: float


class TTestResult(NamedTuple):
    statistic: float
    df: int
    pvalue: float


@dataclass
class _Ranked:
    labels: list[str]
    sizes: np.ndarray
    ranks: list[np.ndarray]
    all_ranks: np.ndarray
    n: int
    h: float


def _rank_groups(g: dict[str, np.ndarray]) -> _Ranked:
    labels = list(g)
    pooled = np.concatenate([g[k] for k in labels])
    n = len(pooled)
    ranks = rankdata(pooled)
    sizes = np.array([len(g[k]) for k in labels])
    splits = np.split(ranks, np.cumsum(sizes)[:-1])
    h = 12.0 / (n * (n + 1.0)) * sum(r.sum() ** 2 / len(r) for r in splits) - 3.0 * (n + 1.0)
    correction = 1.0 - _tie_term(pooled) / (n**3 - n) if n > 1 else 0.0
    h = h / correction if correction > 0 else 0.0
    return _Ranked(labels, sizes, splits, ranks, n, float(max(h, 0.0)))


def kruskal_wallis(g: Groups) -> TestResult:
    """Tie-corrected Kruskal-Wallis H with a chi-square(k-1) tail probability."""
    groups = _groups(g)
    if sum(len(v) for v in groups.values()) < 3:
        raise DegenerateInput("need at least 3 observations in total")
    r = _rank_groups(groups)
    if r.h == 0.0:
        return TestResult(0.0, 1.0)
    return TestResult(r.h, min(1.0, chi2_sf(r.h, len(groups) - 1)))


def holm(pvalues: Sequence[float]) -> list[float]:
    """Holm step-down adjusted p-values, returned in input order."""
    p = list(pvalues)
    m = len(p)
    order = sorted(range(m), key=lambda i: p[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, i in enumerate(order):
        running = max(running, min(1.0, (m - rank) * p[i]))
        adjusted[i] = running
    return adjusted


class PairP(NamedTuple):
    raw_p: float
    holm_p: float


def conover_holm(g: Groups) -> dict[tuple[str, str], PairP]:
    """Conover-Iman pairwise tests on pooled ranks, Holm adjusted.

    Uses the tie-aware rank variance and the tie-corrected H, with Student-t
    tails on N-k degrees of freedom.
    """
    groups = _groups(g, min_size=2)
    r = _rank_groups(groups)
    n, k = r.n, len(groups)
    s2 = float(np.sum(r.all_ranks**2) - n * (n + 1.0) ** 2 / 4.0) / (n - 1.0)
    scale = s2 * (n - 1.0 - r.h) / (n - k)
    means = [float(rk.mean()) for rk in r.ranks]
    pairs = list(combinations(range(k), 2))
    raw = []
    for i, j in pairs:
        diff = abs(means[i] - means[j])
        denom = math.sqrt(max(scale, 0.0) * (1.0 / r.sizes[i] + 1.0 / r.sizes[j]))
        if diff == 0.0:
            raw.append(1.0)
        elif denom == 0.0:
            raw.append(0.0)
        else:
            raw.append(min(1.0, t_sf_two_sided(float(diff / denom), n - k)))
    adj = holm(raw)
    return {(r.labels[i], r.labels[j]): PairP(p, q) for (i, j), p, q in zip(pairs, raw, adj)}


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> float:
    """(#{x > y} - #{x < y}) / (|a| |b|) over all cross pairs.

    >>> cliffs_delta([1, 2, 3], [4, 5, 6])
    -1.0
    """
    a = np.asarray(a, dtype=float)
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise EmptyGroup("Cliff's delta needs two non-empty samples")
    lower = np.searchsorted(b, a, side="left")  # b strictly below each x
    upper = len(b) - np.searchsorted(b, a, side="right")  # b strictly above
    return float((lower.sum() - upper.sum()) / (len(a) * len(b)))


def _ratio_test(num: float, den: float, df1: int, df2: int) -> tuple[float, float]:
    if den == 0.0:
        return (0.0, 1.0) if num == 0.0 else (math.inf, 0.0)
    stat = (num / df1) / (den / df2)
    return stat, min(1.0, f_sf(stat, df1, df2))


def levene(g: Groups, center: str = "mean") -> TestResult:
    """Levene's test on absolute deviations from each group's mean.

    ``center="median"`` gives the Brown-Forsythe variant.
    """
    groups = _groups(g, min_size=2)
    if center not in ("mean", "median"):
        raise ValueError("center must be 'mean' or 'median'")
    loc = np.mean if center == "mean" else np.median
    z = [np.abs(v - loc(v)) for v in groups.values()]
    return TestResult(*_anova_parts(z)[:2])


def _anova_parts(samples: list[np.ndarray]) -> tuple[float, float, int, int]:
    k = len(samples)
    n = sum(len(s) for s in samples)
    grand = float(np.concatenate(samples).mean())
    ssb = math.fsum(len(s) * (float(s.mean()) - grand) ** 2 for s in samples)
    ssw = math.fsum(float(np.sum((s - s.mean()) ** 2)) for s in samples)
    stat, p = _ratio_test(ssb, ssw, k - 1, n - k)
    return stat, p, k - 1, n - k


def anova_oneway(g: Groups) -> AnovaResult:
    groups = _groups(g, min_size=2)
    stat, p, df1, df2 = _anova_parts(list(groups.values()))
    return AnovaResult(stat, df1, df2, p)


def t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sample Student t-test with pooled variance."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise DegenerateInput("t-test needs at least 2 values per sample")
    df = len(a) + len(b) - 2
    pooled = float(np.sum((a - a.mean()) ** 2) + np.sum((b - b.mean()) ** 2)) / df
    diff = float(a.mean() - b.mean())
    se = math.sqrt(pooled * (1.0 / len(a) + 1.0 / len(b)))
    if se == 0.0:
        t = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    else:
        t = diff / se
    return TTestResult(float(t), df, 1.0 if t == 0.0 else min(1.0, t_sf_two_sided(t, df)))


class PairComparison(NamedTuple):
    raw_p: float
    holm_p: float
    delta: float


@dataclass
class ComparisonResult:
    family: str
    omnibus_statistic: float
    omnibus_p: float
    centers: dict[str, float]
    pairs: dict[tuple[str, str], PairComparison] = field(default_factory=dict)
    direction: str = DASH
    levene_p: float | None = None
    alpha: float = ALPHA

    @property
    def significant(self) -> bool:
        return self.omnibus_p < self.alpha


def direction_string(
    centers: Mapping[str, float],
    pairs: Mapping[tuple[str, str], PairComparison],
    alpha: float = ALPHA,
) -> str:
    """Render significant pairwise orderings as tiers, e.g. ``"M, H > C"``.

    Each significant pair becomes an edge from the group with the larger
    center (ties broken by the sign of Cliff's delta). Groups are layered by
    the longest chain of edges above them; groups in no significant pair
    are left out.
    """
    edges = []
    for (a, b), pc in pairs.items():
        if pc.holm_p >= alpha:
            continue
        if centers[a] != centers[b]:
            hi, lo = (a, b) if centers[a] > centers[b] else (b, a)
        elif pc.delta != 0:
            hi, lo = (a, b) if pc.delta > 0 else (b, a)
        else:
            continue
        edges.append((hi, lo))
    if not edges:
        return DASH
    nodes = list(dict.fromkeys(x for e in edges for x in e))
    level = {x: 0 for x in nodes}
    for _ in range(len(nodes)):
        changed = False
        for hi, lo in edges:
            if level[lo] < level[hi] + 1:
                level[lo] = level[hi] + 1
                changed = True
        if not changed:
            break
    tiers: dict[int, list[str]] = {}
    for x in nodes:
        tiers.setdefault(level[x], []).append(x)
    parts = []
    for lvl in sorted(tiers):
        members = sorted(tiers[lvl], key=lambda x: (-centers[x], x))
        parts.append(", ".join(members))
    return " > ".join(parts)


def compare_groups(
    g: Groups,
    family: str = "nonparametric",
    alpha: float = ALPHA,
    levene_center: str = "mean",
) -> ComparisonResult:
    """Omnibus test, then post-hoc pairs and effect sizes if it is significant.

    ``family="parametric"`` first runs Levene's test; when homogeneity is
    rejected at ``alpha`` the nonparametric battery is used instead and the
    result's ``family`` says so.
    """
    groups = _groups(g)
    levene_p = None
    if family == "parametric":
        levene_p = levene(groups, center=levene_center).pvalue
        if levene_p < alpha:
            family = "nonparametric"
    elif family != "nonparametric":
        raise ValueError("family must be 'nonparametric' or 'parametric'")

    if family == "nonparametric":
        centers = {k: float(np.median(v)) for k, v in groups.items()}
        omni = kruskal_wallis(groups)
        res = ComparisonResult("nonparametric", omni.statistic, omni.pvalue, centers, levene_p=levene_p, alpha=alpha)
        if res.significant:
            for pair, pp in conover_holm(groups).items():
                delta = cliffs_delta(groups[pair[0]], groups[pair[1]])
                res.pairs[pair] = PairComparison(pp.raw_p, pp.holm_p, delta)
    else:
        centers = {k: float(np.mean(v)) for k, v in groups.items()}
        omni = anova_oneway(groups)
        res = ComparisonResult("parametric", omni.statistic, omni.pvalue, centers, levene_p=levene_p, alpha=alpha)
        if res.significant:
            pairs = list(combinations(groups, 2))
            raw = [t_test(groups[a], groups[b]).pvalue for a, b in pairs]
            for (a, b), p, q in zip(pairs, raw, holm(raw)):
                res.pairs[(a, b)] = PairComparison(p, q, cliffs_delta(groups[a], groups[b]))
    if res.significant:
        res.direction = direction_string(centers, res.pairs, alpha)
    return res
