"""Sequence and path distances.

* :func:`levenshtein` compares semantic sequences (tokens are action sets)
  and can return an optimal edit script.
* :func:`dtw` and :func:`dfd` compare spatial paths using the Euclidean
  ground distance on positions.
* :func:`pairwise_matrix` and :func:`group_similarity` summarise how alike
  the paths within one group are.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from ._kernels import dfd_kernel, dtw_kernel
from .errors import EmptyPath, InsufficientGroup


class EditOp(NamedTuple):
    kind: str  # "match" | "substitute" | "insert" | "delete"
    i: int | None  # index into the source sequence
    j: int | None  # index into the target sequence


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]

    @property
    def cost(self) -> int:
        return sum(op.kind != "match" for op in self.ops)

    def apply(self, a: Sequence, b: Sequence) -> list:
        """Replay the script on ``a``; the result equals ``b`` for a valid script."""
        out = []
        for op in self.ops:
            if op.kind == "match":
                out.append(a[op.i])
            elif op.kind in ("substitute", "insert"):
                out.append(b[op.j])
        return out

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)


def _edit_table(a: Sequence, b: Sequence) -> list[list[int]]:
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ai = a[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ai != b[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)
    return d


def levenshtein(a: Sequence, b: Sequence, script: bool = False):
    """Unit-cost edit distance between two token sequences.

    Tokens compare with ``==``, so action sets match only when identical.
    With ``script=True`` returns ``(distance, EditScript)``; the traceback
    prefers match, then substitute, then delete, then insert.

    >>> levenshtein([frozenset()], [frozenset(), frozenset({"grasp"})])
    1
    """
    a, b = list(a), list(b)
    d = _edit_table(a, b)
    dist = d[len(a)][len(b)]
    if not script:
        return dist
    ops = []
    i, j = len(a), len(b)
    while i > 0 or j > 0:
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and d[i][j] == d[i - 1][j - 1]:
            ops.append(EditOp("match", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + 1:
            ops.append(EditOp("substitute", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            ops.append(EditOp("delete", i - 1, None))
            i -= 1
        else:
            ops.append(EditOp("insert", None, j - 1))
            j -= 1
    return dist, EditScript(tuple(reversed(ops)))


class EditSummary(NamedTuple):
    unnecessary: int
    missing: int
    wrong: int


def classify_edits(script: EditScript, a_is_observed: bool = True) -> EditSummary:
    """Count unnecessary, missing and wrong actions in an edit script.

    Tokens only present in the observed sequence are unnecessary, tokens
    only present in the optimal one are missing, substitutions are wrong.
    """
    deletes = sum(op.kind == "delete" for op in script.ops)
    inserts = sum(op.kind == "insert" for op in script.ops)
    subs = sum(op.kind == "substitute" for op in script.ops)
    if a_is_observed:
        return EditSummary(deletes, inserts, subs)
    return EditSummary(inserts, deletes, subs)


def _as_path(p) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(p, dtype=np.float64))
    if arr.size == 0:
        raise EmptyPath("path is empty")
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array of points, got shape {arr.shape}")
    return arr


def dtw(p, q) -> float:
    """Dynamic time warping with summed Euclidean cost and no window.

    >>> dtw([(0, 0, 0), (1, 0, 0)], [(0, 0, 0), (2, 0, 0)])
    1.0
    """
    return float(dtw_kernel(_as_path(p), _as_path(q)))


def dfd(p, q) -> float:
    """Discrete Fréchet distance (Eiter and Mannila recurrence).

    >>> dfd([(0, 0, 0)], [(3, 4, 0)])
    5.0
    """
    return float(dfd_kernel(_as_path(p), _as_path(q)))


METRICS = {"dtw": dtw_kernel, "dfd": dfd_kernel}


def decimate(path, stride: int) -> np.ndarray:
    """Every ``stride``-th point, always keeping the last one."""
    arr = _as_path(path)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if stride == 1:
        return arr
    idx = list(range(0, len(arr), stride))
    if idx[-1] != len(arr) - 1:
        idx.append(len(arr) - 1)
    return np.ascontiguousarray(arr[idx])


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __getitem__(self, key):
        i, j = key
        return self.values[self.labels.index(i), self.labels.index(j)]


def pairwise_matrix(
    paths: Mapping[str, object] | Sequence[tuple[str, object]],
    metric: str = "dtw",
    stride: int = 1,
    normalize_translation: bool = False,
    workers: int | None = None,
) -> DistanceMatrix:
    """Symmetric matrix of path distances between every pair of labelled paths.

    Only the upper triangle is computed and mirrored, so the result is
    exactly symmetric and does not depend on ``workers``.
    """
    items = list(paths.items()) if isinstance(paths, Mapping) else list(paths)
    if len(items) < 2:
        raise InsufficientGroup(f"need at least 2 paths, got {len(items)}")
    kernel = METRICS[metric]
    labels = tuple(str(lbl) for lbl, _ in items)
    arrs = []
    for _, p in items:
        arr = decimate(p, stride)
        if normalize_translation:
            arr = np.ascontiguousarray(arr - arr[0])
        arrs.append(arr)
    n = len(arrs)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if workers is None or workers <= 1:
        vals = [kernel(arrs[i], arrs[j]) for i, j in pairs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(lambda ij: kernel(arrs[ij[0]], arrs[ij[1]]), pairs))
    out = np.zeros((n, n))
    for (i, j), v in zip(pairs, vals):
        out[i, j] = out[j, i] = v
    return DistanceMatrix(labels, out)


class Similarity(NamedTuple):
    median: float
    sd: float


def group_similarity(matrix: DistanceMatrix) -> dict[str, Similarity]:
    """Median and sample SD of each item's distances to every other item.

    With a single other item the SD is defined as 0.
    """
    n = len(matrix.labels)
    if n < 2:
        raise InsufficientGroup(f"need at least 2 items, got {n}")
    out = {}
    for i, label in enumerate(matrix.labels):
        others = np.delete(matrix.values[i], i)
        sd = float(np.std(others, ddof=1)) if len(others) > 1 else 0.0
        out[label] = Similarity(float(np.median(others)), sd)
    return out
