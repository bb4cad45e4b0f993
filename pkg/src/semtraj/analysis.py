"""Per-episode metric rows and per-group comparison reports.

This is the layer the command line drives; it is also usable directly:

>>> rows = [analyze_episode(ep, tmpl) for ep in episodes]      # doctest: +SKIP
>>> report = compare_episodes(episodes, tmpl, group_by="condition")  # doctest: +SKIP
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distance import classify_edits, group_similarity, levenshtein, pairwise_matrix
from .errors import DegenerateInput, InsufficientGroup
from .ingest import TaskTemplate
from .metrics import (
    action_count,
    activity_intervals,
    hand_balance,
    idle_time,
    object_action_time,
    observed_actions,
    pointing_precision,
    task_time,
)
from .model import Episode, SemanticSequence, base_action
from .segment import compress
from .stats import ALPHA, DASH, ComparisonResult, compare_groups

ID_COLUMNS = ("episode_id", "participant_id", "condition", "task_id")
GENERAL_COLUMNS = (
    "task_time",
    "idle_time",
    "grasp_count",
    "hand_balance",
    "levenshtein",
    "unnecessary",
    "missing",
    "wrong",
    "errors",
)
_ABSENT = SemanticSequence([frozenset()])


def _objects_and_actions(ep: Episode, tmpl: TaskTemplate | None) -> dict[str, list[str]]:
    table: dict[str, set[str]] = {}
    if tmpl is not None:
        for obj, seq in tmpl.optimal.items():
            table.setdefault(obj, set()).update(a for tok in seq for a in tok)
        for r in tmpl.action_rules:
            table.setdefault(r.object_id, set()).add(base_action(r.action))
    for obj, acts in observed_actions(ep).items():
        table.setdefault(obj, set()).update(acts)
    return {obj: sorted(acts) for obj, acts in sorted(table.items())}


def analyze_episode(ep: Episode, tmpl: TaskTemplate | None = None) -> dict:
    """One flat row of metrics for ``ep``; column order is deterministic.

    Counts and times of actions an object never performed are 0. Objects the
    template expects but the recording lacks are scored as if they stayed
    untouched (a single empty-action token).
    """
    has_actions = bool(activity_intervals(ep))
    row: dict = {c: getattr(ep, c) for c in ID_COLUMNS}
    row["unit_scale"] = ep.unit_scale
    row["task_time"] = task_time(ep) if has_actions else None
    row["idle_time"] = idle_time(ep) if has_actions else None
    row["grasp_count"] = action_count(ep, None, "grasp")
    row["hand_balance"] = hand_balance(ep)

    per_object: dict = {}
    if tmpl is not None and tmpl.optimal:
        total = unnecessary = missing = wrong = 0
        for obj, optimal in tmpl.optimal.items():
            observed = compress(ep.trajectories[obj]) if obj in ep.trajectories else _ABSENT
            dist, script = levenshtein(observed, optimal, script=True)
            summary = classify_edits(script, a_is_observed=True)
            per_object[f"levenshtein:{obj}"] = dist
            total += dist
            unnecessary += summary.unnecessary
            missing += summary.missing
            wrong += summary.wrong
        row.update(levenshtein=total, unnecessary=unnecessary, missing=missing, wrong=wrong)
    else:
        row.update(levenshtein=None, unnecessary=None, missing=None, wrong=None)
    row["errors"] = count_errors(ep, tmpl) if tmpl is not None else None
    row.update(per_object)

    for obj, actions in _objects_and_actions(ep, tmpl).items():
        for a in actions:
            present = obj in ep.trajectories
            row[f"count:{obj}:{a}"] = action_count(ep, obj, a) if present else 0
            row[f"time:{obj}:{a}"] = object_action_time(ep, obj, a) if present else 0.0

    if tmpl is not None and ep.events:
        summary = pointing_precision(ep, tmpl)
        row["pointing_mean_cm"] = summary.mean * 100.0
        row["pointing_sd_cm"] = summary.sd * 100.0
    return row


def count_errors(ep: Episode, tmpl: TaskTemplate) -> int:
    """Violated action rules plus required objects that saw no action at all."""
    errors = 0
    for rule in tmpl.action_rules:
        n = action_count(ep, rule.object_id, rule.action) if rule.object_id in ep.trajectories else 0
        errors += not rule.check(n)
    for obj in tmpl.required_objects:
        tr = ep.trajectories.get(obj)
        if tr is None or not any(s.actions for s in tr.subs):
            errors += 1
    return errors


def table_columns(rows: Sequence[dict]) -> list[str]:
    """Union of row keys: fixed columns first, then per-object columns sorted."""
    fixed = [*ID_COLUMNS, "unit_scale", *GENERAL_COLUMNS]
    extra = sorted({k for r in rows for k in r} - set(fixed), key=_column_key)
    return fixed + extra


def _column_key(col: str):
    kinds = {"levenshtein": 0, "count": 1, "time": 2, "pointing_mean_cm": 3, "pointing_sd_cm": 4}
    head = col.split(":", 1)[0]
    return (kinds.get(head, 5), col)


# --- group comparison -------------------------------------------------------


@dataclass
class ReportRow:
    metric: str
    values: dict[str, list[float]]
    result: ComparisonResult | None
    note: str = ""


@dataclass
class ReportSection:
    title: str
    rows: list[ReportRow] = field(default_factory=list)


@dataclass
class GroupReport:
    group_by: str
    groups: list[str]
    sections: list[ReportSection]
    unit_scale: float = 1.0
    alpha: float = ALPHA


def object_path(ep: Episode, obj: str, tmpl: TaskTemplate | None) -> np.ndarray | None:
    """Positions used for spatial comparison of ``obj``.

    The whole trajectory, or only the runs where the template's
    ``distance_action`` is active (e.g. the cutting strokes of a knife).
    """
    tr = ep.trajectories.get(obj)
    if tr is None:
        return None
    action = tmpl.distance_action.get(obj) if tmpl is not None else None
    if action is None:
        return tr.positions()
    pts = [
        p.pose.position
        for s in tr.subs
        if any(base_action(a) == action for a in s.actions)
        for p in s.points
    ]
    return np.array(pts, dtype=float).reshape(-1, 3) if pts else None


def _compare_row(metric, values, alpha, family):
    values = {g: v for g, v in values.items() if v}
    if len(values) < 2:
        return ReportRow(metric, values, None, "fewer than two groups with data")
    try:
        res = compare_groups(values, family=family, alpha=alpha)
    except DegenerateInput as exc:
        return ReportRow(metric, values, None, str(exc))
    return ReportRow(metric, values, res)


def _by_group(rows, episodes, group_by, groups, key):
    out = {g: [] for g in groups}
    for row, ep in zip(rows, episodes):
        v = row.get(key)
        if v is not None and not (isinstance(v, float) and math.isnan(v)):
            out[str(getattr(ep, group_by))].append(float(v))
    return out


_LABELS = {
    "task_time": "Task Time",
    "idle_time": "Idle Time",
    "grasp_count": "Grasp Count",
    "hand_balance": "Balance",
    "levenshtein": "Levenshtein D.",
    "unnecessary": "Unnecessary Actions",
    "missing": "Missing Actions",
    "wrong": "Wrong Actions",
    "errors": "Errors",
    "pointing_mean_cm": "Pointing Distance (cm)",
}


def compare_episodes(
    episodes: Sequence[Episode],
    tmpl: TaskTemplate | None = None,
    group_by: str = "condition",
    stride: int = 1,
    normalize_translation: bool = False,
    alpha: float = ALPHA,
    assume_normal: bool = False,
    group_order: Sequence[str] | None = None,
    workers: int | None = None,
) -> GroupReport:
    """Compare groups of episodes on every metric, in the appendix-table layout."""
    if not episodes:
        raise InsufficientGroup("no episodes")
    labels = sorted({str(getattr(ep, group_by)) for ep in episodes})
    groups = [g for g in group_order if g in labels] if group_order else labels
    if len(groups) < 2:
        raise InsufficientGroup(f"need at least 2 groups by {group_by!r}, found {labels}")
    for g in groups:
        n = sum(str(getattr(ep, group_by)) == g for ep in episodes)
        if n < 2:
            raise InsufficientGroup(f"group {g!r} has {n} episode(s); need at least 2")
    family = "parametric" if assume_normal else "nonparametric"
    selected = [ep for ep in episodes if str(getattr(ep, group_by)) in groups]

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda ep: analyze_episode(ep, tmpl), selected))
    else:
        rows = [analyze_episode(ep, tmpl) for ep in selected]
    columns = table_columns(rows)

    def row_for(metric, key):
        return _compare_row(metric, _by_group(rows, selected, group_by, groups, key), alpha, family)

    sections = []
    general = ReportSection("General Metrics")
    for key in GENERAL_COLUMNS:
        if any(r.get(key) is not None for r in rows):
            general.rows.append(row_for(_LABELS[key], key))
    for col in columns:
        if col.startswith("count:") and not col.endswith(":grasp"):
            _, obj, action = col.split(":")
            general.rows.append(row_for(f"{action.capitalize()} Count ({obj})", col))
    if any("pointing_mean_cm" in r for r in rows):
        general.rows.append(row_for(_LABELS["pointing_mean_cm"], "pointing_mean_cm"))
    sections.append(general)

    grasp = ReportSection("Object Grasp Time (s)")
    for col in columns:
        if col.startswith("time:") and col.endswith(":grasp"):
            grasp.rows.append(row_for(col.split(":")[1], col))
    if grasp.rows:
        for r, ep in zip(rows, selected):
            r["_overall_grasp"] = math.fsum(v for k, v in r.items() if k.startswith("time:") and k.endswith(":grasp"))
        grasp.rows.append(row_for("Overall Grasp Time", "_overall_grasp"))
        sections.append(grasp)

    other = ReportSection("Object Action Time (s)")
    for col in columns:
        if col.startswith("time:") and not col.endswith(":grasp"):
            _, obj, action = col.split(":")
            other.rows.append(row_for(f"{obj} {action}", col))
    if other.rows:
        sections.append(other)

    objects = list(tmpl.required_objects) if tmpl is not None and tmpl.required_objects else sorted(
        {o for ep in selected for o in ep.trajectories}
    )
    sim_sections = {k: ReportSection(k) for k in ("DTW Median", "DTW SD", "DFD Median", "DFD SD")}
    for obj in objects:
        for metric in ("dtw", "dfd"):
            med = {g: [] for g in groups}
            sd = {g: [] for g in groups}
            for g in groups:
                paths = []
                for ep in selected:
                    if str(getattr(ep, group_by)) != g:
                        continue
                    path = object_path(ep, obj, tmpl)
                    if path is not None and len(path):
                        paths.append((ep.episode_id, path))
                if len(paths) < 2:
                    continue
                matrix = pairwise_matrix(paths, metric, stride, normalize_translation, workers)
                for sim in group_similarity(matrix).values():
                    med[g].append(sim.median)
                    sd[g].append(sim.sd)
            name = metric.upper()
            sim_sections[f"{name} Median"].rows.append(_compare_row(obj, med, alpha, family))
            sim_sections[f"{name} SD"].rows.append(_compare_row(obj, sd, alpha, family))
    sections.extend(s for s in sim_sections.values() if s.rows)

    scales = {ep.unit_scale for ep in selected}
    return GroupReport(group_by, groups, sections, scales.pop() if len(scales) == 1 else math.nan, alpha)


def direction_of(row: ReportRow) -> str:
    return row.result.direction if row.result is not None else DASH
