"""Per-episode behavioral metrics.

All times are derived from action intervals (see
:func:`semtraj.segment.action_intervals`), so task time automatically
excludes the lead-in before the first action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyGroup, NoActions, UnknownObject, UnknownTarget
from .ingest import TaskTemplate
from .model import Episode, base_action
from .segment import action_intervals

Interval = tuple[float, float]


def merge_intervals(intervals: Iterable[Interval]) -> list[Interval]:
    """Union of closed intervals as a sorted list of disjoint intervals."""
    merged: list[list[float]] = []
    for s, e in sorted(intervals):
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged]


def union_measure(intervals: Iterable[Interval]) -> float:
    return math.fsum(e - s for s, e in merge_intervals(intervals))


def activity_intervals(ep: Episode) -> list[Interval]:
    """Intervals where some action is active, pooled over every object."""
    out = []
    for tr in ep.trajectories.values():
        out.extend(action_intervals(tr, None))
    return out


def _task_span(ep: Episode) -> Interval:
    ivs = activity_intervals(ep)
    if not ivs:
        raise NoActions(f"episode {ep.episode_id!r} has no action occurrences")
    return min(s for s, _ in ivs), max(e for _, e in ivs)


def task_time(ep: Episode) -> float:
    start, end = _task_span(ep)
    return end - start


def idle_time(ep: Episode) -> float:
    """Part of the task span during which no object has any action active."""
    start, end = _task_span(ep)
    span = end - start
    return max(0.0, span - union_measure(activity_intervals(ep)))


def _trajectories(ep: Episode, object_id: str | None):
    if object_id is None:
        return list(ep.trajectories.values())
    if object_id not in ep.trajectories:
        raise UnknownObject(object_id)
    return [ep.trajectories[object_id]]


def action_count(ep: Episode, object_id: str | None, action: str) -> int:
    """Number of maximal ``action`` intervals, on one object or summed over all."""
    return sum(len(action_intervals(tr, action)) for tr in _trajectories(ep, object_id))


def object_action_time(ep: Episode, object_id: str, action: str) -> float:
    """Summed length of the object's ``action`` intervals (release gaps excluded)."""
    (tr,) = _trajectories(ep, object_id)
    return math.fsum(e - s for s, e in action_intervals(tr, action))


def balance_ratio(n_left: int, n_right: int) -> float | None:
    hi = max(n_left, n_right)
    if n_left + n_right == 0:
        return None
    return min(n_left, n_right) / hi


def hand_balance(ep: Episode, action: str = "grasp") -> float | None:
    """min/max ratio of left- vs right-hand grasp occurrences.

    Hands are read from ``grasp@left`` / ``grasp@right`` labels; bare
    ``grasp`` counts toward neither. ``None`` when no hand-attributed grasp
    exists.
    """
    n_left = action_count(ep, None, f"{action}@left")
    n_right = action_count(ep, None, f"{action}@right")
    return balance_ratio(n_left, n_right)


@dataclass(frozen=True)
class PointingSummary:
    distances: tuple[tuple[str, float], ...]
    mean: float | None
    sd: float | None


def pointing_distance(hit: Sequence[float], center: Sequence[float]) -> float:
    return float(np.linalg.norm(np.asarray(center, float) - np.asarray(hit, float)))


def pointing_precision(ep: Episode, tmpl: TaskTemplate) -> PointingSummary:
    """Euclidean hit-to-center distance for every pointing event.

    ``mean``/``sd`` are the arithmetic mean and population SD over the
    episode's events (``None`` if the episode has none).
    """
    dists = []
    for ev in ep.events:
        if ev.target_id not in tmpl.targets:
            raise UnknownTarget(ev.target_id)
        dists.append((ev.target_id, pointing_distance(ev.hit_position, tmpl.targets[ev.target_id])))
    if not dists:
        return PointingSummary((), None, None)
    d = np.array([v for _, v in dists])
    return PointingSummary(tuple(dists), float(d.mean()), float(d.std()))


def group_precision_stats(episodes: Sequence[Episode], tmpl: TaskTemplate) -> dict[str, tuple[float, float]]:
    """Pooled mean and population SD of pointing distance per condition."""
    pooled: dict[str, list[float]] = {}
    for ep in episodes:
        pooled.setdefault(ep.condition, []).extend(d for _, d in pointing_precision(ep, tmpl).distances)
    out = {}
    for cond, vals in pooled.items():
        if not vals:
            raise EmptyGroup(f"condition {cond!r} has no pointing events")
        arr = np.array(vals)
        out[cond] = (float(arr.mean()), float(arr.std()))
    return out


@dataclass(frozen=True)
class EpisodeMetrics:
    task_time: float
    idle_time: float
    grasp_count: int
    per_object_action_time: dict[tuple[str, str], float] = field(default_factory=dict)
    per_object_action_count: dict[tuple[str, str], int] = field(default_factory=dict)
    hand_balance: float | None = None
    pointing_distances: tuple[tuple[str, float], ...] = ()


def observed_actions(ep: Episode) -> dict[str, list[str]]:
    """Base action labels seen on each object, sorted."""
    out = {}
    for oid, tr in ep.trajectories.items():
        labels = {base_action(a) for sub in tr.subs for a in sub.actions}
        out[oid] = sorted(labels)
    return out


def episode_metrics(ep: Episode, tmpl: TaskTemplate | None = None) -> EpisodeMetrics:
    has_actions = bool(activity_intervals(ep))
    times, counts = {}, {}
    for oid, actions in observed_actions(ep).items():
        for a in actions:
            times[(oid, a)] = object_action_time(ep, oid, a)
            counts[(oid, a)] = action_count(ep, oid, a)
    pointing = ()
    if tmpl is not None and ep.events:
        pointing = pointing_precision(ep, tmpl).distances
    return EpisodeMetrics(
        task_time=task_time(ep) if has_actions else 0.0,
        idle_time=idle_time(ep) if has_actions else 0.0,
        grasp_count=action_count(ep, None, "grasp"),
        per_object_action_time=times,
        per_object_action_count=counts,
        hand_balance=hand_balance(ep),
        pointing_distances=pointing,
    )
