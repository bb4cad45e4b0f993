"""Segmentation of per-object point streams at action-set transitions."""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from .errors import EmptyInput
from .model import (
    SemanticPoint,
    SemanticSequence,
    Subtrajectory,
    Trajectory,
    action_matches,
    base_action,
)


def segment_trajectory(
    points: Sequence[SemanticPoint],
    object_id: str,
    goal: str = "",
    traj_id: int = 0,
    subgoals: Sequence[str] = (),
) -> Trajectory:
    """Split ``points`` into maximal runs of constant action set.

    A new subtrajectory starts at the first point whose action set differs
    from its predecessor's, so the transition sample belongs to the new run.
    Points are re-labelled with the id of the run they end up in; nothing
    else about them changes.
    """
    if not points:
        raise EmptyInput(f"no points for object {object_id!r}")
    runs: list[list[SemanticPoint]] = [[points[0]]]
    for prev, pt in zip(points, points[1:]):
        if pt.actions != prev.actions:
            runs.append([])
        runs[-1].append(pt)
    subs = []
    for sid, run in enumerate(runs):
        pts = tuple(p if p.sub_id == sid else replace(p, sub_id=sid) for p in run)
        subgoal = subgoals[sid] if sid < len(subgoals) else ""
        subs.append(Subtrajectory(sub_id=sid, traj_id=traj_id, points=pts, subgoal=subgoal))
    return Trajectory(traj_id=traj_id, object_id=object_id, subs=tuple(subs), goal=goal)


def compress(tr: Trajectory | Sequence) -> SemanticSequence:
    """Pure semantic sequence: the action set of each run, hand qualifiers dropped.

    Accepts a trajectory or any sequence of action sets (so an already
    compressed sequence maps to itself). Runs that only differ by which hand
    holds the object merge into one token.
    """
    if isinstance(tr, Trajectory):
        raw = [s.actions for s in tr.subs]
    else:
        raw = list(tr)
    tokens: list[frozenset[str]] = []
    for acts in raw:
        tok = frozenset(base_action(a) for a in acts)
        if not tokens or tokens[-1] != tok:
            tokens.append(tok)
    return SemanticSequence(tokens)


def action_intervals(tr: Trajectory, action: str | None) -> list[tuple[float, float]]:
    """Maximal closed intervals during which ``action`` is active.

    ``action=None`` selects any non-empty action set. Intervals are bounded
    by the first and last sample of the contributing runs.
    """
    out: list[tuple[float, float]] = []
    open_start = None
    last_end = None
    for sub in tr.subs:
        if action is None:
            active = bool(sub.actions)
        else:
            active = any(action_matches(a, action) for a in sub.actions)
        if active:
            if open_start is None:
                open_start = sub.t_start
            last_end = sub.t_end
        elif open_start is not None:
            out.append((open_start, last_end))
            open_start = None
    if open_start is not None:
        out.append((open_start, last_end))
    return out
