"""Domain types for recorded task executions.

A recording is an :class:`Episode`: one participant performing one task
under one condition. Each manipulated object contributes a
:class:`Trajectory`, which is a list of :class:`Subtrajectory` runs, each
holding :class:`SemanticPoint` samples that share an identical action set.

All types are frozen dataclasses. Positions are meters, times are seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

HANDS = ("left", "right", "unspecified")
QUAT_TOL = 1e-6
# Quaternions this close to unit norm are left untouched so that written
# values parse back bit-for-bit.
_RENORM_EPS = 1e-12


def normalize_label(label: str) -> str:
    return label.strip().lower()


def base_action(label: str) -> str:
    """Strip a hand qualifier: ``"grasp@left"`` -> ``"grasp"``."""
    return label.split("@", 1)[0]


def action_matches(label: str, action: str) -> bool:
    """True if ``label`` counts as an occurrence of ``action``.

    A qualified query (``grasp@left``) matches only that exact label; an
    unqualified one matches any hand.
    """
    if "@" in action:
        return label == action
    return base_action(label) == action


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        q = tuple(float(v) for v in self.orientation)
        if len(pos) != 3 or len(q) != 4:
            raise ValueError("pose needs a 3-vector position and a (w, x, y, z) quaternion")
        norm = math.sqrt(sum(v * v for v in q))
        if math.isfinite(norm) and norm > 0 and abs(norm - 1.0) > _RENORM_EPS:
            q = tuple(v / norm for v in q)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", q)


@dataclass(frozen=True)
class SemanticPoint:
    point_id: int
    sub_id: int
    pose: Pose
    t: float
    actions: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "actions", frozenset(normalize_label(a) for a in self.actions))


def make_point(point_id: int, sub_id: int, position, orientation, t: float, actions: frozenset[str]) -> SemanticPoint:
    """Build a point from values that are already floats, unit and lowercase.

    Skips the per-field coercion of the regular constructors; meant for bulk
    producers (the generator) that guarantee those properties themselves.
    """
    pose = object.__new__(Pose)
    object.__setattr__(pose, "__dict__", {"position": position, "orientation": orientation})
    pt = object.__new__(SemanticPoint)
    fields = {"point_id": point_id, "sub_id": sub_id, "pose": pose, "t": t, "actions": actions}
    object.__setattr__(pt, "__dict__", fields)
    return pt


@dataclass(frozen=True)
class Subtrajectory:
    sub_id: int
    traj_id: int
    points: tuple[SemanticPoint, ...]
    subgoal: str = ""

    @property
    def t_start(self) -> float:
        return self.points[0].t

    @property
    def t_end(self) -> float:
        return self.points[-1].t

    @property
    def actions(self) -> frozenset[str]:
        return self.points[0].actions

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Trajectory:
    traj_id: int
    object_id: str
    subs: tuple[Subtrajectory, ...]
    goal: str = ""

    def points(self) -> Iterator[SemanticPoint]:
        for sub in self.subs:
            yield from sub.points

    def __len__(self) -> int:
        return sum(len(s) for s in self.subs)

    def positions(self) -> np.ndarray:
        """``(n, 3)`` array of positions in meters."""
        return np.array([p.pose.position for p in self.points()], dtype=float).reshape(-1, 3)

    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.points()], dtype=float)


@dataclass(frozen=True)
class PointingEvent:
    target_id: str
    hit_position: tuple[float, float, float]
    t: float
    hand: str = "unspecified"

    def __post_init__(self):
        object.__setattr__(self, "hit_position", tuple(float(v) for v in self.hit_position))
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class Episode:
    episode_id: str
    participant_id: str
    condition: str
    task_id: str
    sample_rate_hz: float
    trajectories: Mapping[str, Trajectory] = field(default_factory=dict)
    events: tuple[PointingEvent, ...] = ()
    # Scale declared by the source file; positions held here are already meters.
    unit_scale: float = 1.0


class SemanticSequence(tuple):
    """Ordered action-set tokens with no two consecutive tokens equal."""

    def __new__(cls, tokens: Iterable[Iterable[str]] = ()):
        toks = tuple(frozenset(normalize_label(a) for a in t) for t in tokens)
        for i in range(1, len(toks)):
            if toks[i] == toks[i - 1]:
                raise ValueError(f"consecutive duplicate tokens at index {i}")
        return super().__new__(cls, toks)

    def __repr__(self) -> str:
        inner = ", ".join("{" + ",".join(sorted(t)) + "}" for t in self)
        return f"SemanticSequence([{inner}])"


@dataclass(frozen=True)
class Violation:
    field: str
    index: tuple
    rule: str


def _finite(values) -> bool:
    return all(math.isfinite(v) for v in values)


def validate_episode(ep: Episode) -> list[Violation]:
    """Check every domain invariant; an empty list means the episode is valid."""
    out: list[Violation] = []
    if not (math.isfinite(ep.sample_rate_hz) and ep.sample_rate_hz > 0):
        out.append(Violation("sample_rate_hz", (), "sample rate must be positive"))
    if not ep.condition:
        out.append(Violation("condition", (), "condition must be non-empty"))

    seen_ids: set[int] = set()
    for key, tr in ep.trajectories.items():
        if tr.object_id != key:
            out.append(Violation("trajectories", (key,), "object id does not match its key"))
        if tr.traj_id in seen_ids:
            out.append(Violation("traj_id", (key,), "duplicate trajectory id"))
        seen_ids.add(tr.traj_id)
        if not tr.subs:
            out.append(Violation("subs", (key,), "trajectory has no subtrajectories"))
        prev_t = -math.inf
        for si, sub in enumerate(tr.subs):
            if not sub.points:
                out.append(Violation("points", (key, si), "empty subtrajectory"))
                continue
            if sub.traj_id != tr.traj_id:
                out.append(Violation("traj_id", (key, si), "subtrajectory belongs to another trajectory"))
            if si > 0 and tr.subs[si - 1].points and tr.subs[si - 1].actions == sub.actions:
                out.append(Violation("subs", (key, si), "adjacent subtrajectories share an action set"))
            for pi, pt in enumerate(sub.points):
                idx = (key, si, pi)
                if pt.actions != sub.actions:
                    out.append(Violation("actions", idx, "action set differs within subtrajectory"))
                if any(not a for a in pt.actions):
                    out.append(Violation("actions", idx, "empty action label"))
                if pt.sub_id != sub.sub_id:
                    out.append(Violation("sub_id", idx, "point sub_id does not match subtrajectory"))
                if pt.point_id < 0:
                    out.append(Violation("point_id", idx, "negative point id"))
                if not _finite(pt.pose.position):
                    out.append(Violation("position", idx, "non-finite position"))
                q = pt.pose.orientation
                if not _finite(q):
                    out.append(Violation("orientation", idx, "non-finite orientation"))
                elif abs(math.sqrt(sum(v * v for v in q)) - 1.0) > QUAT_TOL:
                    out.append(Violation("orientation", idx, "quaternion is not unit norm"))
                if not math.isfinite(pt.t) or pt.t < 0:
                    out.append(Violation("t", idx, "timestamp must be finite and non-negative"))
                elif pt.t <= prev_t:
                    out.append(Violation("t", idx, "non-increasing timestamp"))
                prev_t = pt.t if math.isfinite(pt.t) else prev_t

    for ei, ev in enumerate(ep.events):
        if not (_finite(ev.hit_position) and math.isfinite(ev.t)):
            out.append(Violation("events", (ei,), "non-finite event value"))
        if ev.hand not in HANDS:
            out.append(Violation("hand", (ei,), f"hand must be one of {HANDS}"))
    return out
