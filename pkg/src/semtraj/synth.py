"""Synthetic episodes with controllable behavior.

A :class:`TaskScript` describes the noise-free execution: for each object a
sequence of :class:`Phase` entries (action set, duration, waypoints). A
:class:`BehaviorProfile` perturbs it:

* ``regrasp_probability``: at phases flagged ``regrasp_site`` the object is
  released halfway through and grasped again after ``regrasp_gap_s``.
* ``extra_action_probability``: after phases that declare ``extra`` phases,
  those are inserted (an additional cut, leaving and re-entering an area).
* ``idle_gap_s``: extra pause before every object but the first.
* ``hand_bias``: probability that a grasp occurrence is right-handed.
* ``path_noise_sd``: per-axis Gaussian noise on manipulated samples,
  smoothed with a centered 3-sample moving average.
* ``pointing_error_mean`` / ``pointing_error_sd``: hit-to-center distance
  of pointing events, drawn as ``|N(mean, sd)|`` along a random direction.

Randomness comes from numpy's PCG64 bit generator seeded with the profile
seed. Draws happen in a fixed order (phase decisions, hands, path noise,
pointing), and every decision draw is made whether or not it is used, so
changing one probability or noise level never shifts the other streams.
"""

from __future__ import annotations

import math
import sys
import zlib
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import InsufficientGroup
from .ingest import COMPARATORS, FORMAT_VERSION, ActionRule, TaskTemplate, _read_text
from .model import Episode, PointingEvent, SemanticSequence, make_point, normalize_label
from .segment import segment_trajectory

Vec3 = tuple[float, float, float]
_IDENTITY = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class BehaviorProfile:
    seed: int = 0
    path_noise_sd: float = 0.0
    regrasp_probability: float = 0.0
    extra_action_probability: float = 0.0
    idle_gap_s: float = 0.0
    hand_bias: float = 0.5
    pointing_error_sd: float = 0.0
    sample_rate_hz: float = 20.0
    pointing_error_mean: float = 0.0
    regrasp_gap_s: float = 0.5

    def __post_init__(self):
        for name in ("regrasp_probability", "extra_action_probability", "hand_bias"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("path_noise_sd", "pointing_error_sd", "idle_gap_s", "regrasp_gap_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Phase:
    actions: frozenset[str]
    duration: float
    waypoints: tuple[Vec3, ...] = ()
    regrasp_site: bool = False
    extra: tuple["Phase", ...] = ()
    event_target: str | None = None


@dataclass(frozen=True)
class ObjectScript:
    object_id: str
    start: Vec3
    phases: tuple[Phase, ...]
    goal: str = ""


@dataclass(frozen=True)
class TaskScript:
    task_id: str
    objects: tuple[ObjectScript, ...]
    lead_s: float = 2.0
    gap_s: float = 1.0
    tail_s: float = 1.0
    rules: tuple[ActionRule, ...] = ()
    targets: Mapping[str, Vec3] = field(default_factory=dict)
    distance_action: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for obj in self.objects:
            acts = [frozenset()] + [p.actions for p in obj.phases] + [frozenset()]
            for i in range(1, len(acts)):
                if acts[i] == acts[i - 1]:
                    raise ValueError(f"{obj.object_id}: phases {i - 2} and {i - 1} share an action set")
            for p in _all_phases(obj.phases):
                if not p.duration > 0:
                    raise ValueError(f"{obj.object_id}: phase durations must be positive")

    def template(self) -> TaskTemplate:
        """The template a noise-free execution of this script satisfies."""
        optimal = {
            o.object_id: SemanticSequence([frozenset()] + [p.actions for p in o.phases] + [frozenset()])
            for o in self.objects
        }
        return TaskTemplate(
            task_id=self.task_id,
            optimal=optimal,
            action_rules=self.rules,
            required_objects=tuple(o.object_id for o in self.objects),
            targets=dict(self.targets),
            goals={o.object_id: o.goal for o in self.objects if o.goal},
            distance_action=dict(self.distance_action),
        )


def _all_phases(phases):
    for p in phases:
        yield p
        yield from _all_phases(p.extra)


@dataclass(frozen=True)
class GroundTruth:
    """What the generator scheduled, on the sample grid."""

    intervals: dict[tuple[str, str], list[tuple[float, float]]]
    counts: dict[tuple[str, str], int]
    hand_counts: dict[str, int]
    injections: tuple[tuple[str, str, int], ...]
    task_start: float | None
    task_end: float | None
    pointing_distances: tuple[tuple[str, float], ...] = ()


def _nsamples(seconds: float, rate: float) -> int:
    return max(1, int(round(seconds * rate)))


def _phase_path(start: np.ndarray, waypoints: Sequence[Vec3], n: int) -> np.ndarray:
    """``n`` samples moving piecewise-linearly from ``start`` through the waypoints."""
    knots = [tuple(start)] + [tuple(map(float, w)) for w in waypoints]
    cum = [0.0]
    for a, b in zip(knots, knots[1:]):
        cum.append(cum[-1] + math.dist(a, b))
    if cum[-1] == 0:
        return np.repeat(start[None, :], n, axis=0)
    s = np.arange(1, n + 1) * (cum[-1] / n)
    out = np.empty((n, 3))
    for d in range(3):
        out[:, d] = np.interp(s, cum, [k[d] for k in knots])
    return out


def _smooth3(z: np.ndarray) -> np.ndarray:
    """3-sample moving average, edges padded by repetition."""
    if len(z) < 2:
        return z.copy()
    out = np.empty_like(z)
    out[1:-1] = (z[:-2] + z[1:-1] + z[2:]) / 3.0
    out[0] = (z[0] + z[0] + z[1]) / 3.0
    out[-1] = (z[-2] + z[-1] + z[-1]) / 3.0
    return out


def _runs(mask: Sequence[bool]) -> list[tuple[int, int]]:
    out, start = [], None
    for k, m in enumerate(mask):
        if m and start is None:
            start = k
        elif not m and start is not None:
            out.append((start, k - 1))
            start = None
    if start is not None:
        out.append((start, len(mask) - 1))
    return out


def generate_episode(
    script: TaskScript,
    profile: BehaviorProfile,
    episode_id: str = "synth-000",
    participant_id: str = "P00",
    condition: str = "synth",
) -> tuple[Episode, GroundTruth]:
    """Simulate one execution of ``script`` under ``profile``."""
    rng = np.random.Generator(np.random.PCG64(profile.seed))
    rate = profile.sample_rate_hz

    # Pass 1: phase decisions and the per-object sample-level schedule.
    cursor = _nsamples(script.lead_s, rate)
    injections = []
    plans = []  # (object, begin index, [(actions, n, waypoints, regrasp split, event)])
    for k, obj in enumerate(script.objects):
        if k > 0:
            cursor += _nsamples(script.gap_s, rate)
            if profile.idle_gap_s > 0:
                cursor += _nsamples(profile.idle_gap_s, rate)
        expanded = []
        queue = list(obj.phases)
        idx = 0
        while queue:
            ph = queue.pop(0)
            u_regrasp, u_extra = rng.random(), rng.random()
            regrasp = ph.regrasp_site and u_regrasp < profile.regrasp_probability
            if regrasp:
                injections.append((obj.object_id, "regrasp", idx))
            expanded.append((ph, regrasp))
            if ph.extra and u_extra < profile.extra_action_probability:
                injections.append((obj.object_id, "extra", idx))
                queue[0:0] = list(ph.extra)
            idx += 1
        plans.append((obj, cursor, expanded))
        for ph, regrasp in expanded:
            cursor += _nsamples(ph.duration, rate)
            if regrasp:
                cursor += _nsamples(profile.regrasp_gap_s, rate)
    total = cursor + _nsamples(script.tail_s, rate)
    times = [k / rate for k in range(total)]

    # Per-object base paths and action labels.
    tracks = []
    for obj, begin, expanded in plans:
        pos = np.empty((total, 3))
        acts: list[frozenset[str]] = [frozenset()] * total
        here = np.asarray(obj.start, dtype=float)
        pos[:begin] = here
        k = begin
        events = []
        for ph, regrasp in expanded:
            n = _nsamples(ph.duration, rate)
            path = _phase_path(here, ph.waypoints, n)
            if regrasp:
                half = n // 2 if n > 1 else 1
                gap = _nsamples(profile.regrasp_gap_s, rate)
                hold = np.repeat(path[half - 1][None, :], gap, axis=0)
                path = np.vstack([path[:half], hold, path[half:]])
                labels = [ph.actions] * half + [frozenset()] * gap + [ph.actions] * (n - half)
            else:
                labels = [ph.actions] * n
            pos[k : k + len(path)] = path
            acts[k : k + len(path)] = labels
            k += len(path)
            here = path[-1]
            if ph.event_target is not None:
                events.append((ph.event_target, k - 1))
        pos[k:] = here
        tracks.append((obj, pos, acts, events))

    # Pass 2: hand per grasp occurrence.
    hand_counts = {"left": 0, "right": 0}
    labelled = []
    for obj, pos, acts, events in tracks:
        out = list(acts)
        grasping = {a_set: any(normalize_label(a) == "grasp" for a in a_set) for a_set in set(acts)}
        for s, e in _runs([grasping[a_set] for a_set in acts]):
            hand = "right" if rng.random() < profile.hand_bias else "left"
            hand_counts[hand] += 1
            for j in range(s, e + 1):
                out[j] = frozenset(f"grasp@{hand}" if a == "grasp" else a for a in acts[j])
        labelled.append(out)

    # Pass 3: path noise on manipulated samples.
    trajectories = {}
    for traj_id, ((obj, pos, acts, _), labels) in enumerate(zip(tracks, labelled)):
        z = _smooth3(rng.standard_normal((total, 3)))
        active = np.array([bool(a) for a in acts])[:, None]
        noisy = pos + profile.path_noise_sd * z * active
        # Labels are normalized once per distinct set; sub ids follow the runs
        # so segmentation has nothing to relabel.
        norm = {a: frozenset(normalize_label(x) for x in a) for a in set(labels)}
        rows = noisy.tolist()
        points, sub = [], 0
        for j in range(total):
            if j and labels[j] != labels[j - 1]:
                sub += 1
            points.append(make_point(j, sub, tuple(rows[j]), _IDENTITY, times[j], norm[labels[j]]))
        trajectories[obj.object_id] = segment_trajectory(points, obj.object_id, goal=obj.goal, traj_id=traj_id)

    # Pass 4: pointing events.
    events, truth_pointing = [], []
    for obj, _, _, obj_events in tracks:
        for target, j in obj_events:
            center = np.asarray(script.targets[target], dtype=float)
            u_hand = rng.random()
            direction = rng.standard_normal(3)
            direction /= np.linalg.norm(direction)
            dist = abs(profile.pointing_error_mean + profile.pointing_error_sd * rng.standard_normal())
            hit = center + dist * direction
            hand = "right" if u_hand < profile.hand_bias else "left"
            events.append(PointingEvent(target, tuple(float(v) for v in hit), times[j], hand))
            truth_pointing.append((target, float(np.linalg.norm(hit - center))))

    truth_intervals: dict[tuple[str, str], list[tuple[float, float]]] = {}
    starts, ends = [], []
    for obj, _, acts, _ in tracks:
        base = sorted({a for a_set in acts for a in a_set})
        for a in base:
            runs = _runs([a in a_set for a_set in acts])
            truth_intervals[(obj.object_id, a)] = [(times[s], times[e]) for s, e in runs]
        for s, e in _runs([bool(a_set) for a_set in acts]):
            starts.append(times[s])
            ends.append(times[e])

    ep = Episode(
        episode_id=episode_id,
        participant_id=participant_id,
        condition=condition,
        task_id=script.task_id,
        sample_rate_hz=float(rate),
        trajectories=trajectories,
        events=tuple(events),
    )
    truth = GroundTruth(
        intervals=truth_intervals,
        counts={key: len(v) for key, v in truth_intervals.items()},
        hand_counts=hand_counts,
        injections=tuple(injections),
        task_start=min(starts) if starts else None,
        task_end=max(ends) if ends else None,
        pointing_distances=tuple(truth_pointing),
    )
    return ep, truth


def derive_seed(base_seed: int, condition: str, index: int) -> int:
    """Independent, order-free 64-bit seed for one episode of a group."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(zlib.crc32(condition.encode("utf-8")), index))
    return int(ss.generate_state(1, np.uint64)[0])


def generate_group(
    script: TaskScript,
    profiles: Mapping[str, BehaviorProfile],
    n_per_group: int,
    base_seed: int | None = None,
    with_truth: bool = False,
):
    """``n_per_group`` episodes per condition, seeded from (base seed, condition, index).

    The base seed is ``base_seed`` if given, else each profile's own seed.
    """
    if n_per_group < 2:
        raise InsufficientGroup(f"n_per_group must be >= 2, got {n_per_group}")
    out = []
    for cond, prof in profiles.items():
        base = prof.seed if base_seed is None else base_seed
        for i in range(n_per_group):
            p = replace(prof, seed=derive_seed(base, cond, i))
            ep, truth = generate_episode(
                script, p, episode_id=f"{script.task_id}-{cond}-{i:03d}", participant_id=f"{cond}{i:02d}", condition=cond
            )
            out.append((ep, truth) if with_truth else ep)
    return out


# --- TOML loaders -----------------------------------------------------------


def _vec(v, what: str) -> Vec3:
    if not (isinstance(v, list) and len(v) == 3 and all(isinstance(x, (int, float)) for x in v)):
        raise ValueError(f"{what} must be a 3-vector")
    return tuple(float(x) for x in v)


def _phase(d: dict, where: str) -> Phase:
    return Phase(
        actions=frozenset(normalize_label(a) for a in d.get("actions", [])),
        duration=float(d["duration"]),
        waypoints=tuple(_vec(w, f"{where}.waypoints") for w in d.get("waypoints", [])),
        regrasp_site=bool(d.get("regrasp_site", False)),
        extra=tuple(_phase(e, f"{where}.extra") for e in d.get("extra", [])),
        event_target=d.get("event_target"),
    )


def load_script(source) -> TaskScript:
    doc = tomllib.loads(_read_text(source))
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    objects = []
    for i, o in enumerate(doc.get("objects", [])):
        phases = tuple(_phase(p, f"objects[{i}].phases[{j}]") for j, p in enumerate(o.get("phases", [])))
        objects.append(ObjectScript(o["object_id"], _vec(o["start"], f"objects[{i}].start"), phases, o.get("goal", "")))
    rules = []
    for r in doc.get("rules", []):
        if r["comparator"] not in COMPARATORS:
            raise ValueError(f"bad comparator {r['comparator']!r}")
        rules.append(ActionRule(r["object"], normalize_label(r["action"]), r["comparator"], int(r["count"])))
    return TaskScript(
        task_id=doc["task_id"],
        objects=tuple(objects),
        lead_s=float(doc.get("lead_s", 2.0)),
        gap_s=float(doc.get("gap_s", 1.0)),
        tail_s=float(doc.get("tail_s", 1.0)),
        rules=tuple(rules),
        targets={k: _vec(v, f"targets.{k}") for k, v in doc.get("targets", {}).items()},
        distance_action={k: normalize_label(v) for k, v in doc.get("distance_action", {}).items()},
    )


def load_profiles(source) -> dict[str, BehaviorProfile]:
    """Read ``[conditions.<label>]`` tables of profile fields."""
    doc = tomllib.loads(_read_text(source))
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    conditions = doc.get("conditions", {})
    if not conditions:
        raise ValueError("profile file defines no conditions")
    return {cond: BehaviorProfile(**fields) for cond, fields in conditions.items()}


BUILTIN_SCRIPTS = ("cutting", "cleaning", "table_setup", "pointing")


def builtin_script(name: str) -> TaskScript:
    """One of the bundled task scripts (see :data:`BUILTIN_SCRIPTS`)."""
    if name not in BUILTIN_SCRIPTS:
        raise KeyError(f"unknown builtin script {name!r}; choose from {BUILTIN_SCRIPTS}")
    return load_script(resources.files("semtraj").joinpath("data").joinpath(f"{name}.toml").read_bytes())


def resolve_script(ref: str) -> TaskScript:
    """Builtin script name or a path to a script file."""
    if ref in BUILTIN_SCRIPTS and not Path(ref).exists():
        return builtin_script(ref)
    return load_script(Path(ref).read_bytes())
