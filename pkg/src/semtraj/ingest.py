"""Reading and writing episode recordings and task templates.

Episode files (``.semtraj``) are UTF-8 JSON Lines. Every line is one JSON
object whose first key is ``kind``:

``hdr``
    ``format_version``, ``episode_id``, ``participant_id``, ``condition``,
    ``task_id``, ``sample_rate_hz``, ``unit_scale`` and optionally
    ``source_unit_scale`` and ``objects`` (``{object_id: {"goal": str,
    "subgoals": [str, ...]}}``).
``frm``
    ``object_id``, ``t``, ``px``, ``py``, ``pz``, ``qw``, ``qx``, ``qy``,
    ``qz``, ``actions``.
``evt``
    ``event_type`` (only ``"point"``), ``target_id``, ``t``, ``hx``, ``hy``,
    ``hz``, ``hand``.

Positions are multiplied by ``unit_scale`` on the way in, so episodes in
memory are always meters. Templates are TOML; see ``docs/formats.md``.
"""

from __future__ import annotations

import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import (
    ConsecutiveDuplicateTokens,
    MalformedRecord,
    MalformedTemplate,
    MissingHeader,
    NonFiniteValue,
    NonMonotonicTimestamp,
    UnknownRecordKind,
)
from .model import (
    HANDS,
    Episode,
    PointingEvent,
    Pose,
    SemanticPoint,
    SemanticSequence,
    normalize_label,
)
from .segment import segment_trajectory

FORMAT_VERSION = 1
COMPARATORS = ("==", ">=", "<=")

_HEADER_FIELDS = ("episode_id", "participant_id", "condition", "task_id", "sample_rate_hz", "unit_scale")
_FRAME_NUM = ("t", "px", "py", "pz", "qw", "qx", "qy", "qz")
_EVENT_NUM = ("t", "hx", "hy", "hz")


def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    if isinstance(source, str):
        return source
    if isinstance(source, os.PathLike):
        return Path(source).read_text(encoding="utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


def _number(rec: dict, key: str, line: int) -> float:
    if key not in rec:
        raise MalformedRecord(f"missing field {key!r}", line)
    v = rec[key]
    if isinstance(v, str):
        try:
            v = float(v)
        except ValueError:
            raise MalformedRecord(f"field {key!r} is not a number", line) from None
        if math.isfinite(v):
            raise MalformedRecord(f"field {key!r} is a string, expected a number", line)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedRecord(f"field {key!r} is not a number", line)
    v = float(v)
    if not math.isfinite(v):
        raise NonFiniteValue(key, line)
    return v


def _string(rec: dict, key: str, line: int, allow_empty: bool = True) -> str:
    v = rec.get(key)
    if not isinstance(v, str):
        raise MalformedRecord(f"field {key!r} must be a string", line)
    if not allow_empty and not v:
        raise MalformedRecord(f"field {key!r} must be non-empty", line)
    return v


def _parse_header(rec: dict, line: int) -> dict:
    if rec.get("format_version") != FORMAT_VERSION:
        raise MalformedRecord(f"unsupported format_version {rec.get('format_version')!r}", line)
    hdr = {k: rec.get(k) for k in _HEADER_FIELDS}
    for k in ("episode_id", "participant_id", "task_id"):
        hdr[k] = _string(rec, k, line)
    hdr["condition"] = _string(rec, "condition", line, allow_empty=False)
    hdr["sample_rate_hz"] = _number(rec, "sample_rate_hz", line)
    hdr["unit_scale"] = _number(rec, "unit_scale", line)
    if hdr["sample_rate_hz"] <= 0:
        raise MalformedRecord("sample_rate_hz must be positive", line)
    if hdr["unit_scale"] <= 0:
        raise MalformedRecord("unit_scale must be positive", line)
    hdr["source_unit_scale"] = (
        _number(rec, "source_unit_scale", line) if "source_unit_scale" in rec else hdr["unit_scale"]
    )
    objects = rec.get("objects", {})
    if not isinstance(objects, dict) or not all(isinstance(v, dict) for v in objects.values()):
        raise MalformedRecord("'objects' must map object ids to tables", line)
    hdr["objects"] = objects
    return hdr


def parse_episode(source) -> Episode:
    """Parse one ``.semtraj`` recording.

    ``source`` may be bytes, str, a path, or a text/binary stream. Any defect
    raises exactly one :class:`~semtraj.errors.ParseError` naming the line.
    """
    text = _read_text(source)
    header = None
    header_line = 0
    per_object: dict[str, list[SemanticPoint]] = {}
    last_t: dict[str, float] = {}
    events: list[PointingEvent] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(rec, dict) or "kind" not in rec:
            raise MalformedRecord("record must be an object with a 'kind' field", lineno)
        kind = rec["kind"]
        if kind not in ("hdr", "frm", "evt"):
            raise UnknownRecordKind(f"unknown record kind {kind!r}", lineno)
        if kind == "hdr":
            if header is not None:
                raise MalformedRecord(f"second header (first on line {header_line})", lineno)
            header = _parse_header(rec, lineno)
            header_line = lineno
            continue
        if header is None:
            raise MissingHeader("record before header", lineno)

        if kind == "frm":
            oid = _string(rec, "object_id", lineno, allow_empty=False)
            vals = {k: _number(rec, k, lineno) for k in _FRAME_NUM}
            acts = rec.get("actions")
            if not isinstance(acts, list) or not all(isinstance(a, str) and a.strip() for a in acts):
                raise MalformedRecord("'actions' must be a list of non-empty strings", lineno)
            t = vals["t"]
            if t < 0:
                raise MalformedRecord("negative timestamp", lineno)
            if oid in last_t and t <= last_t[oid]:
                raise NonMonotonicTimestamp(oid, lineno)
            last_t[oid] = t
            s = header["unit_scale"]
            pos = (vals["px"], vals["py"], vals["pz"])
            if s != 1.0:
                pos = tuple(v * s for v in pos)
            quat = (vals["qw"], vals["qx"], vals["qy"], vals["qz"])
            if math.sqrt(sum(v * v for v in quat)) == 0.0:
                raise MalformedRecord("zero quaternion", lineno)
            pts = per_object.setdefault(oid, [])
            pts.append(
                SemanticPoint(
                    point_id=len(pts),
                    sub_id=0,
                    pose=Pose(pos, quat),
                    t=t,
                    actions=frozenset(normalize_label(a) for a in acts),
                )
            )
        else:
            if rec.get("event_type") != "point":
                raise MalformedRecord(f"unsupported event_type {rec.get('event_type')!r}", lineno)
            target = _string(rec, "target_id", lineno, allow_empty=False)
            vals = {k: _number(rec, k, lineno) for k in _EVENT_NUM}
            hand = rec.get("hand", "unspecified")
            if hand not in HANDS:
                raise MalformedRecord(f"hand must be one of {HANDS}", lineno)
            s = header["unit_scale"]
            hit = (vals["hx"], vals["hy"], vals["hz"])
            if s != 1.0:
                hit = tuple(v * s for v in hit)
            events.append(PointingEvent(target_id=target, hit_position=hit, t=vals["t"], hand=hand))

    if header is None:
        raise MissingHeader("file has no header record", 1)

    trajectories = {}
    for traj_id, (oid, pts) in enumerate(per_object.items()):
        meta = header["objects"].get(oid, {})
        trajectories[oid] = segment_trajectory(
            pts,
            oid,
            goal=str(meta.get("goal", "")),
            traj_id=traj_id,
            subgoals=[str(g) for g in meta.get("subgoals", [])],
        )
    return Episode(
        episode_id=header["episode_id"],
        participant_id=header["participant_id"],
        condition=header["condition"],
        task_id=header["task_id"],
        sample_rate_hz=header["sample_rate_hz"],
        trajectories=trajectories,
        events=tuple(events),
        unit_scale=header["source_unit_scale"],
    )


def read_episode(path) -> Episode:
    return parse_episode(Path(path).read_bytes())


def _dumps(rec: dict) -> str:
    return json.dumps(rec, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def write_episode(ep: Episode, sink: IO | None = None) -> str:
    """Serialize ``ep``; returns the text and also writes it to ``sink`` if given.

    Positions are written in meters with ``unit_scale`` 1.0; the scale the
    episode was originally recorded in is kept as ``source_unit_scale``.
    """
    objects = {}
    for oid, tr in ep.trajectories.items():
        meta = {}
        if tr.goal:
            meta["goal"] = tr.goal
        if any(s.subgoal for s in tr.subs):
            meta["subgoals"] = [s.subgoal for s in tr.subs]
        if meta:
            objects[oid] = meta
    header = {
        "kind": "hdr",
        "format_version": FORMAT_VERSION,
        "episode_id": ep.episode_id,
        "participant_id": ep.participant_id,
        "condition": ep.condition,
        "task_id": ep.task_id,
        "sample_rate_hz": float(ep.sample_rate_hz),
        "unit_scale": 1.0,
    }
    if ep.unit_scale != 1.0:
        header["source_unit_scale"] = float(ep.unit_scale)
    if objects:
        header["objects"] = objects

    frames = []
    for order, (oid, tr) in enumerate(ep.trajectories.items()):
        for k, p in enumerate(tr.points()):
            frames.append((p.t, order, k, oid, p))
    frames.sort(key=lambda f: f[:3])

    lines = [_dumps(header)]
    for _, _, _, oid, p in frames:
        (px, py, pz), (qw, qx, qy, qz) = p.pose.position, p.pose.orientation
        lines.append(_dumps({
            "kind": "frm", "object_id": oid, "t": p.t,
            "px": px, "py": py, "pz": pz, "qw": qw, "qx": qx, "qy": qy, "qz": qz,
            "actions": sorted(p.actions),
        }))
    for ev in ep.events:
        hx, hy, hz = ev.hit_position
        lines.append(_dumps({
            "kind": "evt", "event_type": "point", "target_id": ev.target_id, "t": ev.t,
            "hx": hx, "hy": hy, "hz": hz, "hand": ev.hand,
        }))
    text = "\n".join(lines) + "\n"
    if sink is not None:
        if isinstance(sink, io.TextIOBase):
            sink.write(text)
        else:
            sink.write(text.encode("utf-8"))
    return text


def write_episode_file(ep: Episode, path) -> Path:
    path = Path(path)
    path.write_text(write_episode(ep), encoding="utf-8")
    return path


@dataclass(frozen=True)
class ActionRule:
    object_id: str
    action: str
    comparator: str
    count: int

    def check(self, observed: int) -> bool:
        if self.comparator == "==":
            return observed == self.count
        if self.comparator == ">=":
            return observed >= self.count
        return observed <= self.count


@dataclass(frozen=True)
class TaskTemplate:
    task_id: str
    optimal: Mapping[str, SemanticSequence] = field(default_factory=dict)
    action_rules: tuple[ActionRule, ...] = ()
    required_objects: tuple[str, ...] = ()
    targets: Mapping[str, tuple[float, float, float]] = field(default_factory=dict)
    goals: Mapping[str, str] = field(default_factory=dict)
    # object -> action whose runs form the path used for spatial distances
    distance_action: Mapping[str, str] = field(default_factory=dict)


def _template_sequence(obj: str, raw) -> SemanticSequence:
    if not isinstance(raw, list) or not all(
        isinstance(tok, list) and all(isinstance(a, str) and a.strip() for a in tok) for tok in raw
    ):
        raise MalformedTemplate(f"objects.{obj}.optimal must be a list of action lists")
    tokens = [frozenset(normalize_label(a) for a in tok) for tok in raw]
    for i in range(1, len(tokens)):
        if tokens[i] == tokens[i - 1]:
            raise ConsecutiveDuplicateTokens(
                f"objects.{obj}.optimal repeats token {sorted(tokens[i])} at positions {i - 1} and {i}"
            )
    return SemanticSequence(tokens)


def load_template(source) -> TaskTemplate:
    """Parse a TOML task template and check its invariants."""
    try:
        doc = tomllib.loads(_read_text(source))
    except tomllib.TOMLDecodeError as exc:
        raise MalformedTemplate(f"invalid TOML: {exc}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise MalformedTemplate(f"unsupported format_version {doc.get('format_version')!r}")
    task_id = doc.get("task_id")
    if not isinstance(task_id, str) or not task_id:
        raise MalformedTemplate("task_id must be a non-empty string")

    objects = doc.get("objects", {})
    if not isinstance(objects, dict):
        raise MalformedTemplate("'objects' must be a table")
    optimal, goals, dist_action = {}, {}, {}
    for obj, sec in objects.items():
        if not isinstance(sec, dict):
            raise MalformedTemplate(f"objects.{obj} must be a table")
        if "optimal" in sec:
            optimal[obj] = _template_sequence(obj, sec["optimal"])
        if "goal" in sec:
            goals[obj] = str(sec["goal"])
        if "distance_action" in sec:
            dist_action[obj] = normalize_label(str(sec["distance_action"]))

    rules = []
    for i, r in enumerate(doc.get("rules", [])):
        try:
            rule = ActionRule(str(r["object"]), normalize_label(str(r["action"])), r["comparator"], r["count"])
        except (KeyError, TypeError):
            raise MalformedTemplate(f"rules[{i}] needs object, action, comparator and count") from None
        if rule.comparator not in COMPARATORS:
            raise MalformedTemplate(f"rules[{i}].comparator must be one of {COMPARATORS}")
        if isinstance(rule.count, bool) or not isinstance(rule.count, int) or rule.count < 0:
            raise MalformedTemplate(f"rules[{i}].count must be a non-negative integer")
        rules.append(rule)

    required = doc.get("required_objects", list(optimal))
    if not isinstance(required, list) or not all(isinstance(o, str) for o in required):
        raise MalformedTemplate("required_objects must be a list of strings")

    targets = {}
    for tid, center in doc.get("targets", {}).items():
        if (
            not isinstance(center, list)
            or len(center) != 3
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in center)
            or not all(math.isfinite(v) for v in center)
        ):
            raise MalformedTemplate(f"targets.{tid} must be a finite 3-vector")
        targets[tid] = tuple(float(v) for v in center)

    return TaskTemplate(
        task_id=task_id,
        optimal=optimal,
        action_rules=tuple(rules),
        required_objects=tuple(required),
        targets=targets,
        goals=goals,
        distance_action=dist_action,
    )


def read_template(path) -> TaskTemplate:
    return load_template(Path(path).read_bytes())


def _toml_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dump_template(tmpl: TaskTemplate) -> str:
    """Render ``tmpl`` as TOML that :func:`load_template` reads back unchanged."""
    out = [f"format_version = {FORMAT_VERSION}", f"task_id = {_toml_str(tmpl.task_id)}"]
    out.append("required_objects = [" + ", ".join(_toml_str(o) for o in tmpl.required_objects) + "]")
    for obj in dict.fromkeys([*tmpl.optimal, *tmpl.goals, *tmpl.distance_action]):
        out.append("")
        out.append(f"[objects.{_toml_str(obj)}]")
        if obj in tmpl.goals:
            out.append(f"goal = {_toml_str(tmpl.goals[obj])}")
        if obj in tmpl.distance_action:
            out.append(f"distance_action = {_toml_str(tmpl.distance_action[obj])}")
        if obj in tmpl.optimal:
            toks = ["[" + ", ".join(_toml_str(a) for a in sorted(t)) + "]" for t in tmpl.optimal[obj]]
            out.append("optimal = [" + ", ".join(toks) + "]")
    for r in tmpl.action_rules:
        out.append("")
        out.append("[[rules]]")
        out.append(f"object = {_toml_str(r.object_id)}")
        out.append(f"action = {_toml_str(r.action)}")
        out.append(f"comparator = {_toml_str(r.comparator)}")
        out.append(f"count = {r.count}")
    if tmpl.targets:
        out.append("")
        out.append("[targets]")
        for tid, c in tmpl.targets.items():
            out.append(f"{_toml_str(tid)} = [{', '.join(repr(float(v)) for v in c)}]")
    return "\n".join(out) + "\n"
