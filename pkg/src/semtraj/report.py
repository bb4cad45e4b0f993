"""Rendering of metric rows and group reports as markdown, CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
import math
from itertools import combinations

import numpy as np

from .analysis import GroupReport, ReportRow, table_columns
from .stats import DASH

FORMATS = ("markdown", "csv", "structured-text")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_p(p: float, alpha: float) -> str:
    """Table style p-value: ``.003*``, ``< .001*``, ``.979``."""
    star = "*" if p < alpha else ""
    if p < 0.001:
        return f"< .001{star}"
    s = f"{p:.3f}"
    return (s[1:] if s.startswith("0") else s) + star


def format_value(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return DASH
    if float(v).is_integer():
        return str(int(v))
    return f"{v:.2f}"


def _median(vals):
    return float(np.median(vals)) if vals else None


# --- per-episode rows -------------------------------------------------------


def render_rows(rows: list[dict], fmt: str) -> str:
    columns = table_columns(rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "structured-text":
        doc = {"format_version": 1, "columns": columns, "rows": [{c: r.get(c) for c in columns} for r in rows]}
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt == "markdown":
        out = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
        for r in rows:
            out.append("| " + " | ".join(format_value(r.get(c)) if isinstance(r.get(c), float) else _cell(r.get(c)) for c in columns) + " |")
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


# --- group reports ----------------------------------------------------------


def _pairs(groups):
    return list(combinations(groups, 2))


def _pair_cell(row: ReportRow, a: str, b: str, alpha: float) -> str:
    if row.result is None or (a, b) not in row.result.pairs:
        return DASH
    pc = row.result.pairs[(a, b)]
    return f"{format_p(pc.holm_p, alpha)}, {pc.delta:.2f}"


def render_markdown(rep: GroupReport) -> str:
    pairs = _pairs(rep.groups)
    out = [f"Groups by `{rep.group_by}`; positions in meters (source unit scale {format_value(rep.unit_scale)})."]
    for sec in rep.sections:
        head = [f"**{sec.title}**", *[f"**{g}**" for g in rep.groups], "p-value"]
        head += [f"{a}{b} (p, δ)" for a, b in pairs] + ["Result"]
        out += ["", "| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for row in sec.rows:
            cells = [row.metric] + [format_value(_median(row.values.get(g, []))) for g in rep.groups]
            cells.append(format_p(row.result.omnibus_p, rep.alpha) if row.result else DASH)
            cells += [_pair_cell(row, a, b, rep.alpha) for a, b in pairs]
            cells.append(row.result.direction if row.result else DASH)
            out.append("| " + " | ".join(cells) + " |")
    return "\n".join(out) + "\n"


def render_csv(rep: GroupReport) -> str:
    pairs = _pairs(rep.groups)
    head = ["section", "metric", *[f"median_{g}" for g in rep.groups], *[f"n_{g}" for g in rep.groups]]
    head += ["family", "omnibus_statistic", "omnibus_p", "levene_p"]
    for a, b in pairs:
        head += [f"raw_p_{a}_{b}", f"holm_p_{a}_{b}", f"delta_{a}_{b}"]
    head += ["direction", "note"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    for sec in rep.sections:
        for row in sec.rows:
            res = row.result
            line = [sec.title, row.metric]
            line += [_cell(_median(row.values.get(g, []))) for g in rep.groups]
            line += [len(row.values.get(g, [])) for g in rep.groups]
            if res is None:
                line += ["", "", "", ""]
            else:
                line += [res.family, _cell(float(res.omnibus_statistic)), _cell(float(res.omnibus_p)), _cell(res.levene_p)]
            for a, b in pairs:
                pc = res.pairs.get((a, b)) if res else None
                line += ["", "", ""] if pc is None else [_cell(pc.raw_p), _cell(pc.holm_p), _cell(pc.delta)]
            line += [res.direction if res else DASH, row.note]
            w.writerow(line)
    return buf.getvalue()


def report_dict(rep: GroupReport) -> dict:
    sections = []
    for sec in rep.sections:
        rows = []
        for row in sec.rows:
            res = row.result
            rows.append({
                "metric": row.metric,
                "medians": {g: _median(row.values.get(g, [])) for g in rep.groups},
                "n": {g: len(row.values.get(g, [])) for g in rep.groups},
                "family": res.family if res else None,
                "omnibus_statistic": float(res.omnibus_statistic) if res else None,
                "omnibus_p": float(res.omnibus_p) if res else None,
                "levene_p": res.levene_p if res else None,
                "pairs": [
                    {"a": a, "b": b, "raw_p": pc.raw_p, "holm_p": pc.holm_p, "delta": pc.delta}
                    for (a, b), pc in (res.pairs.items() if res else [])
                ],
                "direction": res.direction if res else DASH,
                "note": row.note,
            })
        sections.append({"title": sec.title, "rows": rows})
    unit = None if math.isnan(rep.unit_scale) else rep.unit_scale
    return {
        "format_version": 1,
        "group_by": rep.group_by,
        "groups": rep.groups,
        "alpha": rep.alpha,
        "source_unit_scale": unit,
        "sections": sections,
    }


def render_report(rep: GroupReport, fmt: str) -> str:
    if fmt == "markdown":
        return render_markdown(rep)
    if fmt == "csv":
        return render_csv(rep)
    if fmt == "structured-text":
        return json.dumps(report_dict(rep), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
