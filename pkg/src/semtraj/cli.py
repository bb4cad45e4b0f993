"""Command line entry point: ``semtraj {validate,analyze,compare,synth}``.

Exit status is 0 on success, 1 on validation or analysis errors and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import analyze_episode, compare_episodes
from .errors import ParseError, SemtrajError
from .ingest import dump_template, parse_episode, read_template, write_episode_file
from .model import validate_episode
from .report import FORMATS, render_report, render_rows
from .synth import derive_seed, generate_episode, load_profiles, resolve_script

EPISODE_SUFFIX = ".semtraj"


class CliError(Exception):
    pass


def expand_paths(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob(f"*{EPISODE_SUFFIX}")))
        else:
            out.append(p)
    return out


def _load_episodes(paths):
    files = expand_paths(paths)
    if not files:
        raise CliError("no episodes")
    episodes = []
    for f in files:
        try:
            episodes.append(parse_episode(f.read_bytes()))
        except ParseError as exc:
            raise CliError(f"{f}:{exc.line}: {type(exc).__name__}: {exc.reason}") from None
        except OSError as exc:
            raise CliError(f"{f}: IoFailure: {exc.strerror}") from None
    return episodes


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    files = expand_paths(args.paths)
    if not files:
        print("no episodes", file=sys.stderr)
        return 1
    status = 0
    for f in files:
        try:
            ep = parse_episode(f.read_bytes())
        except ParseError as exc:
            print(f"{f}:{exc.line}: {type(exc).__name__}: {exc.reason}")
            status = 1
            continue
        except OSError as exc:
            print(f"{f}:0: IoFailure: {exc.strerror}")
            status = 1
            continue
        for v in validate_episode(ep):
            print(f"{f}:0: Violation: {v.field}{list(v.index)}: {v.rule}")
            status = 1
    return status


def cmd_analyze(args) -> int:
    tmpl = read_template(args.template) if args.template else None
    episodes = _load_episodes(args.paths)
    rows = []
    for ep in episodes:
        try:
            rows.append(analyze_episode(ep, tmpl))
        except SemtrajError as exc:
            raise CliError(f"{ep.episode_id}: {type(exc).__name__}: {exc}") from None
    _emit(render_rows(rows, args.format), args.out)
    return 0


def cmd_compare(args) -> int:
    tmpl = read_template(args.template) if args.template else None
    episodes = _load_episodes(args.paths)
    order = args.group_order.split(",") if args.group_order else None
    rep = compare_episodes(
        episodes,
        tmpl,
        group_by=args.group_by,
        stride=args.stride,
        normalize_translation=args.normalize_translation,
        alpha=args.alpha,
        assume_normal=args.assume_normal,
        group_order=order,
        workers=args.workers,
    )
    _emit(render_report(rep, args.format), args.out)
    return 0


def cmd_synth(args) -> int:
    script = resolve_script(args.script)
    if args.profiles:
        profiles = load_profiles(Path(args.profiles).read_bytes())
    else:
        from importlib import resources

        profiles = load_profiles(resources.files("semtraj").joinpath("data").joinpath("profiles.toml").read_bytes())
    if args.n < 2:
        raise CliError("-n must be at least 2")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{script.task_id}.template.toml").write_text(dump_template(script.template()), encoding="utf-8")
    print("episode_id\tcondition\tseed\tpath")
    for cond, prof in profiles.items():
        base = prof.seed if args.seed is None else args.seed
        for i in range(args.n):
            seed = derive_seed(base, cond, i)
            ep, _ = generate_episode(
                script,
                replace(prof, seed=seed),
                episode_id=f"{script.task_id}-{cond}-{i:03d}",
                participant_id=f"{cond}{i:02d}",
                condition=cond,
            )
            path = write_episode_file(ep, out / f"{ep.episode_id}{EPISODE_SUFFIX}")
            print(f"{ep.episode_id}\t{cond}\t{seed}\t{path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semtraj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate episode files")
    p.add_argument("paths", nargs="+", help="episode files or directories")
    p.set_defaults(func=cmd_validate)

    def common(p, default_format):
        p.add_argument("paths", nargs="+", help="episode files or directories")
        p.add_argument("--template", help="task template (TOML)")
        p.add_argument("--format", choices=FORMATS, default=default_format)
        p.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("analyze", help="per-episode metrics table")
    common(p, "csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="group comparison report")
    common(p, "markdown")
    p.add_argument("--group-by", default="condition", choices=("condition", "task_id", "participant_id"))
    p.add_argument("--group-order", help="comma separated group labels, e.g. M,H,C")
    p.add_argument("--stride", type=int, default=1, help="keep every k-th sample for DTW/DFD")
    p.add_argument("--normalize-translation", action="store_true", help="shift each path to start at the origin")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--assume-normal", action="store_true", help="use Levene/ANOVA/t-tests")
    p.add_argument("--workers", type=int, default=None, help="threads for distance matrices")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate synthetic episodes")
    p.add_argument("--script", required=True, help="builtin script name or script file")
    p.add_argument("--profiles", help="profile file (default: bundled M/H/C profiles)")
    p.add_argument("-n", type=int, default=20, help="episodes per condition")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="base seed overriding every profile's seed")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "stride", 1) < 1:
        parser.error("--stride must be >= 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SemtrajError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IoFailure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
