"""``hydrosurvey`` command-line entry point.

Exit codes: 0 success, 2 configuration/parameter error, 3 simulation
failure, 4 data degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import __version__
from .config import RunConfig, SCHUYLKILL_TIDES, dump, template
from .errors import ConfigError, EmptyInputError, HydroSurveyError
from .ingest import (
    SampleStream,
    apply_depth_offset,
    format_tides,
    parse_log,
    sensor_for_parameter,
    synchronize,
    tag_tide,
)
from .interp.profile import chord_project, cross_section
from .interp.raster import ScatterSet, rasterize, write_esri_ascii
from .mission import path_length, plan_from_dict, plan_to_dict
from .sim import run_survey
from .stats import correlate_pairs, format_correlations, format_summaries, summarize

log = logging.getLogger("hydrosurvey")

DEFAULT_OUT = "out"


def _write_text(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def load_streams(config: RunConfig, log_dir: str) -> list[SampleStream]:
    """Parse every configured sensor log present in ``log_dir``."""
    if not os.path.isdir(log_dir):
        raise ConfigError(f"log directory not found: {log_dir}")
    streams = []
    for spec in config.sensor_specs():
        path = os.path.join(log_dir, config.sensor_file(spec.sensor_id))
        if not os.path.exists(path):
            log.info("no %s log in %s", spec.sensor_id, log_dir)
            continue
        streams.append(apply_depth_offset(parse_log(path, spec), config.depth_offset))
    if not streams:
        raise EmptyInputError(f"no sensor logs in {log_dir}")
    return streams


def load_records(config: RunConfig, log_dir: str, reference_id: str | None = None):
    streams = load_streams(config, log_dir)
    if reference_id is not None and not any(s.spec.sensor_id == reference_id for s in streams):
        raise EmptyInputError(f"{log_dir}: no {reference_id} log")
    records = synchronize(streams, config.frame(), reference_id, run=log_dir)
    return tag_tide(records, config.tide_table(), config.tide_window)


def cmd_init(out_dir: str, force: bool = False) -> list[str]:
    cfg_path = os.path.join(out_dir, "config.json")
    tide_path = os.path.join(out_dir, "tides.csv")
    for p in (cfg_path, tide_path):
        if os.path.exists(p) and not force:
            raise ConfigError(f"{p} exists (use --force to overwrite)")
    _write_text(cfg_path, dump(template()))
    _write_text(tide_path, format_tides(SCHUYLKILL_TIDES))
    return [cfg_path, tide_path]


def cmd_plan(config: RunConfig, out_dir: str, kind=None, spacing=None, passes=None, lane_axis=None) -> str:
    plan = config.plan(kind, spacing, passes, lane_axis)
    path = os.path.join(out_dir, "plan.json")
    _write_text(path, json.dumps(plan_to_dict(plan), indent=2) + "\n")
    log.info("%s plan: %d waypoints, %.1f m", plan.kind.value, len(plan.waypoints), path_length(plan))
    return path


def cmd_simulate(config: RunConfig, out_dir: str, plan_path: str | None = None, seed: int | None = None) -> list[str]:
    if plan_path is not None:
        try:
            with open(plan_path, encoding="utf-8") as fh:
                plan = plan_from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read plan {plan_path}: {exc}") from exc
    else:
        plan = config.plan()
    result = run_survey(plan, config.fields(), config.frame(), config.current(), config.sim_config(seed))
    log.info("survey finished in %.1f s: %s", result.duration, result.sample_counts)
    return result.write(out_dir)


def cmd_grid(config: RunConfig, log_dir: str, parameter: str, out_dir: str, cell: float | None = None) -> str:
    spec = sensor_for_parameter(parameter, config.sensor_specs())
    records = load_records(config, log_dir, spec.sensor_id)
    scatter = ScatterSet.from_records(records, parameter)
    grid = rasterize(scatter, config.interp("cell_m") if cell is None else cell)
    path = os.path.join(out_dir, f"{parameter}.asc")
    os.makedirs(out_dir, exist_ok=True)
    write_esri_ascii(grid, path)
    return path


def cmd_profile(config: RunConfig, log_dirs: list[str], out_dir: str) -> str:
    a, b = config.transect_endpoints()
    tracks = []
    for d in log_dirs:
        records = [r for r in load_records(config, d, "bathy") if r.get("depth_m") is not None]
        if not records:
            continue
        along, lateral = chord_project(a, b, [r.position for r in records])
        log.info("%s: max lateral deviation %.2f m", d, float(abs(lateral).max()))
        tracks.append(list(zip(along.tolist(), (r.get("depth_m") for r in records))))
    if not tracks:
        raise EmptyInputError("no bathymetry samples")
    prof = cross_section(tracks, config.interp("station_step_m"), config.interp("window_m"))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["station_m", "depth_m"])
    for s, z in zip(prof.stations.tolist(), prof.depths.tolist()):
        w.writerow([repr(s), repr(z)])
    return _write_text(os.path.join(out_dir, "profile.csv"), buf.getvalue())


def cmd_correlate(config: RunConfig, log_dirs: list[str], out_dir: str, level: str | None = None) -> str:
    records = [r for d in log_dirs for r in load_records(config, d)]
    level = level or config.data["correlate"].get("level", "auto")
    if level not in ("auto", "run", "record"):
        raise ConfigError(f"level must be auto, run or record, got {level!r}")
    by_run = level == "run" or (level == "auto" and len(log_dirs) > 1)
    entries = correlate_pairs(
        records, config.pairs(), bool(config.data["correlate"].get("group_by_tide", True)), by_run
    )
    for e in entries:
        if not e.defined:
            log.warning("%s vs %s (%s): %s", e.param_x, e.param_y, e.tide_group, e.error)
    return _write_text(os.path.join(out_dir, "correlation.csv"), format_correlations(entries))


def cmd_summarize(config: RunConfig, log_dirs: list[str], out_dir: str) -> str:
    rows = []
    for d in log_dirs:
        records = load_records(config, d)
        groups = {}
        for r in records:
            groups.setdefault(r.tide.value, []).append(r)
        params = [n for s in config.sensor_specs() for n in s.parameter_names]
        for group in sorted(groups):
            for p in params:
                try:
                    rows.append((d, group, summarize(groups[group], p)))
                except EmptyInputError:
                    continue
    return _write_text(os.path.join(out_dir, "summary.csv"), format_summaries(rows))


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS, help="run configuration (JSON)")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="simulation RNG seed")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="hydrosurvey",
        description="Plan, simulate, and post-process ASV river surveys.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common], help="write a template config and tide table")
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("plan", parents=[common], help="write a mission plan")
    p.add_argument("--kind", choices=["lawnmower", "transect"])
    p.add_argument("--spacing", type=float)
    p.add_argument("--passes", type=int)
    p.add_argument("--lane-axis", choices=["along_width", "along_height"])

    p = sub.add_parser("simulate", parents=[common], help="simulate a survey and write sensor logs")
    p.add_argument("--plan", help="plan file (default: build from config)")

    p = sub.add_parser("grid", parents=[common], help="interpolate one parameter to an ESRI ASCII grid")
    p.add_argument("--logs", required=True)
    p.add_argument("--parameter", required=True)
    p.add_argument("--cell", type=float)

    for name, help_ in (
        ("profile", "riverbed cross-section from transect bathymetry"),
        ("correlate", "Pearson correlation table"),
        ("summarize", "per-run parameter summaries"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--logs", required=True, nargs="+")
        if name == "correlate":
            p.add_argument("--level", choices=["auto", "run", "record"])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    out = getattr(args, "out", None)
    try:
        if args.command == "init":
            for p in cmd_init(out or ".", args.force):
                print(p)
            return 0
        cfg_path = getattr(args, "config", None)
        config = RunConfig.load(cfg_path) if cfg_path else RunConfig({})
        seed = getattr(args, "seed", None)
        if args.command == "plan":
            print(cmd_plan(config, out or DEFAULT_OUT, args.kind, args.spacing, args.passes, args.lane_axis))
        elif args.command == "simulate":
            for p in cmd_simulate(config, out or DEFAULT_OUT, args.plan, seed):
                print(p)
        elif args.command == "grid":
            print(cmd_grid(config, args.logs, args.parameter, out or DEFAULT_OUT, args.cell))
        elif args.command == "profile":
            print(cmd_profile(config, args.logs, out or DEFAULT_OUT))
        elif args.command == "correlate":
            print(cmd_correlate(config, args.logs, out or DEFAULT_OUT, args.level))
        elif args.command == "summarize":
            print(cmd_summarize(config, args.logs, out or DEFAULT_OUT))
    except HydroSurveyError as exc:
        print(f"hydrosurvey: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
