"""Command-line entry point.

`platoon-asmc run` loads a JSON config (built-in defaults when omitted),
applies flag overrides, runs the selected controller episode(s), and writes
traces, reports, the plotspec and the effective-config echo into the output
directory. Errors come back as a single machine-parseable line on stderr with
a nonzero exit code.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import os
import sys
from pathlib import Path as FsPath

from . import metrics as mx
from .config import (
    ConfigError,
    RunConfig,
    default_config,
    dump_config,
    from_dict,
    load_config,
)
from .engine import EpisodeAborted, Trace, run_episode
from .platoon import load_path_xy

OUT_ENV_VAR = "PLATOON_ASMC_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3


def _fail(kind: str, message: str) -> int:
    sys.stderr.write(f"error: kind={kind}; message={message}\n")
    return EXIT_CONFIG if kind == "validation" else EXIT_ABORT


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Command-line flags take precedence over config-file values."""
    if args.controller is not None:
        cfg = dataclasses.replace(cfg, controller=args.controller)
    if args.duration is not None:
        cfg = dataclasses.replace(
            cfg, sim=dataclasses.replace(cfg.sim, duration=args.duration))
    if args.dt is not None:
        cfg = dataclasses.replace(
            cfg, sim=dataclasses.replace(cfg.sim, dt_plant=args.dt))
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_dir=args.out)
    return cfg


def _resolve_out_dir(cfg: RunConfig) -> FsPath:
    out = cfg.output_dir or os.environ.get(OUT_ENV_VAR) or "out"
    return FsPath(out)


def _episode_job(cfg_doc: dict, controller: str, csv_path: str) -> Trace:
    """Run one episode and export its trace; used directly and as the worker
    for concurrent 'both' runs (hence the plain-dict config argument)."""
    cfg = from_dict(cfg_doc)
    path = load_path_xy(cfg.path_file) if cfg.path_file else None
    trace = run_episode(cfg.robot, cfg.kinematic, cfg.asmc, cfg.platoon,
                        cfg.arena, cfg.sim, controller, path=path,
                        scenario_label=cfg.scenario_hash())
    mx.export_trace(trace, csv_path)
    return trace


def run_command(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config) if args.config else default_config()
        cfg = _apply_overrides(cfg, args)
        cfg.validate()
    except ConfigError as exc:
        return _fail("validation", str(exc))

    out_dir = _resolve_out_dir(cfg)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return _fail("validation", f"cannot create output directory: {exc}")

    dump_config(cfg, out_dir / "config_echo.json")
    controllers = ["proposed", "baseline"] if cfg.controller == "both" \
        else [cfg.controller]
    say = (lambda *a: None) if args.quiet else print

    doc = cfg.to_dict()
    traces: dict[str, Trace] = {}
    try:
        if len(controllers) == 2:
            say(f"running {controllers} episodes concurrently "
                f"({cfg.sim.duration:g} s simulated each)...")
            with concurrent.futures.ProcessPoolExecutor(max_workers=2) as pool:
                futures = {
                    c: pool.submit(_episode_job, doc, c,
                                   str(out_dir / f"trace_{c}.csv"))
                    for c in controllers
                }
                for c, fut in futures.items():
                    traces[c] = fut.result()
        else:
            c = controllers[0]
            say(f"running {c} episode ({cfg.sim.duration:g} s simulated)...")
            traces[c] = _episode_job(doc, c, str(out_dir / f"trace_{c}.csv"))
    except EpisodeAborted as exc:
        return _fail("abort", f"step={exc.step}; t={exc.t:.3f}; "
                              f"robot={exc.robot + 1}; last_record={exc.diagnostic}")

    mx.write_plotspec(out_dir / "plotspec.txt", cfg.platoon.n_robots)

    cutoff = cfg.metrics.warmup_cutoff
    if len(traces) == 2:
        rp, rb, comparison = mx.build_report(traces["proposed"],
                                             traces["baseline"], cutoff)
        reports = [rb, rp]
    else:
        reports = [mx.report_from_trace(next(iter(traces.values())), cutoff)]
        comparison = None
    text = mx.render_report_text(reports, comparison)
    (out_dir / "report.txt").write_text(text)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(mx.report_to_json(reports, comparison), fh, indent=2)
        fh.write("\n")

    say(text)
    say(f"artifacts written to {out_dir}/")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platoon-asmc",
        description="Deterministic differential-drive platoon simulator with "
                    "adaptive sliding mode control.")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one or both controller episodes")
    run_p.add_argument("--config", metavar="PATH",
                       help="JSON config file (built-in defaults when omitted)")
    run_p.add_argument("--controller", choices=["proposed", "baseline", "both"],
                       help="override the config's controller selection")
    run_p.add_argument("--duration", type=float, metavar="S",
                       help="override simulated duration in seconds")
    run_p.add_argument("--dt", type=float, metavar="S",
                       help="override the plant integration step in seconds")
    run_p.add_argument("--out", metavar="DIR",
                       help=f"output directory (fallback: ${OUT_ENV_VAR}, then ./out)")
    run_p.add_argument("--quiet", action="store_true",
                       help="suppress progress output")
    run_p.set_defaults(func=run_command)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
