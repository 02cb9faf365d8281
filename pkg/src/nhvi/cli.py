"""Command-line interface: run experiments, bundled demos, model validation.

    nhvi run --config cfg.json [--h H] [--t-final T] [--out DIR]
    nhvi run --sweep a.json b.json ... [--out DIR]
    nhvi demo {particle|ellipse|pendulum} [--h H] [--t-final T] [--out DIR]
    nhvi validate --config cfg.json

NHVI_LOG={error|info|debug} controls solver tracing.  `run` exits 0 on
success and nonzero after writing a diagnostic JSON when a solve fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .config import SimConfig, build_model, parse_config
from .diagnostics import build_report
from .discretization import make_discrete_lagrangian
from .errors import NewtonFailure, NhviError
from .integrator import simulate
from .output import (
    write_impacts_csv,
    write_plots,
    write_summary_json,
    write_trajectory_csv,
)
from .validation import run_all_checks

log = logging.getLogger("nhvi.cli")

DEMOS = ("particle", "ellipse", "pendulum")


def _setup_logging() -> None:
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    name = os.environ.get("NHVI_LOG", "error").lower()
    logging.basicConfig(
        level=levels.get(name, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _apply_overrides(cfg: SimConfig, args) -> SimConfig:
    updates = {}
    if getattr(args, "h", None) is not None:
        if args.h <= 0:
            raise SystemExit("--h must be positive")
        updates["h"] = args.h
    if getattr(args, "t_final", None) is not None:
        if args.t_final <= cfg.t0:
            raise SystemExit("--t-final must exceed the configured t0")
        updates["t_final"] = args.t_final
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _run_single(cfg: SimConfig, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    Ld = make_discrete_lagrangian(model, cfg.rule)
    started = time.perf_counter()
    traj = simulate(
        Ld,
        model,
        np.array(cfg.q0),
        np.array(cfg.v0),
        cfg.t0,
        cfg.t_final,
        cfg.h,
        cfg.solver,
    )
    elapsed = time.perf_counter() - started
    report = build_report(traj, Ld, model)
    log.info(
        "%s: %d steps, %d impacts, energy drift %.3e, %.2f s",
        model.name,
        len(traj.states) - 1,
        report.impact_count,
        report.energy_drift_rel,
        elapsed,
    )
    if cfg.outputs.csv:
        write_trajectory_csv(out_dir / "trajectory.csv", traj, Ld, model)
        write_impacts_csv(out_dir / "impacts.csv", traj, model)
    if cfg.outputs.summary:
        write_summary_json(out_dir / "summary.json", report, cfg)
    if cfg.outputs.plots:
        write_plots(out_dir, traj, Ld, model, cfg.outputs.plots)
    return report.to_dict()


def _fail_with_diagnostic(exc: NhviError, out_dir: Path) -> int:
    diagnostic = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, NewtonFailure):
        diagnostic.update(
            {"k": exc.k, "t": exc.t, "residual_norm": exc.residual_norm, "phase": exc.phase}
        )
    text = json.dumps(diagnostic, indent=2)
    print(text, file=sys.stderr)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "error.json").write_text(text + "\n")
    except OSError:
        pass
    return 2


def _sweep_entry(args_tuple):
    cfg_path, out_dir = args_tuple
    cfg = parse_config(cfg_path)
    _run_single(cfg, Path(out_dir))
    return cfg_path


def cmd_run(args) -> int:
    if args.sweep:
        out_root = Path(args.out or "nhvi_out")
        jobs = [
            (path, out_root / Path(path).stem) for path in args.sweep
        ]
        workers = min(len(jobs), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done in pool.map(_sweep_entry, jobs):
                log.info("sweep member finished: %s", done)
        return 0
    if not args.config:
        raise SystemExit("run requires --config (or --sweep)")
    out_dir = Path(args.out or "nhvi_out")
    cfg = _apply_overrides(parse_config(args.config), args)
    try:
        _run_single(cfg, out_dir)
    except NhviError as exc:
        return _fail_with_diagnostic(exc, out_dir)
    return 0


def bundled_config_path(name: str):
    """Path-like handle to a packaged demo configuration."""
    return resources.files("nhvi") / "configs" / f"{name}.json"


def cmd_demo(args) -> int:
    out_dir = Path(args.out or f"nhvi_out_{args.name}")
    with resources.as_file(bundled_config_path(args.name)) as path:
        cfg = _apply_overrides(parse_config(path), args)
    try:
        _run_single(cfg, out_dir)
    except NhviError as exc:
        return _fail_with_diagnostic(exc, out_dir)
    return 0


def cmd_validate(args) -> int:
    cfg = parse_config(args.config)
    model = build_model(cfg)
    results = run_all_checks(model, cfg.rule)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name}: {detail}")
        failed += 0 if ok else 1
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhvi",
        description="Variational collision integrators for nonholonomic systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="integrate a configuration and write outputs")
    run_p.add_argument("--config", help="path to a configuration JSON file")
    run_p.add_argument("--sweep", nargs="+", metavar="CONFIG",
                       help="run several configs in parallel workers")
    run_p.add_argument("--h", type=float, default=None, help="override timestep")
    run_p.add_argument("--t-final", dest="t_final", type=float, default=None,
                       help="override final time")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.set_defaults(func=cmd_run)

    demo_p = sub.add_parser("demo", help="run a bundled experiment")
    demo_p.add_argument("name", choices=DEMOS)
    demo_p.add_argument("--h", type=float, default=None, help="override timestep")
    demo_p.add_argument("--t-final", dest="t_final", type=float, default=None,
                        help="override final time")
    demo_p.add_argument("--out", default=None, help="output directory")
    demo_p.set_defaults(func=cmd_demo)

    val_p = sub.add_parser("validate", help="run invariant suites without integrating")
    val_p.add_argument("--config", required=True)
    val_p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NhviError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
