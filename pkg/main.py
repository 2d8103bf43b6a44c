from __future__ import annotations

import argparse
import faulthandler
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from config import CONFIG
from experiments import (
    RECIPES,
    ScenarioOutcome,
    reproduce,
    run_conditions,
    run_scenario,
    run_simulate,
    run_theorem1,
    run_theorem2,
    sweep,
    validate_config,
)
from linalg_core import DomainError, NumericalFailure
from logging_config import scenario_context, setup_logging
from models import ScenarioConfig
from storage import ConfigError, Diagnostic, get_appdata_dir

logger = logging.getLogger("AdiabaticFrames.CLI")

CONFIG_COMMANDS = {
    "simulate": run_simulate,
    "conditions": run_conditions,
    "theorem1": run_theorem1,
    "theorem2": run_theorem2,
    "run": run_scenario,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adiabatic-frames",
        description="Adiabatic dynamics and adiabatic conditions of driven quantum systems "
                    "in inertial and rotating frames.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {CONFIG.APP_VERSION}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: output.dir of the config)")
    common.add_argument("--workers", type=int, help="sweep worker threads")
    common.add_argument("--steps-per-period", type=int, dest="steps_per_period",
                        help="grid points per fastest period (resolution rule)")
    common.add_argument("--override-resolution", action="store_true", dest="override_resolution",
                        help="accept grids coarser than the resolution rule")
    common.add_argument("--log-level", default="INFO", dest="log_level",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    common.add_argument("--log-dir", dest="log_dir", help="directory for the rotating log file")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "propagate and report adiabatic fidelity"),
        ("conditions", "evaluate C1..C4 (inertial and, with a frame, non-inertial)"),
        ("theorem1", "check the frame-overlap condition"),
        ("theorem2", "check the constant rotated Hamiltonian condition"),
        ("sweep", "run the full pipeline for every sweep value"),
        ("run", "full pipeline for one scenario or its sweep"),
        ("validate", "validate a config without running it"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("config", help="scenario file")
    p = sub.add_parser("reproduce", parents=[common], help="reference reproductions")
    p.add_argument("recipe", choices=RECIPES)
    return parser


def apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    changes = {}
    if args.steps_per_period is not None:
        changes["points_per_period"] = args.steps_per_period
    if args.override_resolution:
        changes["override_resolution"] = True
    if args.workers is not None:
        changes["workers"] = args.workers
    return replace(cfg, **changes) if changes else cfg


def _report(outcome: ScenarioOutcome) -> None:
    for path in outcome.artifacts:
        print(path)
    if outcome.sweep is not None:
        failed = outcome.sweep.failed_rows
        print(f"{len(outcome.sweep.rows)} row(s), {len(failed)} failed")
        for row in failed:
            print(f"  {outcome.sweep.parameter}={row.value:.6g}: {row.error}", file=sys.stderr)


def run(args: argparse.Namespace) -> int:
    if args.workers is not None and not CONFIG.MIN_WORKERS <= args.workers <= CONFIG.MAX_WORKERS:
        raise ConfigError([Diagnostic(None, "--workers", f"must be in [{CONFIG.MIN_WORKERS}, {CONFIG.MAX_WORKERS}]")])
    if args.command == "reproduce":
        outcome = reproduce(args.recipe, out=args.out, workers=args.workers,
                            points_per_period=args.steps_per_period,
                            override_resolution=args.override_resolution)
        _report(outcome)
        return CONFIG.EXIT_NUMERICAL_FAILURE if outcome.all_failed else CONFIG.EXIT_OK

    cfg = apply_overrides(validate_config(args.config, args.steps_per_period, args.override_resolution), args)
    if args.command == "validate":
        print(f"{args.config}: OK")
        return CONFIG.EXIT_OK
    with scenario_context(cfg.label):
        if args.command == "sweep":
            outcome = sweep(cfg, args.out, args.workers)
        else:
            outcome = CONFIG_COMMANDS[args.command](cfg, args.out)
    _report(outcome)
    return CONFIG.EXIT_NUMERICAL_FAILURE if outcome.all_failed else CONFIG.EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(log_level=args.log_level, console=True, log_dir=args.log_dir)

    crash_log_handle = None
    try:
        crash_dir = args.log_dir or get_appdata_dir()
        crash_log_handle = open(os.path.join(crash_dir, CONFIG.CRASH_LOG_FILE), "w", encoding="utf-8")
        faulthandler.enable(crash_log_handle)
    except OSError as exc:
        logger.debug("Crash diagnostics file setup failed: %s", exc)

    try:
        logger.info("%s v%s: %s", CONFIG.APP_NAME, CONFIG.APP_VERSION, args.command)
        return run(args)
    except ConfigError as e:
        for d in e.diagnostics:
            print(f"{e.path or 'config'}: {d}", file=sys.stderr)
        return CONFIG.EXIT_CONFIG_ERROR
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return CONFIG.EXIT_CONFIG_ERROR
    except NumericalFailure as e:
        where = f" (t={e.time:.9g} us)" if e.time is not None else ""
        print(f"numerical failure{where}: {e}", file=sys.stderr)
        return CONFIG.EXIT_NUMERICAL_FAILURE
    finally:
        if crash_log_handle:
            try:
                faulthandler.disable()
                crash_log_handle.close()
            except OSError as e:
                logger.debug("Error closing crash log: %s", e)


if __name__ == "__main__":
    raise SystemExit(main())
