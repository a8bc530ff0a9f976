"""
Command-line entry point

    python -m dqeo.main run --objective rastrigin --dims 2,5,10 --mode both --trials 100
    python -m dqeo.main table --objective ackley --dims 2,3,4,5,6,7,8,9,10
    python -m dqeo.main grid --qubits 5

Results go to stdout (table, grid) or to report files (run). Failures print a
JSON error object on stderr and exit nonzero.
"""
from typing import Any, Dict, List, Optional
import argparse
import logging
import sys

import orjson

from dqeo import __app_name__, __version__
from dqeo.config import load_battery_config, settings
from dqeo.errors import ConfigurationError, DQEOError
from dqeo.logger import log_error, setup_logging
from dqeo.services.harness import himmelblau_grid_study, run_battery, table_reference
from dqeo.utils.report import dumps, emit_report

logger = logging.getLogger(__name__)

# CLI flag -> BatteryConfig key
_RUN_FLAGS = {
    "objective": "objective",
    "dims": "dims",
    "qubits": "qubits",
    "budget": "budgets",
    "trials": "trials",
    "repeats": "repeats",
    "mode": "modes",
    "particles": "particles",
    "beta": "beta",
    "delta_base": "delta_base",
    "gamma": "gamma",
    "alpha": "alpha",
    "shots": "shots",
    "seed": "seed",
    "out": "out",
    "format": "format",
    "jobs": "jobs",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqeo",
        description=f"{__app_name__}: quantum-preconditioned PSO/BFGS benchmark batteries",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--debug", action="store_true", default=settings.debug, help="DEBUG-level logging")
    parser.add_argument("--log-dir", default=settings.log_dir, help="Directory for app/trials/errors logs")
    parser.add_argument("--no-log-files", action="store_true", help="Log to the console only")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a seeded trial battery and write its report")
    run.add_argument("--config", help="KEY=value battery file; flags override its values")
    run.add_argument("--objective", help="rastrigin, ackley or himmelblau")
    run.add_argument("--dims", help="Comma-separated dimensions, e.g. 2,5,10")
    run.add_argument("--qubits", type=int, help="Qubits per dimension K")
    run.add_argument("--budget", help="Comma-separated COBYLA evaluation budgets")
    run.add_argument("--trials", type=int, help="Trials per cell (and per repeat)")
    run.add_argument("--repeats", type=int, help="Independent repeats of every cell")
    run.add_argument("--mode", help="hybrid, classical or both")
    run.add_argument("--particles", type=int, help="PSO particles of the classical baseline")
    run.add_argument("--beta", type=float, help="Weight of x_best in the seed point")
    run.add_argument("--delta-base", dest="delta_base", type=float, help="Minimum trust-region radius")
    run.add_argument("--gamma", type=float, help="Radius growth per unit of tail RMS")
    run.add_argument("--alpha", type=float, help="CVaR confidence level")
    run.add_argument("--shots", type=int, help="Shots per CVaR evaluation")
    run.add_argument("--seed", type=int, help="Base seed")
    run.add_argument("--out", help="Report path stem")
    run.add_argument("--format", choices=["json", "csv"], help="Report format")
    run.add_argument("--jobs", type=int, help="Worker processes for trials")

    table = sub.add_parser("table", help="Print V_orig and the original minima count per D")
    table.add_argument("--objective", default="rastrigin")
    table.add_argument("--dims", default="2,3,4,5,6,7,8,9,10")

    grid = sub.add_parser("grid", help="Print the Himmelblau grid degeneracy study")
    grid.add_argument("--qubits", type=int, default=settings.qubits, help="Qubits per dimension K")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, flag) for flag, key in _RUN_FLAGS.items() if getattr(args, flag) is not None}


def _parse_dims(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigurationError(f"Invalid --dims '{text}'") from e


def _write_stdout(data: Any) -> None:
    sys.stdout.buffer.write(dumps(data) + b"\n")
    sys.stdout.flush()


def _run(args: argparse.Namespace) -> int:
    config = load_battery_config(args.config, _overrides(args))
    report = run_battery(config)
    out = config.out or settings.out
    paths = emit_report(report, out, config.format)
    _write_stdout({"status": "ok", "files": [str(p) for p in paths], "cells": [
        {"cell": c.cell, "n_correct": c.n_correct, "trials": c.trials} for c in report.cells
    ]})
    return 0


def _table(args: argparse.Namespace) -> int:
    rows = table_reference(args.objective, _parse_dims(args.dims))
    _write_stdout([row.model_dump(mode="json") for row in rows])
    return 0


def _grid(args: argparse.Namespace) -> int:
    _write_stdout(himmelblau_grid_study(args.qubits).model_dump(mode="json"))
    return 0


_COMMANDS = {"run": _run, "table": _table, "grid": _grid}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(debug=args.debug, log_dir=args.log_dir, to_file=settings.log_to_file and not args.no_log_files)

    try:
        return _COMMANDS[args.command](args)
    except DQEOError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=args.debug)
        log_error(args.command, str(e), {"type": type(e).__name__})
        sys.stderr.buffer.write(orjson.dumps({"status": "error", "error": type(e).__name__, "message": str(e)}) + b"\n")
        return 2 if isinstance(e, ConfigurationError) else 1
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        sys.stderr.buffer.write(orjson.dumps({"status": "error", "error": type(e).__name__, "message": str(e)}) + b"\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
