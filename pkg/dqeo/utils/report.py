"""
Report serialization

JSON reports are written with sorted keys so equal reports are equal bytes.
CSV gets one row per trial; box-plot summaries per cell go to a separate
`<stem>_plot.json` next to either format.
"""
from pathlib import Path
from typing import Any, Dict, List, Union
import logging

import orjson
import pandas as pd

from dqeo.errors import ReportIOError
from dqeo.models import BatteryReport, ReportFormat

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS

CSV_COLUMNS = ["trial_id", "mode", "objective", "D", "K", "budget", "seed", "f_final", "correct", "bfgs_iterations"]


def dumps(data: Any) -> bytes:
    return orjson.dumps(data, option=JSON_OPTIONS)


def report_bytes(report: BatteryReport) -> bytes:
    return dumps(report.model_dump(mode="json"))


def canonical_report_bytes(report: BatteryReport) -> bytes:
    """Report bytes without wall-clock fields, for reproducibility comparisons"""
    return dumps(report.model_dump(mode="json", exclude={"records": {"__all__": {"wall_time"}}}))


def trial_table(report: BatteryReport) -> pd.DataFrame:
    """Flat per-trial table; lb_i/ub_i are empty for classical trials"""
    max_dims = max((r.dims for r in report.records), default=0)
    box_columns = [c for i in range(max_dims) for c in (f"lb_{i}", f"ub_{i}")]

    rows = []
    for r in report.records:
        row: Dict[str, Any] = {
            "trial_id": r.trial_id,
            "mode": r.mode.value,
            "objective": r.objective,
            "D": r.dims,
            "K": r.qubits,
            "budget": r.budget,
            "seed": str(r.seed),  # unsigned 64-bit, beyond int64
            "f_final": r.f_final,
            "correct": r.correct,
            "bfgs_iterations": r.bfgs_iterations,
        }
        if r.seedbox is not None:
            for i, (lo, hi) in enumerate(zip(r.seedbox.lb, r.seedbox.ub)):
                row[f"lb_{i}"] = lo
                row[f"ub_{i}"] = hi
        rows.append(row)
    return pd.DataFrame(rows, columns=CSV_COLUMNS + box_columns)


def plot_data(report: BatteryReport) -> Dict[str, Any]:
    """Box-plot summaries per cell"""
    fields = {
        "cell", "mode", "objective", "dims", "qubits", "budget", "trials", "repeats",
        "n_correct", "n_correct_by_repeat", "n_correct_box", "bfgs_box", "bfgs_box_correct", "basin_counts",
    }
    return {"version": report.version, "cells": [c.model_dump(mode="json", include=fields) for c in report.cells]}


def _write(path: Path, payload: Union[bytes, str]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(payload, bytes):
            path.write_bytes(payload)
        else:
            path.write_text(payload, encoding="utf-8")
    except OSError as e:
        raise ReportIOError(path, f"cannot write report: {e.strerror or e}") from e


def emit_report(report: BatteryReport, path: Union[str, Path], fmt: ReportFormat = ReportFormat.JSON) -> List[Path]:
    """
    Write a battery report

    Args:
        report: Result of run_battery
        path: Output stem; the format's suffix replaces any existing one
        fmt: json (full nested report) or csv (one row per trial)

    Returns:
        Paths written: the report, then its plot-data file

    Raises:
        ReportIOError: the path is not writable
    """
    fmt = ReportFormat(fmt)
    stem = Path(path)
    if stem.suffix.lower() in (".json", ".csv"):
        stem = stem.with_suffix("")

    target = stem.with_name(f"{stem.name}.{fmt.value}")
    if fmt == ReportFormat.JSON:
        _write(target, report_bytes(report))
    else:
        _write(target, trial_table(report).to_csv(index=False, lineterminator="\n"))

    plot_path = stem.with_name(f"{stem.name}_plot.json")
    _write(plot_path, dumps(plot_data(report)))

    logger.info(f"Report written: {target} ({len(report.records)} trials), plot data: {plot_path}")
    return [target, plot_path]


def load_report(path: Union[str, Path]) -> BatteryReport:
    """Read a JSON report back into a BatteryReport"""
    path = Path(path)
    try:
        data = orjson.loads(path.read_bytes())
    except OSError as e:
        raise ReportIOError(path, f"cannot read report: {e.strerror or e}") from e
    except orjson.JSONDecodeError as e:
        raise ReportIOError(path, f"invalid JSON: {e}") from e
    return BatteryReport.model_validate(data)
