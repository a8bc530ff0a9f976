"""
Structured logging configuration for the optimizer
Logs battery progress, every trial outcome, and failures
"""
import logging
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional
import sys

TRIALS_LOGGER = "dqeo.trials"


class StructuredFormatter(logging.Formatter):
    """Format logs as structured JSON"""

    def format(self, record):
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        # Add extra fields if present
        for field in ("trial_id", "cell", "seed", "duration_ms", "metrics", "error"):
            if hasattr(record, field):
                log_data[field] = getattr(record, field)

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, ensure_ascii=False, default=str)


class ReadableFormatter(logging.Formatter):
    """Format logs in human-readable format"""

    def format(self, record):
        timestamp = datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S")
        log_msg = f"[{timestamp}] {record.levelname:8s} | {record.name:30s} | {record.getMessage()}"

        if hasattr(record, "cell"):
            log_msg += f" | Cell: {record.cell}"

        if hasattr(record, "duration_ms"):
            log_msg += f" | Duration: {record.duration_ms}ms"

        if record.exc_info:
            log_msg += "\n" + self.formatException(record.exc_info)

        return log_msg


def setup_logging(debug: bool = False, log_dir: Optional[str] = "logs", to_file: bool = True):
    """
    Setup logging configuration with multiple handlers

    Creates three log files when to_file is set:
    - app_YYYYMMDD.log: All application logs (readable format)
    - trials_YYYYMMDD.log: One JSON object per trial (structured)
    - errors_YYYYMMDD.log: Only errors and exceptions
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG if debug else logging.INFO)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if debug else logging.INFO)
    console_handler.setFormatter(ReadableFormatter())
    root_logger.addHandler(console_handler)

    trial_logger = logging.getLogger(TRIALS_LOGGER)
    trial_logger.handlers.clear()
    trial_logger.propagate = False  # trials go to their own file only

    if to_file and log_dir:
        logs_dir = Path(log_dir)
        logs_dir.mkdir(parents=True, exist_ok=True)
        stamp = datetime.now().strftime("%Y%m%d")

        app_file_handler = logging.FileHandler(logs_dir / f"app_{stamp}.log", encoding="utf-8")
        app_file_handler.setLevel(logging.DEBUG if debug else logging.INFO)
        app_file_handler.setFormatter(ReadableFormatter())
        root_logger.addHandler(app_file_handler)

        trials_file_handler = logging.FileHandler(logs_dir / f"trials_{stamp}.log", encoding="utf-8")
        trials_file_handler.setLevel(logging.INFO)
        trials_file_handler.setFormatter(StructuredFormatter())
        trial_logger.addHandler(trials_file_handler)

        error_file_handler = logging.FileHandler(logs_dir / f"errors_{stamp}.log", encoding="utf-8")
        error_file_handler.setLevel(logging.ERROR)
        error_file_handler.setFormatter(ReadableFormatter())
        root_logger.addHandler(error_file_handler)

        logging.info(f"Logging initialized - Logs directory: {logs_dir.absolute()}")
    else:
        trial_logger.addHandler(logging.NullHandler())


def log_trial(record) -> None:
    """Log one finished TrialRecord as a structured line"""
    logger = logging.getLogger(TRIALS_LOGGER)

    log_record = logger.makeRecord(
        logger.name,
        logging.INFO,
        "",
        0,
        f"Trial {record.trial_id} finished - correct={record.correct}",
        (),
        None
    )
    log_record.trial_id = record.trial_id
    log_record.cell = record.cell
    log_record.seed = record.seed
    log_record.duration_ms = round(record.wall_time * 1000.0, 2)
    log_record.metrics = {
        "f_final": record.f_final,
        "bfgs_iterations": record.bfgs_iterations,
        "quantum_evals": record.quantum_evals,
        "basin": record.basin,
    }

    logger.handle(log_record)


def log_battery(cell: str, metrics: Dict[str, Any]) -> None:
    """Log a per-cell summary"""
    logger = logging.getLogger(TRIALS_LOGGER)

    log_record = logger.makeRecord(
        logger.name,
        logging.INFO,
        "",
        0,
        f"Cell summary - {cell}",
        (),
        None
    )
    log_record.cell = cell
    log_record.metrics = metrics

    logger.handle(log_record)


def log_error(context: str, error_message: str, error_details: Optional[Dict[str, Any]] = None) -> None:
    """Log error with context"""
    logger = logging.getLogger(TRIALS_LOGGER)

    log_record = logger.makeRecord(
        logger.name,
        logging.ERROR,
        "",
        0,
        f"Error - {context} - {error_message}",
        (),
        None
    )
    log_record.cell = context
    log_record.error = error_details or {}

    logger.handle(log_record)
