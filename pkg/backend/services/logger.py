"""
Structured Logging
Console logs on stderr (stdout carries the CLI's JSON), optional rotating files,
and a timing helper for long searches.
"""

import json
import logging
import logging.handlers
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

UTC = timezone.utc

ROOT = "wsatlab"


class JSONFormatter(logging.Formatter):
    """One JSON object per record; `extra={"context": {...}}` is merged in"""

    def format(self, record: logging.LogRecord) -> str:
        data = {
            "ts": datetime.now(UTC).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
            "where": f"{record.module}:{record.funcName}:{record.lineno}",
        }
        context = getattr(record, "context", None)
        if isinstance(context, dict):
            data.update(context)
        if record.exc_info:
            data["exception"] = self.formatException(record.exc_info)
        return json.dumps(data, default=str)


class ColoredFormatter(logging.Formatter):
    """Level-colored console lines when stderr is a terminal"""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, fmt: str, datefmt: str, use_color: bool):
        super().__init__(fmt, datefmt=datefmt)
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        if not self.use_color:
            return super().format(record)
        # Copy so other handlers still see the plain level name
        record = logging.makeLogRecord(record.__dict__)
        record.levelname = f"{self.COLORS.get(record.levelname, '')}{record.levelname}{self.RESET}"
        return super().format(record)


def setup_logging(
    level: str = "INFO",
    log_dir: str = "logs",
    enable_file: bool = False,
    enable_json: bool = False,
    max_bytes: int = 10 * 1024 * 1024,
    backup_count: int = 5,
) -> logging.Logger:
    """
    Configure the `wsatlab` logger tree.

    Args:
        level: Log level name
        log_dir: Directory for rotating log files
        enable_file: Also write wsatlab.log (or wsatlab.json) and wsatlab_errors.json
        enable_json: JSON lines in the main log file
        max_bytes: Rotation size per file
        backup_count: Rotated files kept

    Returns:
        The root `wsatlab` logger
    """
    logger = logging.getLogger(ROOT)
    logger.setLevel(getattr(logging, level.upper()))
    logger.handlers.clear()
    logger.propagate = False

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(
        ColoredFormatter(
            "%(asctime)s %(levelname)s %(name)s: %(message)s",
            datefmt="%H:%M:%S",
            use_color=sys.stderr.isatty(),
        )
    )
    logger.addHandler(console)

    if enable_file:
        path = Path(log_dir)
        path.mkdir(parents=True, exist_ok=True)
        main = logging.handlers.RotatingFileHandler(
            path / f"{ROOT}.{'json' if enable_json else 'log'}",
            maxBytes=max_bytes,
            backupCount=backup_count,
        )
        main.setFormatter(
            JSONFormatter()
            if enable_json
            else logging.Formatter(
                "%(asctime)s %(levelname)s %(name)s %(module)s:%(lineno)d: %(message)s"
            )
        )
        logger.addHandler(main)

        errors = logging.handlers.RotatingFileHandler(
            path / f"{ROOT}_errors.json", maxBytes=max_bytes, backupCount=backup_count
        )
        errors.setLevel(logging.ERROR)
        errors.setFormatter(JSONFormatter())
        logger.addHandler(errors)

    return logger


def get_logger(name: str | None = None) -> logging.Logger:
    """`wsatlab.<name>`, or the root `wsatlab` logger"""
    return logging.getLogger(f"{ROOT}.{name}" if name else ROOT)


@contextmanager
def log_timing(logger: logging.Logger, what: str, level: int = logging.DEBUG, **context) -> Iterator[dict]:
    """Log `what` with its wall time in ms when the block exits.

    The yielded dict is merged into the record context, so the block can attach results.
    """
    extra = dict(context)
    started = time.monotonic()
    try:
        yield extra
    finally:
        elapsed = int((time.monotonic() - started) * 1000)
        details = "".join(f" {key}={value}" for key, value in extra.items())
        extra["elapsed_ms"] = elapsed
        logger.log(level, f"{what} took {elapsed} ms{details}", extra={"context": extra})


def configure_from_settings(level: str | None = None) -> logging.Logger:
    """(Re)configure logging from the application config"""
    from backend.config import config

    return setup_logging(
        level=level or config.LOG_LEVEL,
        log_dir=config.LOG_DIR,
        enable_file=config.LOG_TO_FILE,
        enable_json=config.LOG_FORMAT_JSON,
        max_bytes=config.LOG_MAX_BYTES,
        backup_count=config.LOG_BACKUP_COUNT,
    )


configure_from_settings()
