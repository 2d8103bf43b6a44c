"""
Logging setup for AdiabaticFrames.

One application logger (`AdiabaticFrames`) with a rotating DEBUG file in the
per-user data directory and an optional stderr console at the level given on
the command line. Stdout is left to the result paths printed by the CLI.

Records carry the scenario they belong to (`%(scenario)s`), set with
`scenario_context`, so interleaved sweep rows stay readable in the file.
"""
from __future__ import annotations

import contextlib
import contextvars
import logging
import logging.handlers
import os
import sys
from typing import Iterator, Optional

from config import CONFIG
from storage import get_appdata_dir

ROOT_LOGGER_NAME = CONFIG.APP_NAME
LOG_FORMAT = "[%(asctime)s] %(levelname)-8s [%(name)s:%(lineno)d] [%(scenario)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

_scenario: contextvars.ContextVar[str] = contextvars.ContextVar("scenario", default="-")


class ScenarioFilter(logging.Filter):
    """Stamps each record with the active scenario label."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.scenario = _scenario.get()
        return True


@contextlib.contextmanager
def scenario_context(label: str) -> Iterator[None]:
    """Tag every record logged inside the block (in this thread) with `label`."""
    token = _scenario.set(label)
    try:
        yield
    finally:
        _scenario.reset(token)


def _level(name: str) -> int:
    name = str(name).upper()
    return getattr(logging, name) if name in LEVELS else logging.INFO


def setup_logging(log_level: str = "INFO", console: bool = True, log_dir: Optional[str] = None) -> None:
    """
    Attach the file and console handlers to the application logger.

    Calling it again replaces the handlers, so repeated CLI invocations in one
    process do not duplicate output.

    Args:
        log_level: console level, one of LEVELS
        console: also log to stderr
        log_dir: directory of the log file, default the app-data directory
    """
    log_dir = log_dir or get_appdata_dir()
    log_file = os.path.join(log_dir, CONFIG.APP_LOG_FILE)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)
    stamp = ScenarioFilter()

    app_logger = logging.getLogger(ROOT_LOGGER_NAME)
    app_logger.setLevel(logging.DEBUG)
    for handler in list(app_logger.handlers):
        app_logger.removeHandler(handler)
        handler.close()

    try:
        os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=CONFIG.LOG_MAX_BYTES,
            backupCount=CONFIG.LOG_BACKUP_COUNT,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        file_handler.addFilter(stamp)
        app_logger.addHandler(file_handler)
    except OSError as e:
        print(f"Warning: no log file at {log_file}: {e}", file=sys.stderr)

    if console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(_level(log_level))
        console_handler.setFormatter(formatter)
        console_handler.addFilter(stamp)
        app_logger.addHandler(console_handler)

    app_logger.debug("Logging to %s; console %s", log_file,
                     log_level.upper() if console else "off")

