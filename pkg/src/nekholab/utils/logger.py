"""
Logging utility for nekholab.

Records go to stderr (stdout carries command results) and, optionally, to a
rotating file. Keyword arguments become a ` | key=value` tail on the message.
"""

import logging
import logging.handlers
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

LEVEL_ENV = "NEKHOLAB_LOG_LEVEL"
FILE_ENV = "NEKHOLAB_LOG_FILE"

_MAX_MESSAGE = 1000
_MAX_VALUE = 100


def _one_line(text: str, limit: int) -> str:
    text = str(text).replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    if len(text) > limit:
        text = text[:limit - 3] + "..."
    return text


def _render(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "(" + ",".join(_render(v) if isinstance(v, float) else str(v)
                              for v in value) + ")"
    return str(value)


class ContextFormatter(logging.Formatter):
    """Formatter that appends the record's context pairs to the message."""

    FORMAT = "[%(asctime)s] %(levelname)-8s %(name)s:%(lineno)d - %(message)s"

    def __init__(self):
        super().__init__(self.FORMAT, datefmt="%Y-%m-%d %H:%M:%S")

    def formatMessage(self, record: logging.LogRecord) -> str:
        line = super().formatMessage(record)
        context: Dict[str, Any] = getattr(record, "context", None) or {}
        for key, value in context.items():
            key = str(key).lower().replace(" ", "_")
            line += f" | {key}={_one_line(_render(value), _MAX_VALUE)}"
        return line


class Logger:
    """Structured logging utility for nekholab."""

    def __init__(self,
                 name: str,
                 log_level: str = "INFO",
                 log_file: Optional[str] = None,
                 max_file_size: int = 10 * 1024 * 1024,
                 backup_count: int = 5,
                 enable_console: bool = True):
        """
        Args:
            name: Logger name
            log_level: DEBUG, INFO, WARNING, ERROR or CRITICAL
            log_file: Rotating log file (optional)
            max_file_size: Bytes before the file rotates
            backup_count: Rotated files to keep
            enable_console: Also log to stderr
        """
        self.name = name
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))
        self.logger.handlers.clear()
        self.logger.propagate = False

        if enable_console:
            self._attach(logging.StreamHandler(sys.stderr))
        if log_file:
            try:
                Path(log_file).parent.mkdir(parents=True, exist_ok=True)
                self._attach(logging.handlers.RotatingFileHandler(
                    log_file, maxBytes=max_file_size, backupCount=backup_count,
                    encoding="utf-8"))
            except OSError as e:
                self.warning("Log file unavailable", path=log_file, reason=e)

    def _attach(self, handler: logging.Handler):
        handler.setFormatter(ContextFormatter())
        handler.setLevel(self.logger.level)
        self.logger.addHandler(handler)

    def _log(self, level: int, message: str, **context):
        if self.logger.isEnabledFor(level):
            # stacklevel=3 reports the caller of info()/warning()/...
            self.logger.log(level, _one_line(message, _MAX_MESSAGE),
                            extra={"context": context}, stacklevel=3)

    def debug(self, message: str, **context):
        self._log(logging.DEBUG, message, **context)

    def info(self, message: str, **context):
        self._log(logging.INFO, message, **context)

    def warning(self, message: str, **context):
        self._log(logging.WARNING, message, **context)

    def error(self, message: str, **context):
        self._log(logging.ERROR, message, **context)

    def critical(self, message: str, **context):
        self._log(logging.CRITICAL, message, **context)

    def is_enabled_for(self, level: int) -> bool:
        return self.logger.isEnabledFor(level)

    # Domain helpers

    def log_run_start(self, label: str, **context):
        self.info(f"Run started: {label}", **context)

    def log_run_progress(self, label: str, progress: float, **context):
        self.debug(f"Run progress: {label}", progress_percent=f"{progress:.1f}%", **context)

    def log_run_complete(self, label: str, duration: float, status: str, **context):
        self.info(f"Run completed: {label}", duration_seconds=f"{duration:.2f}",
                  status=status, **context)

    def log_event(self, t: float, k, residual: float, **context):
        """Log a detected resonance crossing."""
        self.debug("Resonance crossing", t=t, k=tuple(k), residual=residual, **context)

    def log_suite_result(self, suite: str, cases: int, failures: int, seconds: float,
                         **context):
        """Log a property-suite outcome; failing suites log at ERROR."""
        self._log(logging.INFO if failures == 0 else logging.ERROR, f"Suite {suite}",
                  cases=cases, failures=failures, seconds=f"{seconds:.3f}", **context)

    def log_condition_check(self, condition: str, passed: bool, **context):
        """Log a hypothesis check (QC, B(M), ball membership)."""
        if passed:
            self.debug(f"Condition {condition} satisfied", **context)
        else:
            self.warning(f"Condition {condition} violated", **context)

    def get_log_stats(self) -> Dict[str, Any]:
        """Level and handler summary, with file sizes for file handlers."""
        handlers = []
        for handler in self.logger.handlers:
            info: Dict[str, Any] = {"type": type(handler).__name__,
                                    "level": logging.getLevelName(handler.level)}
            path = getattr(handler, "baseFilename", None)
            if path:
                info["file"] = path
                if os.path.exists(path):
                    info["file_size"] = os.path.getsize(path)
            handlers.append(info)
        return {
            "logger_name": self.name,
            "log_level": logging.getLevelName(self.logger.level),
            "handlers_count": len(handlers),
            "handlers": handlers,
        }


_default_logger: Optional[Logger] = None


def get_logger(name: str = "nekholab") -> Logger:
    """
    Get or create the process-wide logger.

    The first call reads NEKHOLAB_LOG_LEVEL (default WARNING) and
    NEKHOLAB_LOG_FILE.

    Args:
        name: Logger name

    Returns:
        Logger: Shared instance
    """
    global _default_logger

    if _default_logger is None:
        _default_logger = Logger(name=name,
                                 log_level=os.environ.get(LEVEL_ENV, "WARNING"),
                                 log_file=os.environ.get(FILE_ENV))
    return _default_logger


def setup_logging(log_level: str = "INFO",
                  log_file: Optional[str] = None,
                  enable_console: bool = True) -> Logger:
    """Replace the process-wide logger, e.g. from CLI options."""
    global _default_logger

    _default_logger = Logger(name="nekholab", log_level=log_level,
                             log_file=log_file or os.environ.get(FILE_ENV),
                             enable_console=enable_console)
    return _default_logger
