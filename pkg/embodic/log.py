"""logging utilities"""

import logging
import sys

from pythonjsonlogger import jsonlogger

app_log = logging.getLogger("embodic")

# params holding more values than this are summarised in logs
MAX_LOGGED_VALUES = 8

# runs slower than this are always logged at least INFO-level
SLOW_RUN_MS = 10_000

LOG_FORMAT = "[%(levelname)1.1s %(asctime)s %(name)s] %(message)s"
JSON_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def enable_pretty_logging(level=logging.INFO, json_logs=False, logger=app_log):
    """Attach a stderr handler to `logger`, once

    With `json_logs` every record is rendered as one JSON object.
    """
    logger.setLevel(level)
    if not logger.handlers:
        logger.addHandler(logging.StreamHandler(sys.stderr))
    for handler in logger.handlers:
        if json_logs:
            handler.setFormatter(jsonlogger.JsonFormatter(JSON_LOG_FORMAT))
        else:
            handler.setFormatter(logging.Formatter(LOG_FORMAT))
    return logger


def _scrub_params(params):
    """summarise long value lists (samples, sequences) in params"""
    scrubbed = {}
    for key, value in params.items():
        if isinstance(value, (list, tuple)) and len(value) > MAX_LOGGED_VALUES:
            scrubbed[key] = f"[{len(value)} values]"
        elif isinstance(value, str) and len(value) > 4 * MAX_LOGGED_VALUES:
            scrubbed[key] = f"[{len(value)} characters]"
        else:
            scrubbed[key] = value
    return scrubbed


def log_run(config, status, duration, rows=0, error=None):
    """log one line per experiment run

    - successful runs are DEBUG, precondition and config failures WARNING,
      anything else ERROR
    - slow runs are always logged at least INFO-level
    - long sample lists in params are summarised
    """
    duration_ms = 1000.0 * duration
    if status == "success":
        log_level = logging.DEBUG
    elif status in {"precondition", "config"}:
        log_level = logging.WARNING
    else:
        log_level = logging.ERROR

    if duration_ms >= SLOW_RUN_MS and log_level < logging.INFO:
        log_level = logging.INFO

    ns = dict(
        status=status,
        kind=config.kind,
        seed=config.seed,
        rows=rows,
        duration=duration_ms,
        params=_scrub_params(config.params),
        error="",
    )
    if error is not None:
        ns["error"] = f": {error}"
    msg = "{status} {kind} seed={seed} rows={rows} {params}{error} ({duration:.2f}ms)"
    app_log.log(log_level, msg.format(**ns))
