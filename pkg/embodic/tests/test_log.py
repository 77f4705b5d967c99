import io
import json
import logging

import pytest

from embodic import log
from embodic.bench import ExperimentConfig


@pytest.fixture
def logger():
    logger = logging.getLogger("embodic.test-log")
    yield logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)


def test_pretty_logging(logger):
    log.enable_pretty_logging(logging.DEBUG, logger=logger)
    stream = io.StringIO()
    (handler,) = logger.handlers
    handler.setStream(stream)
    logger.info("hello %s", "world")
    assert stream.getvalue().startswith("[I ")
    assert "embodic.test-log] hello world" in stream.getvalue()


def test_json_logging(logger):
    log.enable_pretty_logging(logging.INFO, json_logs=True, logger=logger)
    stream = io.StringIO()
    logger.handlers[0].setStream(stream)
    logger.warning("k=%i", 10)
    record = json.loads(stream.getvalue())
    assert record["message"] == "k=10"
    assert record["levelname"] == "WARNING"
    assert record["name"] == "embodic.test-log"


def test_enable_twice_keeps_one_handler(logger):
    log.enable_pretty_logging(logger=logger)
    log.enable_pretty_logging(json_logs=True, logger=logger)
    assert len(logger.handlers) == 1


def test_scrub_params():
    scrubbed = log._scrub_params(
        {"samples": list(range(100)), "k_list": [8, 16], "sequence": "0" * 100, "n": 4}
    )
    assert scrubbed == {
        "samples": "[100 values]",
        "k_list": [8, 16],
        "sequence": "[100 characters]",
        "n": 4,
    }


@pytest.mark.parametrize(
    "status, duration, level",
    [
        ("success", 0.01, logging.DEBUG),
        ("success", 20.0, logging.INFO),
        ("precondition", 0.01, logging.WARNING),
        ("config", 0.01, logging.WARNING),
        ("io", 0.01, logging.ERROR),
        ("failure", 0.01, logging.ERROR),
    ],
)
def test_log_run_levels(caplog, status, duration, level):
    cfg = ExperimentConfig("whiten", {"samples": [0.5] * 50, "bins": 4}, seed=3)
    with caplog.at_level(logging.DEBUG, logger="embodic"):
        error = None if status == "success" else "boom"
        log.log_run(cfg, status, duration, rows=50, error=error)
    (record,) = caplog.records
    assert record.levelno == level
    message = record.getMessage()
    assert message.startswith(f"{status} whiten seed=3 rows=50")
    assert "[50 values]" in message
    if status != "success":
        assert ": boom" in message
