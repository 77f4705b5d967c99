import json
import logging

import jsonschema
import pytest

from embodic import events
from embodic.bench import ExperimentConfig, run_experiment
from embodic.events import EventLog, file_handlers


def read_events(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def test_register_invalid_schemas():
    el = EventLog()
    with pytest.raises(jsonschema.SchemaError):
        el.register_schema({"properties": True})
    # $id and version are required
    with pytest.raises(ValueError):
        el.register_schema({"properties": {}})
    # timestamp is added to every capsule
    with pytest.raises(ValueError):
        el.register_schema(
            {
                "$id": "embodic.org/test",
                "version": 1,
                "properties": {"timestamp": {"type": "string"}},
            }
        )


def test_default_schemas_are_registered():
    el = EventLog()
    el.register_default_schemas()
    assert (events.RUN_SCHEMA, events.RUN_SCHEMA_VERSION) in el.schemas


def test_events_are_discarded_without_handlers():
    el = EventLog()
    # nothing registered, nothing raised
    el.emit("embodic.org/unknown", 1, {"anything": True})


def test_emit_run(tmp_path, equivalence_config):
    path = str(tmp_path / "events.jsonl")
    el = EventLog(handlers_maker=file_handlers(path))
    el.register_default_schemas()
    el.emit_run(equivalence_config, "success", 0.25, rows=2, exit_code=0)
    el.close()

    (capsule,) = read_events(path)
    assert "timestamp" in capsule
    del capsule["timestamp"]
    assert capsule == {
        "schema": "embodic.org/run",
        "version": 1,
        "kind": "equivalence",
        "status": "success",
        "seed": 1,
        "rows": 2,
        "duration": 0.25,
        "exit_code": 0,
    }


def test_emit_rejects_events_outside_the_schema(tmp_path, equivalence_config):
    el = EventLog(handlers_maker=lambda el: [logging.NullHandler()])
    el.register_default_schemas()
    try:
        with pytest.raises(jsonschema.ValidationError):
            el.emit_run(equivalence_config, "exploded", 0.1)
        with pytest.raises(jsonschema.ValidationError):
            el.emit_run(equivalence_config, "success", -1.0)
        with pytest.raises(ValueError):
            el.emit("embodic.org/run", 2, {})
    finally:
        el.close()


def test_every_run_emits_one_event(tmp_path, equivalence_config):
    path = str(tmp_path / "events.jsonl")
    el = EventLog(handlers_maker=file_handlers(path))
    el.register_default_schemas()
    run_experiment(equivalence_config, event_log=el)
    bad = ExperimentConfig("equivalence", {"pairs": [[1024, 1]]})
    with pytest.raises(ValueError):
        run_experiment(bad, event_log=el)
    el.close()

    first, second = read_events(path)
    assert (first["status"], first["rows"], first["exit_code"]) == ("success", 2, 0)
    assert (second["status"], second["rows"], second["exit_code"]) == (
        "precondition",
        0,
        3,
    )


def test_events_stay_out_of_the_application_log(tmp_path, equivalence_config, caplog):
    path = str(tmp_path / "events.jsonl")
    el = EventLog(handlers_maker=file_handlers(path))
    el.register_default_schemas()
    with caplog.at_level(logging.DEBUG):
        el.emit_run(equivalence_config, "success", 0.0)
    el.close()
    assert "embodic.org/run" not in caplog.text
