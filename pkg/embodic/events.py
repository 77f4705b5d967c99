"""
Structured run events, one JSON record per finished experiment.
"""

import datetime
import json
import logging
import os

import jsonschema
from pythonjsonlogger import jsonlogger
from traitlets import Callable
from traitlets.config import Configurable

HERE = os.path.dirname(os.path.abspath(__file__))
EVENT_SCHEMA_PATH = os.path.join(HERE, "event-schemas")

RUN_SCHEMA = "embodic.org/run"
RUN_SCHEMA_VERSION = 1

# filled in by emit(), never part of a registered schema
CAPSULE_FIELDS = ("timestamp", "schema", "version")


def _dump_event(record, **kwargs):
    # python-json-logger always adds `message` (null here) and, on newer
    # Pythons, `taskName`; neither belongs in an event
    record.pop("message", None)
    record.pop("taskName", None)
    return json.dumps(record, **kwargs)


def file_handlers(path):
    """A handlers_maker appending events to `path` as JSON lines"""

    def handlers_maker(event_log):
        return [logging.FileHandler(path, encoding="utf8")]

    return handlers_maker


class EventLog(Configurable):
    """Validate run events and hand them to logging handlers

    Without a handlers_maker every event is dropped before validation,
    so a bare EventLog costs nothing.
    """

    handlers_maker = Callable(
        None,
        config=True,
        allow_none=True,
        help="""
        Callable taking the EventLog and returning the logging.Handler
        instances that receive events, e.g. embodic.events.file_handlers(path).

        None discards all events.
        """,
    )

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.schemas = {}
        self._validators = {}

        self.log = logging.getLogger(__name__)
        self.log.propagate = False
        self.log.setLevel(logging.INFO)

        self.handlers = list(self.handlers_maker(self)) if self.handlers_maker else []
        formatter = jsonlogger.JsonFormatter(json_serializer=_dump_event)
        for handler in self.handlers:
            handler.setFormatter(formatter)
            self.log.addHandler(handler)

    def register_schema(self, schema):
        """Accept events of `schema`, keyed by its $id and version"""
        cls = jsonschema.validators.validator_for(schema)
        cls.check_schema(schema)

        missing = [field for field in ("$id", "version") if field not in schema]
        if missing:
            raise ValueError(f"event schema needs {' and '.join(missing)}")
        clash = sorted(set(CAPSULE_FIELDS) & set(schema.get("properties", {})))
        if clash:
            raise ValueError(
                f"event schema {schema['$id']} may not define {', '.join(clash)}"
            )

        key = (schema["$id"], schema["version"])
        self.schemas[key] = schema
        self._validators[key] = cls(schema)

    def register_default_schemas(self):
        """Register every schema shipped in event-schemas/"""
        for filename in sorted(os.listdir(EVENT_SCHEMA_PATH)):
            if filename.endswith(".json"):
                with open(os.path.join(EVENT_SCHEMA_PATH, filename)) as f:
                    self.register_schema(json.load(f))

    def emit(self, schema_name, version, event):
        if not self.handlers:
            return
        try:
            validator = self._validators[(schema_name, version)]
        except KeyError:
            raise ValueError(
                f"no event schema {schema_name} version {version} registered"
            ) from None
        validator.validate(event)

        now = datetime.datetime.now(tz=datetime.timezone.utc)
        self.log.info(
            {
                "timestamp": now.strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
                "schema": schema_name,
                "version": version,
                **event,
            }
        )

    def emit_run(self, config, status, duration, rows=0, exit_code=0):
        """Record the outcome of running `config`"""
        self.emit(
            RUN_SCHEMA,
            RUN_SCHEMA_VERSION,
            {
                "kind": config.kind,
                "status": status,
                "seed": config.seed,
                "rows": rows,
                "duration": duration,
                "exit_code": exit_code,
            },
        )

    def close(self):
        for handler in self.handlers:
            self.log.removeHandler(handler)
            handler.close()
        self.handlers = []
