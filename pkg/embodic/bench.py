"""
Seeded experiment harness.

An ExperimentConfig names an experiment kind, its parameters and a master
seed. run_experiment dispatches it to the module that owns the kind and
collects result rows; emit_report renders them. The same config always
gives the same rows.
"""

import copy
import json
import os
import sys
import tempfile
import time
from collections import namedtuple
from dataclasses import dataclass, field, replace
from functools import lru_cache

import jsonschema
import numpy as np

from . import codec, infomorph, motorlab
from ._version import __version__
from .log import app_log, log_run
from .metrics import EXPERIMENT_TIME
from .report import ReportError, plain, render
from .utils import PreconditionError, derive_seed, make_rng

HERE = os.path.dirname(os.path.abspath(__file__))
EXPERIMENT_SCHEMA_PATH = os.path.join(HERE, "schemas", "experiment.json")

CONFIG_VERSION = 1

# Exit codes are part of the command line contract, keep them stable.
EXIT_CODES = {
    "success": 0,
    "failure": 1,
    "config": 2,
    "precondition": 3,
    "io": 4,
}


class ConfigError(ValueError):
    """Raised for configs that do not validate, unknown kinds and unknown reproductions"""

    def __init__(self, message, *, validation_error=None):
        super().__init__(message)
        self.validation_error = validation_error


def exit_status(error):
    """Name of the outcome an exception stands for, a key of EXIT_CODES"""
    if isinstance(error, ConfigError):
        return "config"
    if isinstance(error, (PreconditionError, ReportError)):
        return "precondition"
    if isinstance(error, OSError):
        return "io"
    return "failure"


@lru_cache()
def _validator():
    with open(EXPERIMENT_SCHEMA_PATH) as f:
        schema = json.load(f)
    return jsonschema.Draft7Validator(schema)


def _validation_message(error):
    where = "/".join(str(part) for part in error.absolute_path)
    if where:
        return f"{where}: {error.message}"
    return error.message


def validate_config_document(doc):
    """Raise ConfigError unless `doc` is a valid experiment config document"""
    error = jsonschema.exceptions.best_match(_validator().iter_errors(doc))
    if error is not None:
        raise ConfigError(
            f"invalid experiment config: {_validation_message(error)}",
            validation_error=error,
        )


@dataclass
class ExperimentConfig:
    """What to run: kind, kind-specific params, master seed"""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = None
    version: int = CONFIG_VERSION

    def to_dict(self):
        doc = {
            "version": self.version,
            "kind": self.kind,
            "seed": self.seed,
            "params": copy.deepcopy(self.params),
        }
        if self.output_dir is not None:
            doc["output_dir"] = self.output_dir
        return doc

    @classmethod
    def from_dict(cls, doc):
        validate_config_document(doc)
        return cls(
            kind=doc["kind"],
            params=copy.deepcopy(doc.get("params", {})),
            seed=doc.get("seed", 0),
            output_dir=doc.get("output_dir"),
            version=doc.get("version", CONFIG_VERSION),
        )

    def validate(self):
        validate_config_document(self.to_dict())

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"experiment config is not valid JSON: {e}") from e
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.loads(f.read())


@dataclass
class ExperimentResult:
    """Result rows with the config that produced them

    Only `columns` and `rows` are rendered to CSV, so timing never
    affects the bytes of a result.
    """

    name: str
    columns: tuple
    rows: list
    config: ExperimentConfig
    version: str = __version__
    duration: float = 0.0
    notes: list = field(default_factory=list)

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def select(self, *columns):
        """The same result restricted to `columns`, in that order"""
        index = [self.columns.index(name) for name in columns]
        return replace(
            self,
            columns=tuple(columns),
            rows=[tuple(row[j] for j in index) for row in self.rows],
            notes=list(self.notes),
        )


# experiment kinds

Experiment = namedtuple("Experiment", ["columns", "runner"])
EXPERIMENTS = {}

DEFAULT_PARAMS = {
    "entropy": {"bases": [2, 10]},
    "equivalence": {},
    "hierarchy": {"base": 2},
    "hand": {"finger_resolution": 4, "fingers": 5, "bases": [2, 10]},
    "cs-bench": {
        "n": 64,
        "s": 4,
        "k_list": [8, 16, 24, 32, 48],
        "trials": 200,
        "ensemble": "gaussian",
        "tol": 1e-8,
    },
    "sensing": {"n": 400, "s": 10, "k": 20, "trials": 100, "ensemble": "gaussian"},
    "baseline": {
        "n": 64,
        "s": 4,
        "k": 32,
        "iterations": [1, 10, 100, 500],
        "ensemble": "gaussian",
    },
    "capacity": {
        "m": 256,
        "k_list": [8, 12, 16, 24, 32],
        "p": 0.05,
        "trials": 200,
        "alphabet": 2,
    },
    "erasure": {
        "r_x": 256,
        "r_y": 2,
        "k_list": [8, 12, 16, 24],
        "failed_units": 1,
        "trials": 200,
    },
    "whiten": {"n": 10_000, "bins": 16},
    "motor-bench": {"alphabets": [2], "k_max": 16, "probes": motorlab.DEFAULT_PROBES},
    "fitts": {"alphabets": [2]},
    "chunks": {"length": 2, "mode": motorlab.OVERLAPPING, "base": 2},
    "chunk-profile": {
        "max_length": 3,
        "mode": motorlab.OVERLAPPING,
        "base": 2,
        "alphabet": None,
    },
    "adapt": {"alphabets": [2]},
}


def experiment(kind, columns):
    """Register `runner(params, seed, workers)` as the experiment `kind`"""

    def register(runner):
        EXPERIMENTS[kind] = Experiment(tuple(columns), runner)
        return runner

    return register


@experiment("entropy", ["base", "free_entropy", "constrained_entropy", "loss"])
def _entropy(params, seed, workers):
    try:
        m, c = infomorph.load_document(params["document"])
    except jsonschema.ValidationError as e:
        raise ConfigError(
            f"invalid morphology document: {_validation_message(e)}",
            validation_error=e,
        ) from e
    return [
        (
            base,
            infomorph.free_entropy(m, base).value,
            infomorph.constrained_entropy(m, c, base).value,
            infomorph.relative_entropy_loss(m, c, base),
        )
        for base in params["bases"]
    ]


@experiment("equivalence", ["r_x", "r_y", "k", "ratio", "capacity"])
def _equivalence(params, seed, workers):
    rows = []
    for r_x, r_y in params["pairs"]:
        report = infomorph.equivalence(r_x, r_y)
        rows.append((r_x, r_y, report.k, report.ratio, report.capacity))
    return rows


@experiment("hierarchy", ["level", "count", "resolution", "capacity", "holds"])
def _hierarchy(params, seed, workers):
    levels = [tuple(level) for level in params["levels"]]
    return [tuple(row) for row in infomorph.information_hierarchy(levels, params["base"])]


@experiment("hand", ["base", "grip", "states", "entropy", "loss"])
def _hand(params, seed, workers):
    rows = []
    for base in params["bases"]:
        for rung in infomorph.human_hand(
            params["finger_resolution"], params["fingers"], base
        ):
            rows.append((base, rung.name, rung.states, rung.entropy, rung.loss))
    return rows


@experiment("cs-bench", ["k", "rate", "mean_residual"])
def _cs_bench(params, seed, workers):
    curve = codec.cs_phase_curve(
        params["n"],
        params["s"],
        params["k_list"],
        params["trials"],
        seed=seed,
        ensemble=params["ensemble"],
        tol=params["tol"],
        workers=workers,
    )
    return [tuple(point) for point in curve]


@experiment("sensing", ["n", "k", "compression", "rate", "mean_residual"])
def _sensing(params, seed, workers):
    return codec.sensing_demo(
        params["n"],
        params["s"],
        params["k"],
        params["trials"],
        seed=seed,
        ensemble=params["ensemble"],
        workers=workers,
    )


@experiment("baseline", codec.BaselineRow._fields)
def _baseline(params, seed, workers):
    rows = codec.baseline_contrast(
        params["n"],
        params["s"],
        params["k"],
        params["iterations"],
        seed=seed,
        ensemble=params["ensemble"],
    )
    return [tuple(row) for row in rows]


@experiment("capacity", ["k", "accuracy"])
def _capacity(params, seed, workers):
    curve = codec.capacity_curve(
        params["m"],
        params["k_list"],
        params["p"],
        params["trials"],
        seed=seed,
        alphabet=params["alphabet"],
        workers=workers,
    )
    return [tuple(point) for point in curve]


@experiment("erasure", ["k", "code", "accuracy"])
def _erasure(params, seed, workers):
    curve = codec.erasure_curve(
        params["r_x"],
        params["r_y"],
        params["k_list"],
        params["failed_units"],
        params["trials"],
        seed=seed,
        workers=workers,
    )
    return [tuple(point) for point in curve]


@experiment("whiten", ["sample", "bin"])
def _whiten(params, seed, workers):
    samples = params.get("samples")
    if samples is None:
        samples = make_rng(derive_seed(seed, "whiten")).standard_normal(params["n"])
    bins = codec.whiten(samples, params["bins"])
    return list(zip(np.asarray(samples, dtype=float).tolist(), bins.tolist()))


@experiment("motor-bench", ["k", "ry", "max_error", "bound"])
def _motor_bench(params, seed, workers):
    probes = np.linspace(0.0, 1.0, params["probes"], endpoint=False)
    rows = []
    for alphabet in params["alphabets"]:
        for row in motorlab.precision_curve(params["k_max"], alphabet, probes):
            rows.append((row.k, alphabet, row.max_error, row.bound))
    return rows


@experiment("fitts", ["d", "w", "ry", "id", "steps"])
def _fitts(params, seed, workers):
    rows = []
    for d, w in params["tasks"]:
        task = motorlab.ReachTask(d, w)
        for alphabet in params["alphabets"]:
            rows.append(
                (
                    d,
                    w,
                    alphabet,
                    motorlab.fitts_id(task),
                    motorlab.simulate_reach(task, alphabet),
                )
            )
    return rows


def chunk_label(chunk):
    """Chunks are labelled like (0 1 1) so that labels stay strings in CSV"""
    return "(" + " ".join(str(s) for s in chunk) + ")"


@experiment("chunks", ["length", "chunk", "count", "probability", "entropy"])
def _chunks(params, seed, workers):
    rep = motorlab.extract_repertoire(
        params["sequence"], params["length"], params["mode"]
    )
    h = motorlab.chunk_entropy(rep, params["base"])
    return [
        (rep.length, chunk_label(chunk), count, count / rep.windows, h)
        for chunk, count in sorted(rep.counts.items())
    ]


@experiment(
    "chunk-profile",
    ["length", "windows", "distinct", "combinatorics", "entropy", "entropy_per_symbol"],
)
def _chunk_profile(params, seed, workers):
    rows = motorlab.repertoire_profile(
        params["sequence"],
        params["max_length"],
        params["mode"],
        params["base"],
        params["alphabet"],
    )
    return [tuple(row) for row in rows]


@experiment("adapt", ["sigma", "ry", "k", "cell_width"])
def _adapt(params, seed, workers):
    rows = []
    for sigma in params["sigmas"]:
        for alphabet in params["alphabets"]:
            k = motorlab.adapt_code_length(sigma, alphabet)
            rows.append((sigma, alphabet, k, 1 / alphabet**k))
    return rows


def run_experiment(cfg, workers=1, event_log=None):
    """Run one experiment

    The config is validated first and never mutated; kind defaults fill
    in missing params. Every run, failed or not, is logged, timed and
    reported to `event_log` when one is given.
    """
    start = time.perf_counter()
    rows = []
    status = "failure"
    error = None
    try:
        cfg.validate()
        columns, runner = EXPERIMENTS[cfg.kind]
        params = {**DEFAULT_PARAMS.get(cfg.kind, {}), **copy.deepcopy(cfg.params)}
        app_log.debug("Running %s experiment with %s", cfg.kind, params)
        rows = [
            tuple(plain(v) for v in row)
            for row in runner(params, seed=cfg.seed, workers=workers)
        ]
        status = "success"
    except Exception as e:
        status = exit_status(e)
        error = e
        raise
    finally:
        duration = time.perf_counter() - start
        EXPERIMENT_TIME.labels(kind=cfg.kind, status=status).observe(duration)
        log_run(cfg, status, duration, rows=len(rows), error=error)
        if event_log is not None:
            event_log.emit_run(
                cfg, status, duration, rows=len(rows), exit_code=EXIT_CODES[status]
            )
    return ExperimentResult(
        name=cfg.kind,
        columns=columns,
        rows=rows,
        config=cfg,
        duration=duration,
    )


# writing results


def atomic_write(path, text):
    """Write `text` to a temporary file next to `path`, then rename it into place"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(
        dir=directory, prefix=f".{os.path.basename(path)}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def failure_marker_path(out_dir, name):
    return os.path.join(out_dir, f"{name}.failed")


def write_failure_marker(out_dir, name, error):
    """Leave `<name>.failed` holding the error message in `out_dir`"""
    path = failure_marker_path(out_dir, name)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(path, "w", encoding="utf8") as f:
            f.write(f"{type(error).__name__}: {error}\n")
    except OSError as e:
        app_log.error("Could not write failure marker %s: %s", path, e)
        return None
    return path


def emit_report(result, fmt, out_dir=None, stream=None):
    """Render `result` as csv, json or svg

    Without `out_dir` the rendering goes to `stream` (stdout by default).
    Otherwise it is written atomically to `<out_dir>/<name>.<fmt>` and the
    path is returned; on failure a `.failed` marker is left instead.
    """
    if out_dir is None:
        text = render(result, fmt)
        (stream or sys.stdout).write(text)
        return None

    path = os.path.join(out_dir, f"{result.name}.{fmt}")
    try:
        atomic_write(path, render(result, fmt))
    except Exception as e:
        write_failure_marker(out_dir, result.name, e)
        raise
    marker = failure_marker_path(out_dir, result.name)
    if os.path.exists(marker):
        os.remove(marker)
    app_log.info("Wrote %s", path)
    return path


# reproductions of worked examples

Reproduction = namedtuple("Reproduction", ["config", "claims"])

GRASP_DOCUMENT = {
    "version": 1,
    "morphology": {
        "kind": "parallel",
        "children": [
            {"kind": "leaf", "id": f"finger{i}", "resolution": 3} for i in range(3)
        ],
    },
    "constraints": {"mode": "count", "count": 3},
}

BINARY_SEQUENCE = [0, 1, 0, 0, 0, 1, 1, 0, 0]


def _row(result, **where):
    for row in result.rows:
        if all(row[result.columns.index(key)] == value for key, value in where.items()):
            return dict(zip(result.columns, row))
    raise KeyError(where)


def _equivalence_claims(result):
    return [
        ("binary units matching 1024 states", "10", _row(result, r_y=2)["k"]),
        ("four-state units matching 1024 states", "5", _row(result, r_y=4)["k"]),
    ]


def _grasp_claims(result):
    base10 = _row(result, base=10)
    bits = _row(result, base=2)
    return [
        ("relative entropy loss, base 10", "-0.95", f"{base10['loss']:.3f}"),
        ("relative entropy loss, bits", "not stated", f"{bits['loss']:.3f}"),
        (
            "object in hand has the entropy of one free finger",
            "log 3",
            f"{base10['constrained_entropy']:.3f}",
        ),
    ]


def _sensory_claims(result):
    return [("binary cameras matching a 256-level camera", "8", _row(result, r_y=2)["k"])]


def _chunks_claims(result):
    pairs = _row(result, length=2)
    singles = _row(result, length=1)
    triplets = _row(result, length=3)
    return [
        ("distinct overlapping pairs", "4", pairs["distinct"]),
        ("possible binary triplets", "9", f"{triplets['combinatorics']} (exact)"),
        (
            "entropy per symbol, pairs against single symbols",
            "lower",
            f"{pairs['entropy_per_symbol']:.3f} <= {singles['entropy_per_symbol']:.3f}",
        ),
    ]


def _precision_claims(result):
    binary = _row(result, ry=2, k=10)["max_error"]
    quaternary = _row(result, ry=4, k=5)["max_error"]
    return [
        ("precision of 10 binary symbols", "2^-11", f"{binary:.6g}"),
        ("precision of 5 four-state symbols", "same", f"{quaternary:.6g}"),
    ]


def _fitts_claims(result):
    steps = [str(_row(result, d=d, w=1, ry=2)["steps"]) for d in (4, 8, 16)]
    return [
        (
            "correction steps for D = 4, 8, 16 (binary)",
            "logarithmic in D",
            ", ".join(steps),
        )
    ]


def _hand_claims(result):
    free = _row(result, base=2, grip="free")
    pen = _row(result, base=2, grip="pen")
    closed = _row(result, base=2, grip="closed")
    return [
        ("free hand entropy, bits", "5 log R_finger = 10", f"{free['entropy']:.3f}"),
        ("pen grip entropy, bits", "2 log R_finger = 4", f"{pen['entropy']:.3f}"),
        ("closed grasp entropy", "0", f"{closed['entropy']:.3f}"),
    ]


def _compression_claims(result):
    row = result.rows[0]
    point = dict(zip(result.columns, row))
    return [
        (
            "exact recovery at 20-fold compression",
            "no noticeable loss (visual data)",
            f"rate {point['rate']:.3f} at {point['compression']:.0f}x",
        )
    ]


def _erasure_claims(result):
    k = max(result.column("k"))
    digital = _row(result, k=k, code="digital")["accuracy"]
    random = _row(result, k=k, code="random")["accuracy"]
    return [
        (
            f"decoding with one failed unit, k={k}",
            "random codes are robust to unit failure",
            f"digital {digital:.3f}, random {random:.3f}",
        )
    ]


REPRODUCTIONS = {
    "fig4": Reproduction(
        lambda: ExperimentConfig("equivalence", {"pairs": [[1024, 2], [1024, 4]]}),
        _equivalence_claims,
    ),
    "fig5": Reproduction(
        lambda: ExperimentConfig(
            "entropy", {"document": GRASP_DOCUMENT, "bases": [10, 2]}
        ),
        _grasp_claims,
    ),
    "sensory": Reproduction(
        lambda: ExperimentConfig("equivalence", {"pairs": [[256, 2]]}),
        _sensory_claims,
    ),
    "chunks": Reproduction(
        lambda: ExperimentConfig(
            "chunk-profile",
            {"sequence": BINARY_SEQUENCE, "max_length": 3, "alphabet": 2},
        ),
        _chunks_claims,
    ),
    "fig6-precision": Reproduction(
        lambda: ExperimentConfig("motor-bench", {"alphabets": [2, 4], "k_max": 10}),
        _precision_claims,
    ),
    "fitts": Reproduction(
        lambda: ExperimentConfig(
            "fitts", {"tasks": [[4, 1], [8, 1], [16, 1]], "alphabets": [2, 4]}
        ),
        _fitts_claims,
    ),
    "hand": Reproduction(
        lambda: ExperimentConfig("hand", {"finger_resolution": 4, "bases": [2, 10]}),
        _hand_claims,
    ),
    "compression": Reproduction(
        lambda: ExperimentConfig("sensing", {"n": 400, "s": 10, "k": 20}),
        _compression_claims,
    ),
    "erasure": Reproduction(
        lambda: ExperimentConfig("erasure", {"k_list": [8, 12, 16, 24]}),
        _erasure_claims,
    ),
}


def reproduce_example(example_id, seed=0, workers=1, event_log=None):
    """Run the canned config of a worked example

    The result is named after the example; its notes set the expected
    number next to the computed one.
    """
    try:
        reproduction = REPRODUCTIONS[example_id]
    except KeyError:
        raise ConfigError(
            f"unknown reproduction {example_id!r}, expected one of {', '.join(REPRODUCTIONS)}"
        )
    cfg = reproduction.config()
    cfg.seed = seed
    result = run_experiment(cfg, workers=workers, event_log=event_log)
    result.name = example_id
    for claim, expected, computed in reproduction.claims(result):
        note = f"{claim}: expected {expected}, computed {computed}"
        app_log.info(note)
        result.notes.append(note)
    return result
