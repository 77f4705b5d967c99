"""
The embodic command line.

``embodic <subcommand> [flags]``: every subcommand builds an
ExperimentConfig from its flags (or from ``--config FILE``, whose values
win), runs it and renders the result to stdout or ``--out DIR``.
"""

import json
import logging
import sys

from traitlets import Bool, Enum, Float, Integer, TraitError, Unicode, default
from traitlets.config import Application
from traitlets.config.loader import ArgumentError

from ._version import __version__
from .bench import (
    EXIT_CODES,
    REPRODUCTIONS,
    ConfigError,
    ExperimentConfig,
    emit_report,
    exit_status,
    reproduce_example,
    run_experiment,
    write_failure_marker,
)
from .codec import Ensemble
from .events import EventLog, file_handlers
from .log import app_log, enable_pretty_logging
from .metrics import write_metrics
from .motorlab import WINDOW_MODES, parse_sequence
from .report import FORMATS
from .utils import IntegerList, NumberList, PreconditionError


class EmbodicCommand(Application):
    """Base class of the subcommands: global flags and the run/report cycle"""

    # experiment kind built by this command
    kind = None

    version = __version__

    @default("log_level")
    def _log_level(self):
        return logging.INFO

    aliases = {
        "log-level": "Application.log_level",
        "seed": "EmbodicCommand.seed",
        "out": "EmbodicCommand.out_dir",
        "format": "EmbodicCommand.output_format",
        "config": "EmbodicCommand.config_file",
        "f": "EmbodicCommand.config_file",
        "workers": "EmbodicCommand.workers",
        "events": "EmbodicCommand.events_file",
        "metrics": "EmbodicCommand.metrics_file",
    }

    flags = {
        "debug": (
            {"Application": {"log_level": logging.DEBUG}},
            "Log per-iteration detail",
        ),
        "json-logs": (
            {"EmbodicCommand": {"json_logs": True}},
            "Render the application log as JSON records",
        ),
    }

    seed = Integer(
        0,
        help="""
        Master seed. Every trial derives its own sub-seed from it,
        so a run is reproducible whatever the number of workers.
        """,
        config=True,
    )

    out_dir = Unicode(
        None,
        allow_none=True,
        help="""
        Directory to write the result file `<name>.<format>` to.

        When unset, the result is written to stdout.
        """,
        config=True,
    )

    output_format = Enum(
        FORMATS,
        "csv",
        help="Result format: csv, json or svg",
        config=True,
    )

    config_file = Unicode(
        None,
        allow_none=True,
        help="""
        Experiment config (JSON) to load.

        Values from the file override the command line flags.
        """,
        config=True,
    )

    workers = Integer(
        1,
        help="Number of threads running Monte-Carlo trials",
        config=True,
    )

    events_file = Unicode(
        None,
        allow_none=True,
        help="Append one JSON event per experiment run to this file",
        config=True,
    )

    metrics_file = Unicode(
        None,
        allow_none=True,
        help="Write Prometheus metrics in text format to this file after the run",
        config=True,
    )

    json_logs = Bool(
        False,
        help="Render the application log as JSON records",
        config=True,
    )

    def parse_command_line(self, argv=None):
        # traitlets exits 1 on bad values, the command line contract says 2
        try:
            Application.parse_command_line.__wrapped__(self, argv)
        except (TraitError, ArgumentError) as e:
            self.log.critical("Bad command line: %s", e)
            self.exit(EXIT_CODES["config"])

    def initialize(self, argv=None):
        super().initialize(argv)
        enable_pretty_logging(self.log_level, json_logs=self.json_logs)
        self.log = app_log

    def experiment_params(self):
        """Params built from the command line flags"""
        return {}

    @property
    def result_name(self):
        return self.kind

    def experiment_config(self):
        """The config to run: flags, overridden by --config"""
        params = self.experiment_params()
        cfg = ExperimentConfig(self.kind, params, self.seed, self.out_dir)
        if self.config_file:
            loaded = ExperimentConfig.load(self.config_file)
            if loaded.kind != self.kind:
                raise ConfigError(
                    f"{self.config_file} configures a {loaded.kind} experiment, not {self.kind}"
                )
            cfg = ExperimentConfig(
                self.kind,
                {**cfg.params, **loaded.params},
                loaded.seed,
                loaded.output_dir or self.out_dir,
            )
        return cfg

    def execute(self, cfg, event_log):
        return run_experiment(cfg, workers=self.workers, event_log=event_log)

    def init_event_log(self):
        if self.events_file:
            event_log = EventLog(
                parent=self, handlers_maker=file_handlers(self.events_file)
            )
        else:
            event_log = EventLog(parent=self)
        event_log.register_default_schemas()
        return event_log

    def run(self):
        """Run the experiment and report it, returning the exit code"""
        event_log = self.init_event_log()
        out_dir = self.out_dir
        try:
            cfg = self.experiment_config()
            out_dir = cfg.output_dir
            result = self.execute(cfg, event_log)
            emit_report(result, self.output_format, out_dir=out_dir, stream=sys.stdout)
            if self.metrics_file:
                write_metrics(self.metrics_file)
        except Exception as e:
            status = exit_status(e)
            if status == "failure":
                self.log.exception("Experiment %s failed", self.result_name)
            else:
                self.log.error("%s: %s", self.result_name, e)
            if out_dir:
                write_failure_marker(out_dir, self.result_name, e)
            return EXIT_CODES[status]
        finally:
            event_log.close()
        return EXIT_CODES["success"]

    def start(self):
        self.exit(self.run())


def _read_input(path):
    """Text of `path`, stdin for '-'"""
    if path == "-":
        return sys.stdin.read()
    with open(path) as f:
        return f.read()


class RunCommand(EmbodicCommand):
    """Run any experiment config"""

    name = "embodic run"
    description = "Run the experiment described by --config FILE"

    @property
    def result_name(self):
        return self.kind or "run"

    def experiment_config(self):
        if not self.config_file:
            raise ConfigError("embodic run needs --config FILE")
        cfg = ExperimentConfig.load(self.config_file)
        self.kind = cfg.kind
        if cfg.output_dir is None:
            cfg.output_dir = self.out_dir
        return cfg


class ReproduceCommand(EmbodicCommand):
    """Reproduce a worked example by id"""

    name = "embodic reproduce"
    description = (
        "Run the canned config of a worked example and print the expected "
        f"number next to the computed one. Ids: {', '.join(REPRODUCTIONS)}"
    )

    @property
    def result_name(self):
        return self.extra_args[0] if self.extra_args else "reproduce"

    def experiment_config(self):
        if len(self.extra_args) != 1:
            raise ConfigError(
                f"embodic reproduce needs exactly one id out of {', '.join(REPRODUCTIONS)}"
            )
        # only carries seed and output dir, the reproduction owns the rest
        return ExperimentConfig("reproduce", {}, self.seed, self.out_dir)

    def execute(self, cfg, event_log):
        result = reproduce_example(
            self.result_name, seed=cfg.seed, workers=self.workers, event_log=event_log
        )
        for note in result.notes:
            print(note, file=sys.stderr)
        return result


class EntropyCommand(EmbodicCommand):
    """Free and constrained entropy of a morphology document"""

    name = "embodic entropy"
    description = "embodic entropy FILE: entropy of the morphology document in FILE ('-' for stdin)"
    kind = "entropy"

    aliases = {
        **EmbodicCommand.aliases,
        "base": "EntropyCommand.bases",
        "bases": "EntropyCommand.bases",
    }

    bases = NumberList(
        [2, 10],
        help="Log bases to report entropies in, any real > 1",
        config=True,
    )

    def experiment_params(self):
        if len(self.extra_args) != 1:
            raise ConfigError("embodic entropy needs one morphology document")
        text = _read_input(self.extra_args[0])
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"morphology document is not valid JSON: {e}") from e
        return {"document": document, "bases": self.bases}


class EquivalenceCommand(EmbodicCommand):
    """Number of low-resolution devices matching one high-resolution device"""

    name = "embodic equivalence"
    description = "Smallest k with R_Y**k >= R_X"
    kind = "equivalence"

    aliases = {
        **EmbodicCommand.aliases,
        "rx": "EquivalenceCommand.rx",
        "ry": "EquivalenceCommand.ry",
    }

    rx = Integer(1024, help="Resolution of the high-resolution device", config=True)
    ry = Integer(2, help="Resolution of each low-resolution device", config=True)

    def experiment_params(self):
        return {"pairs": [[self.rx, self.ry]]}


class HandCommand(EmbodicCommand):
    """Entropy ladder of a hand from free motion to a closed grasp"""

    name = "embodic hand"
    description = "Entropy of a hand under typical grips"
    kind = "hand"

    aliases = {
        **EmbodicCommand.aliases,
        "finger-resolution": "HandCommand.finger_resolution",
        "fingers": "HandCommand.fingers",
        "base": "HandCommand.bases",
        "bases": "HandCommand.bases",
    }

    finger_resolution = Integer(4, help="States of one finger", config=True)
    fingers = Integer(5, help="Number of fingers", config=True)
    bases = NumberList(
        [2, 10], help="Log bases to report entropies in, any real > 1", config=True
    )

    def experiment_params(self):
        return {
            "finger_resolution": self.finger_resolution,
            "fingers": self.fingers,
            "bases": self.bases,
        }


class CsBenchCommand(EmbodicCommand):
    """Sparse recovery rate of orthogonal matching pursuit against k"""

    name = "embodic cs-bench"
    description = "Exact recovery rate of s-sparse length-N signals from k random measurements"
    kind = "cs-bench"

    aliases = {
        **EmbodicCommand.aliases,
        "n": "CsBenchCommand.n",
        "s": "CsBenchCommand.s",
        "k-list": "CsBenchCommand.k_list",
        "trials": "CsBenchCommand.trials",
        "ensemble": "CsBenchCommand.ensemble",
    }

    n = Integer(64, help="Signal length N", config=True)
    s = Integer(4, help="Sparsity s", config=True)
    k_list = IntegerList(
        [8, 16, 24, 32, 48], help="Numbers of measurements to try", config=True
    )
    trials = Integer(200, help="Trials per k", config=True)
    ensemble = Enum(
        [e.value for e in Ensemble],
        Ensemble.GAUSSIAN.value,
        help="Measurement matrix ensemble",
        config=True,
    )

    def experiment_params(self):
        return {
            "n": self.n,
            "s": self.s,
            "k_list": self.k_list,
            "trials": self.trials,
            "ensemble": self.ensemble,
        }


class SensingCommand(EmbodicCommand):
    """Recovery at one fixed compression ratio"""

    name = "embodic sensing"
    description = "Exact recovery rate of a sparse scene compressed N/k fold"
    kind = "sensing"

    aliases = {
        **EmbodicCommand.aliases,
        "n": "SensingCommand.n",
        "s": "SensingCommand.s",
        "k": "SensingCommand.k",
        "trials": "SensingCommand.trials",
    }

    n = Integer(400, help="Signal length N", config=True)
    s = Integer(10, help="Sparsity s", config=True)
    k = Integer(20, help="Number of measurements", config=True)
    trials = Integer(100, help="Number of trials", config=True)

    def experiment_params(self):
        return {"n": self.n, "s": self.s, "k": self.k, "trials": self.trials}


class BaselineCommand(EmbodicCommand):
    """Dense least-squares estimate against the sparse OMP code"""

    name = "embodic baseline"
    description = (
        "Gradient least squares against orthogonal matching pursuit on one "
        "sparse scene: residual, distance to the truth and support size"
    )
    kind = "baseline"

    aliases = {
        **EmbodicCommand.aliases,
        "n": "BaselineCommand.n",
        "s": "BaselineCommand.s",
        "k": "BaselineCommand.k",
        "iterations": "BaselineCommand.iterations",
        "ensemble": "BaselineCommand.ensemble",
    }

    n = Integer(64, help="Signal length N", config=True)
    s = Integer(4, help="Sparsity s", config=True)
    k = Integer(32, help="Number of measurements", config=True)
    iterations = IntegerList(
        [1, 10, 100, 500], help="Gradient iteration counts to report", config=True
    )
    ensemble = Enum(
        [e.value for e in Ensemble],
        Ensemble.GAUSSIAN.value,
        help="Measurement matrix ensemble",
        config=True,
    )

    def experiment_params(self):
        return {
            "n": self.n,
            "s": self.s,
            "k": self.k,
            "iterations": self.iterations,
            "ensemble": self.ensemble,
        }


class CapacityCommand(EmbodicCommand):
    """Nearest-code decoding accuracy of random codebooks against word length"""

    name = "embodic capacity"
    description = "Decoding accuracy of an M-word random codebook under symbol noise"
    kind = "capacity"

    aliases = {
        **EmbodicCommand.aliases,
        "m": "CapacityCommand.m",
        "k-list": "CapacityCommand.k_list",
        "p": "CapacityCommand.p",
        "trials": "CapacityCommand.trials",
        "ry": "CapacityCommand.alphabet",
    }

    m = Integer(256, help="Number of codewords", config=True)
    k_list = IntegerList([8, 12, 16, 24, 32], help="Word lengths to try", config=True)
    p = Float(0.05, help="Symbol substitution probability", config=True)
    trials = Integer(200, help="Trials per word length", config=True)
    alphabet = Integer(2, help="Alphabet size R_Y", config=True)

    def experiment_params(self):
        return {
            "m": self.m,
            "k_list": self.k_list,
            "p": self.p,
            "trials": self.trials,
            "alphabet": self.alphabet,
        }


class ErasureCommand(EmbodicCommand):
    """Digital against random codes when units fail"""

    name = "embodic erasure"
    description = "Decoding accuracy of digital and random codes with failed units"
    kind = "erasure"

    aliases = {
        **EmbodicCommand.aliases,
        "rx": "ErasureCommand.rx",
        "ry": "ErasureCommand.ry",
        "k-list": "ErasureCommand.k_list",
        "failed": "ErasureCommand.failed_units",
        "trials": "ErasureCommand.trials",
    }

    rx = Integer(256, help="Number of items to encode", config=True)
    ry = Integer(2, help="States per unit", config=True)
    k_list = IntegerList([8, 12, 16, 24], help="Numbers of units to try", config=True)
    failed_units = Integer(1, help="Units failing in every trial", config=True)
    trials = Integer(200, help="Trials per k and code", config=True)

    def experiment_params(self):
        return {
            "r_x": self.rx,
            "r_y": self.ry,
            "k_list": self.k_list,
            "failed_units": self.failed_units,
            "trials": self.trials,
        }


class WhitenCommand(EmbodicCommand):
    """Histogram equalization of samples into equiprobable bins"""

    name = "embodic whiten"
    description = (
        "embodic whiten [FILE]: whiten the whitespace separated samples in FILE "
        "(stdin by default). Seeded normal samples are available through "
        "embodic run with a whiten config."
    )
    kind = "whiten"

    aliases = {
        **EmbodicCommand.aliases,
        "bins": "WhitenCommand.bins",
    }

    bins = Integer(16, help="Number of output bins", config=True)

    def experiment_params(self):
        path = self.extra_args[0] if self.extra_args else "-"
        text = _read_input(path)
        try:
            samples = [float(token) for token in text.replace(",", " ").split()]
        except ValueError as e:
            raise PreconditionError(f"samples must be numbers: {e}") from e
        return {"bins": self.bins, "samples": samples}


class MotorBenchCommand(EmbodicCommand):
    """Worst position error of motor codes against code length"""

    name = "embodic motor-bench"
    description = "Precision curve of base-R_Y motor codes"
    kind = "motor-bench"

    aliases = {
        **EmbodicCommand.aliases,
        "ry": "MotorBenchCommand.ry",
        "k-max": "MotorBenchCommand.k_max",
        "probes": "MotorBenchCommand.probes",
    }

    ry = IntegerList([2], help="Alphabet sizes, e.g. 2,4", config=True)
    k_max = Integer(16, help="Longest code length", config=True)
    probes = Integer(10_000, help="Number of evenly spaced probe positions", config=True)

    def experiment_params(self):
        return {"alphabets": self.ry, "k_max": self.k_max, "probes": self.probes}


class FittsCommand(EmbodicCommand):
    """Index of difficulty and correction steps of a reach"""

    name = "embodic fitts"
    description = "Index of difficulty log2(2D/W) and steps of the subdivision model"
    kind = "fitts"

    aliases = {
        **EmbodicCommand.aliases,
        "d": "FittsCommand.d",
        "w": "FittsCommand.w",
        "ry": "FittsCommand.ry",
    }

    d = Float(4.0, help="Reach distance D", config=True)
    w = Float(1.0, help="Target width W", config=True)
    ry = IntegerList([2], help="Alphabet sizes, e.g. 2,4,8", config=True)

    def experiment_params(self):
        return {"tasks": [[self.d, self.w]], "alphabets": self.ry}


class ChunksCommand(EmbodicCommand):
    """Chunk repertoire of a motor sequence"""

    name = "embodic chunks"
    description = (
        "embodic chunks [FILE]: repertoire of the motor sequence in FILE "
        "(stdin by default), one integer per line or a compact digit string"
    )
    kind = "chunks"

    aliases = {
        **EmbodicCommand.aliases,
        "len": "ChunksCommand.length",
        "mode": "ChunksCommand.mode",
        "base": "ChunksCommand.base",
    }

    flags = {
        **EmbodicCommand.flags,
        "profile": (
            {"ChunksCommand": {"profile": True}},
            "Report repertoire size and entropy for every chunk length up to --len",
        ),
    }

    length = Integer(2, help="Chunk length L", config=True)
    mode = Enum(WINDOW_MODES, WINDOW_MODES[0], help="Window mode", config=True)
    base = Float(2.0, help="Log base of the entropy", config=True)
    profile = Bool(False, help="Profile chunk lengths 1..L", config=True)

    def experiment_params(self):
        path = self.extra_args[0] if self.extra_args else "-"
        sequence = parse_sequence(_read_input(path))
        if self.profile:
            self.kind = "chunk-profile"
            return {
                "sequence": sequence,
                "max_length": self.length,
                "mode": self.mode,
                "base": self.base,
            }
        return {
            "sequence": sequence,
            "length": self.length,
            "mode": self.mode,
            "base": self.base,
        }


class AdaptCommand(EmbodicCommand):
    """Motor code length matched to environmental variability"""

    name = "embodic adapt"
    description = "Shortest code whose cell width does not exceed sigma"
    kind = "adapt"

    aliases = {
        **EmbodicCommand.aliases,
        "sigma": "AdaptCommand.sigma",
        "ry": "AdaptCommand.ry",
    }

    sigma = Float(0.01, help="Environmental variability, as a fraction of the range", config=True)
    ry = IntegerList([2], help="Alphabet sizes, e.g. 2,4", config=True)

    def experiment_params(self):
        return {"sigmas": [self.sigma], "alphabets": self.ry}


class Embodic(Application):
    """Information-theoretic experiments on quantized bodies"""

    name = "embodic"
    version = __version__
    description = """
    Entropy of morphologies, efficient codes and quantized motor codes,
    as seeded, reproducible experiments.
    """

    examples = """
    embodic equivalence --rx 1024 --ry 2
    embodic motor-bench --ry 2,4 --k-max 10 --format svg --out results
    embodic reproduce fig5
    embodic run --config experiment.json
    """

    subcommands = {
        "run": (RunCommand, RunCommand.__doc__),
        "reproduce": (ReproduceCommand, ReproduceCommand.__doc__),
        "entropy": (EntropyCommand, EntropyCommand.__doc__),
        "equivalence": (EquivalenceCommand, EquivalenceCommand.__doc__),
        "hand": (HandCommand, HandCommand.__doc__),
        "cs-bench": (CsBenchCommand, CsBenchCommand.__doc__),
        "sensing": (SensingCommand, SensingCommand.__doc__),
        "baseline": (BaselineCommand, BaselineCommand.__doc__),
        "capacity": (CapacityCommand, CapacityCommand.__doc__),
        "erasure": (ErasureCommand, ErasureCommand.__doc__),
        "whiten": (WhitenCommand, WhitenCommand.__doc__),
        "motor-bench": (MotorBenchCommand, MotorBenchCommand.__doc__),
        "fitts": (FittsCommand, FittsCommand.__doc__),
        "chunks": (ChunksCommand, ChunksCommand.__doc__),
        "adapt": (AdaptCommand, AdaptCommand.__doc__),
    }

    def start(self):
        if self.subapp is None:
            self.print_subcommands()
            self.log.error("No subcommand given")
            self.exit(EXIT_CODES["config"])
        return self.subapp.start()


main = Embodic.launch_instance

if __name__ == "__main__":
    main()
