"""Miscellaneous utilities"""

import math
from concurrent.futures import ThreadPoolExecutor
from hashlib import blake2b

import numpy as np
from traitlets import TraitError, TraitType

from .metrics import TRIAL_COUNT


class PreconditionError(ValueError):
    """Raised when an operation is called outside of its domain

    Subclasses carry the offending values as attributes.
    The command line maps this family to exit code 3.
    """


def blake2b_hash_as_int(b):
    """Compute digest of the bytes `b` using the Blake2 hash function.

    Returns a unsigned 64bit integer.
    """
    return int.from_bytes(blake2b(b, digest_size=8).digest(), "big")


def derive_seed(seed, *keys):
    """Derive a 64bit sub-seed from a master seed and any number of keys

    The same (seed, keys) always give the same sub-seed,
    independent of the order in which sub-seeds are requested,
    so parallel execution cannot reorder randomness.
    """
    material = "-".join(str(part) for part in (seed, *keys))
    return blake2b_hash_as_int(material.encode())


def make_rng(seed):
    """Counter-based generator (Philox) keyed by a 64bit seed"""
    return np.random.Generator(np.random.Philox(int(seed)))


def run_trials(trial, arguments, workers=1, kind=""):
    """Run `trial(argument)` for every argument, in order

    With workers > 1 trials run on a thread pool.
    Results are always returned in argument order,
    so the outcome does not depend on the schedule.
    """
    arguments = list(arguments)
    TRIAL_COUNT.labels(kind=kind or "unknown").inc(len(arguments))
    if workers <= 1 or len(arguments) <= 1:
        return [trial(argument) for argument in arguments]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(trial, arguments))


def check_base(base):
    """Validate a logarithm base"""
    if not isinstance(base, (int, float)) or isinstance(base, bool):
        raise PreconditionError(f"log base must be a number, got {base!r}")
    if not math.isfinite(base) or base <= 1:
        raise PreconditionError(f"log base must be > 1, got {base!r}")
    return float(base)


def log_base(count, base=2):
    """log of a positive (possibly very large) integer in the given base

    Bases 2, e and 10 use the dedicated functions
    so that exact powers give exact results.
    """
    if base == 2:
        return math.log2(count)
    if base == 10:
        return math.log10(count)
    if base == math.e:
        return math.log(count)
    return math.log(count) / math.log(base)


class IntegerList(TraitType):
    """
    Allow specifying a list of integers as a comma separated string

    e.g. ``--k-list 8,16,24`` becomes ``[8, 16, 24]``.
    Whitespace is accepted as a separator too.
    """

    default_value = ()
    info_text = "a list of integers, or a comma separated string of integers"

    def validate(self, obj, value):
        """
        Validate that the passed in value is a list of integers

        Strings are split on commas and whitespace
        and every piece converted to an int.
        """
        if isinstance(value, str):
            pieces = value.replace(",", " ").split()
            try:
                value = [int(piece) for piece in pieces]
            except ValueError:
                raise TraitError(
                    f"{value!r} is not a valid integer list. Must be integers separated by commas"
                )
        if not isinstance(value, (list, tuple)):
            self.error(obj, value)
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, np.integer)):
                self.error(obj, value)
        return [int(item) for item in value]


def _number(piece):
    try:
        return int(piece)
    except ValueError:
        return float(piece)


class NumberList(TraitType):
    """
    A list of real numbers, given as a list or a comma separated string

    e.g. ``--bases 2,2.718,10`` becomes ``[2, 2.718, 10]``.
    Integral pieces stay ints so that they print as such.
    """

    default_value = ()
    info_text = "a list of numbers, or a comma separated string of numbers"

    def validate(self, obj, value):
        if isinstance(value, str):
            pieces = value.replace(",", " ").split()
            try:
                value = [_number(piece) for piece in pieces]
            except ValueError:
                raise TraitError(
                    f"{value!r} is not a valid number list. Must be numbers separated by commas"
                )
        if not isinstance(value, (list, tuple)):
            self.error(obj, value)
        for item in value:
            if isinstance(item, bool) or not isinstance(
                item, (int, float, np.integer, np.floating)
            ):
                self.error(obj, value)
        return [
            int(item) if isinstance(item, (int, np.integer)) else float(item)
            for item in value
        ]
