"""
Quantized motor codes.

A position in [0, 1) is addressed by successive subdivision into
`alphabet` cells, k times. Precision therefore grows exponentially with
the code length, reaches follow a logarithmic law, and recurring groups
of motor symbols (chunks) can be tallied into repertoires.
"""

import math
from collections import Counter, namedtuple
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import entropy as shannon_entropy

from .log import app_log
from .utils import PreconditionError, check_base

OVERLAPPING = "overlapping"
DISJOINT = "disjoint"
WINDOW_MODES = (OVERLAPPING, DISJOINT)

# slack allowed in the error(k+1) <= error(k) / R law
PRECISION_SLACK = 1e-12

DEFAULT_PROBES = 10_000


class PositionRangeError(PreconditionError):
    """Raised when a position is outside the half-open unit interval"""

    def __init__(self, message, *, position):
        super().__init__(message)
        self.position = position


class InvalidMotorCode(PreconditionError):
    """Raised when a motor code holds symbols outside its alphabet"""

    def __init__(self, message, *, symbols, alphabet):
        super().__init__(message)
        self.symbols = symbols
        self.alphabet = alphabet


def _check_alphabet(alphabet):
    if isinstance(alphabet, bool) or not isinstance(alphabet, (int, np.integer)):
        raise PreconditionError(f"alphabet must be an integer, got {alphabet!r}")
    if alphabet < 2:
        raise PreconditionError(f"alphabet must be >= 2, got {alphabet}")
    return int(alphabet)


@dataclass(frozen=True)
class MotorCode:
    """k symbols from [0, alphabet), most significant first"""

    alphabet: int
    symbols: tuple = ()

    def __post_init__(self):
        _check_alphabet(self.alphabet)
        symbols = tuple(self.symbols)
        for s in symbols:
            if (
                isinstance(s, bool)
                or not isinstance(s, (int, np.integer))
                or not 0 <= s < self.alphabet
            ):
                raise InvalidMotorCode(
                    f"motor code symbols must be integers in [0, {self.alphabet}), got {list(symbols)}",
                    symbols=symbols,
                    alphabet=self.alphabet,
                )
        object.__setattr__(self, "symbols", tuple(int(s) for s in symbols))

    def __len__(self):
        return len(self.symbols)

    @property
    def cell(self):
        """Index of the addressed cell among alphabet**k"""
        index = 0
        for s in self.symbols:
            index = index * self.alphabet + s
        return index

    @property
    def cell_width(self):
        return Fraction(1, self.alphabet ** len(self.symbols))


def _cell_index(ratio, cells):
    """Cell of the exact rational position num/den among `cells` cells"""
    num, den = ratio
    return (num * cells) // den


def _midpoint(index, cells):
    return (2 * index + 1) / (2 * cells)


def encode_position(x, k, alphabet=2):
    """First k base-`alphabet` digits of x

    Computed on the exact rational value of x, so cell edges are never
    misplaced by rounding. Cells are half-open: 0.5 with k=1 is [1].
    """
    alphabet = _check_alphabet(alphabet)
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
        raise PreconditionError(f"code length must be an integer >= 0, got {k!r}")
    if not (isinstance(x, (int, float, np.floating)) and 0 <= x < 1):
        raise PositionRangeError(f"position must be in [0, 1), got {x!r}", position=x)
    index = _cell_index(float(x).as_integer_ratio(), alphabet**k)
    symbols = []
    for _ in range(k):
        index, digit = divmod(index, alphabet)
        symbols.append(digit)
    return MotorCode(alphabet, tuple(reversed(symbols)))


def decode_position(code):
    """Midpoint of the cell addressed by `code`"""
    if not isinstance(code, MotorCode):
        raise InvalidMotorCode(
            f"expected a MotorCode, got {code!r}", symbols=code, alphabet=None
        )
    return _midpoint(code.cell, code.alphabet ** len(code))


PrecisionRow = namedtuple("PrecisionRow", ["k", "max_error", "bound"])


def precision_curve(k_max, alphabet=2, probes=None):
    """Worst round-trip position error for k = 1..k_max

    The error of a probe x is |x - decode_position(encode_position(x, k))|,
    computed with the same exact digit arithmetic but without building
    a MotorCode per probe.
    The default probes are 10^4 evenly spaced points of [0, 1), 0
    included, so the worst error meets the half-cell bound exactly.
    A curve that shrinks by less than a factor `alphabet` per symbol is
    logged as a warning.
    """
    alphabet = _check_alphabet(alphabet)
    if isinstance(k_max, bool) or not isinstance(k_max, (int, np.integer)) or k_max < 1:
        raise PreconditionError(f"k_max must be an integer >= 1, got {k_max!r}")
    if probes is None:
        probes = np.linspace(0.0, 1.0, DEFAULT_PROBES, endpoint=False)
    probes = np.asarray(probes, dtype=float).ravel()
    if probes.size == 0:
        raise PreconditionError("precision curve needs at least one probe")
    if np.any(probes < 0) or np.any(probes >= 1):
        raise PositionRangeError("probes must lie in [0, 1)", position=probes)

    positions = probes.tolist()
    ratios = [x.as_integer_ratio() for x in positions]
    rows = []
    for k in range(1, k_max + 1):
        cells = alphabet**k
        max_error = max(
            abs(x - _midpoint(_cell_index(ratio, cells), cells))
            for x, ratio in zip(positions, ratios)
        )
        if rows and max_error > rows[-1].max_error / alphabet + PRECISION_SLACK:
            app_log.warning(
                "precision curve: error %.3g at k=%i did not shrink by %i from %.3g",
                max_error,
                k,
                alphabet,
                rows[-1].max_error,
            )
        rows.append(PrecisionRow(k, max_error, 1 / (2 * cells)))
    return rows


# chunks and repertoires


@dataclass
class Repertoire:
    """Chunks of `length` symbols with the number of windows they fill"""

    length: int
    mode: str = OVERLAPPING
    counts: Counter = field(default_factory=Counter)

    @property
    def windows(self):
        return sum(self.counts.values())

    @property
    def distinct(self):
        return len(self.counts)

    def probabilities(self):
        windows = self.windows
        return {chunk: count / windows for chunk, count in self.counts.items()}


def _check_sequence(sequence):
    sequence = list(sequence)
    for s in sequence:
        if isinstance(s, bool) or not isinstance(s, (int, np.integer)) or s < 0:
            raise PreconditionError(
                f"motor sequences hold integers >= 0, got {s!r}"
            )
    return [int(s) for s in sequence]


def extract_repertoire(sequence, length, mode=OVERLAPPING):
    """Tally every window of `length` symbols

    Overlapping windows advance by one symbol, disjoint windows by
    `length`; a trailing partial window is dropped.
    """
    sequence = _check_sequence(sequence)
    if mode not in WINDOW_MODES:
        raise PreconditionError(f"window mode must be one of {WINDOW_MODES}, got {mode!r}")
    if isinstance(length, bool) or not isinstance(length, (int, np.integer)) or length < 1:
        raise PreconditionError(f"chunk length must be an integer >= 1, got {length!r}")
    if len(sequence) < length:
        raise PreconditionError(
            f"sequence of {len(sequence)} symbols is shorter than chunk length {length}"
        )
    stride = 1 if mode == OVERLAPPING else length
    counts = Counter(
        tuple(sequence[start : start + length])
        for start in range(0, len(sequence) - length + 1, stride)
    )
    return Repertoire(length, mode, counts)


def chunk_entropy(repertoire, base=2):
    """Shannon entropy of the empirical chunk distribution"""
    base = check_base(base)
    if not repertoire.counts:
        raise PreconditionError("chunk entropy of an empty repertoire")
    return float(shannon_entropy(list(repertoire.counts.values()), base=base))


ProfileRow = namedtuple(
    "ProfileRow",
    ["length", "windows", "distinct", "combinatorics", "entropy", "entropy_per_symbol"],
)


def repertoire_profile(sequence, max_length, mode=OVERLAPPING, base=2, alphabet=None):
    """Repertoire size and entropy for chunk lengths 1..max_length

    `combinatorics` is the exact number alphabet**L of possible chunks,
    the alphabet defaulting to the largest symbol seen plus one (at least 2).
    """
    sequence = _check_sequence(sequence)
    if alphabet is None:
        alphabet = max(2, max(sequence, default=0) + 1)
    alphabet = _check_alphabet(alphabet)
    if any(s >= alphabet for s in sequence):
        raise PreconditionError(f"sequence holds symbols outside [0, {alphabet})")
    rows = []
    for length in range(1, max_length + 1):
        rep = extract_repertoire(sequence, length, mode)
        h = chunk_entropy(rep, base)
        rows.append(
            ProfileRow(length, rep.windows, rep.distinct, alphabet**length, h, h / length)
        )
    return rows


def parse_sequence(text):
    """Read a motor sequence

    Accepts one integer per line, whitespace or comma separated integers,
    or a single compact digit string such as ``010001100``.
    """
    tokens = text.replace(",", " ").split()
    if len(tokens) == 1 and len(tokens[0]) > 1:
        tokens = list(tokens[0])
    try:
        sequence = [int(token) for token in tokens]
    except ValueError as e:
        raise PreconditionError(f"not a motor sequence: {e}") from e
    return _check_sequence(sequence)


# reaching


@dataclass(frozen=True)
class ReachTask:
    """Reach over `distance` to a target of `width`, same length unit"""

    distance: float
    width: float

    def __post_init__(self):
        for name in ("distance", "width"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise PreconditionError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value) or value <= 0:
                raise PreconditionError(f"{name} must be finite and > 0, got {value!r}")


def fitts_id(task):
    """Index of difficulty log2(2D/W), <= 0 for trivial reaches"""
    return math.log2(2 * task.distance / task.width)


def simulate_reach(task, alphabet=2):
    """Corrective steps to bring a 2D interval down to the target width

    Each step keeps one of `alphabet` equal sub-intervals. The count
    equals ceil(max(0, ID) / log2(alphabet)), computed without rounding.
    """
    alphabet = _check_alphabet(alphabet)
    interval = 2 * Fraction(task.distance)
    width = Fraction(task.width)
    steps = 0
    while interval > width:
        interval /= alphabet
        steps += 1
    return steps


def adapt_code_length(env_sigma, alphabet=2):
    """Shortest code whose cell width does not exceed env_sigma

    Precision finer than the environment's variability is wasted, so
    noisier surroundings get shorter codes.
    """
    alphabet = _check_alphabet(alphabet)
    if isinstance(env_sigma, bool) or not isinstance(env_sigma, (int, float)):
        raise PreconditionError(f"sigma must be a number, got {env_sigma!r}")
    if not math.isfinite(env_sigma) or env_sigma <= 0:
        raise PreconditionError(
            f"sigma must be finite and > 0 (infinite precision demanded), got {env_sigma!r}"
        )
    sigma = Fraction(env_sigma)
    k = 0
    while Fraction(1, alphabet**k) > sigma:
        k += 1
    return k
