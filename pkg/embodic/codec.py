"""
Efficient codes.

- uniform quantization and its inverse
- whitening by histogram equalization
- compressive sensing: random measurement matrices, orthogonal matching
  pursuit, and an iterative least-squares baseline to contrast with
- random codebooks with nearest-code (Hamming) decoding under symbol noise

Everything that draws random numbers takes a seed and is bit-reproducible.
"""

import math
from collections import namedtuple
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import rankdata

from .infomorph import equivalent_unit_count
from .log import app_log
from .utils import PreconditionError, derive_seed, make_rng, run_trials

# a recovered value this close to the truth counts as exact
RECOVERY_TOLERANCE = 1e-6


class QuantizerRangeError(PreconditionError):
    """Raised when a value or level index falls outside a quantizer's range"""

    def __init__(self, message, *, value):
        super().__init__(message)
        self.value = value


class DimensionMismatch(PreconditionError):
    """Raised when a vector does not fit a measurement matrix"""

    def __init__(self, message, *, expected, got):
        super().__init__(message)
        self.expected = expected
        self.got = got


class MalformedWord(PreconditionError):
    """Raised when a word cannot be decoded with a codebook"""


@dataclass(frozen=True)
class QuantizerSpec:
    """`levels` equal cells over [lo, hi]

    Cells are half-open [lo + i*w, lo + (i+1)*w), the top cell is closed.
    """

    levels: int
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if isinstance(self.levels, bool) or not isinstance(self.levels, int):
            raise PreconditionError(f"levels must be an integer, got {self.levels!r}")
        if self.levels < 2:
            raise PreconditionError(f"levels must be >= 2, got {self.levels}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise PreconditionError(
                f"range must be finite with lo < hi, got [{self.lo}, {self.hi}]"
            )

    @property
    def width(self):
        return (self.hi - self.lo) / self.levels


def quantize(x, spec):
    """Index of the cell containing x"""
    if not spec.lo <= x <= spec.hi:
        raise QuantizerRangeError(
            f"{x} is outside the quantizer range [{spec.lo}, {spec.hi}]", value=x
        )
    w = spec.width
    i = min(int(math.floor((x - spec.lo) / w)), spec.levels - 1)
    # rounding in the division can land one cell off near an edge
    if i > 0 and spec.lo + i * w > x:
        i -= 1
    elif i < spec.levels - 1 and spec.lo + (i + 1) * w <= x:
        i += 1
    return i


def dequantize(i, spec):
    """Midpoint of cell i"""
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)):
        raise QuantizerRangeError(f"level index must be an integer, got {i!r}", value=i)
    if not 0 <= i < spec.levels:
        raise QuantizerRangeError(
            f"level index {i} is outside [0, {spec.levels})", value=i
        )
    return spec.lo + (int(i) + 0.5) * spec.width


def whiten(samples, bins):
    """Histogram equalization of `samples` into `bins` equiprobable bins

    Each sample is mapped through the empirical CDF u (average ranks for
    ties, u = (rank - 1) / n) to floor(u * bins). Tie-free inputs give bin
    counts that differ by at most one, and whitening twice equals whitening
    once.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise PreconditionError("cannot whiten an empty sequence")
    if isinstance(bins, bool) or not isinstance(bins, (int, np.integer)) or bins < 2:
        raise PreconditionError(f"bins must be an integer >= 2, got {bins!r}")
    ranks = rankdata(samples, method="average")
    u = (ranks - 1.0) / samples.size
    return np.minimum(np.floor(u * bins).astype(int), bins - 1)


def empirical_entropy(symbols, base=2):
    """Shannon entropy of the empirical distribution of `symbols`"""
    _, counts = np.unique(np.asarray(symbols), return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum() / math.log(base))


# compressive sensing


class Ensemble(Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """A k x N random encoder

    gaussian entries have variance 1/k, rademacher entries are +-1/sqrt(k).
    The entries are a pure function of (ensemble, rows, cols, seed).
    """

    rows: int
    cols: int
    ensemble: Ensemble
    seed: int
    entries: np.ndarray

    @classmethod
    def draw(cls, rows, cols, ensemble=Ensemble.GAUSSIAN, seed=0):
        if rows < 1 or cols < 1:
            raise PreconditionError(
                f"measurement matrix needs positive dimensions, got {rows}x{cols}"
            )
        ensemble = Ensemble(ensemble)
        rng = make_rng(seed)
        if ensemble is Ensemble.GAUSSIAN:
            entries = rng.normal(0.0, 1.0 / math.sqrt(rows), size=(rows, cols))
        else:
            signs = 2.0 * rng.integers(0, 2, size=(rows, cols)) - 1.0
            entries = signs / math.sqrt(rows)
        entries.flags.writeable = False
        return cls(rows, cols, ensemble, seed, entries)


def _entries(phi):
    if isinstance(phi, MeasurementMatrix):
        return phi.entries
    entries = np.asarray(phi, dtype=float)
    if entries.ndim != 2:
        raise PreconditionError(f"measurement matrix must be 2d, got shape {entries.shape}")
    return entries


@dataclass(frozen=True)
class SparseSignal:
    """A length-N signal, zero outside `support`"""

    length: int
    support: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        support = tuple(int(i) for i in self.support)
        values = tuple(float(v) for v in self.values)
        if len(support) != len(values):
            raise PreconditionError("support and values must have the same length")
        if len(set(support)) != len(support):
            raise PreconditionError("support indices must be distinct")
        if any(not 0 <= i < self.length for i in support):
            raise PreconditionError(f"support indices must lie in [0, {self.length})")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @property
    def sparsity(self):
        return len(self.support)

    def to_dense(self):
        x = np.zeros(self.length)
        x[list(self.support)] = self.values
        return x

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=float)
        support = np.flatnonzero(x)
        return cls(x.size, tuple(support), tuple(x[support]))


OmpResult = namedtuple(
    "OmpResult", ["signal", "residual_norm", "iterations", "rank_deficient"]
)
LsqResult = namedtuple("LsqResult", ["estimate", "residuals", "diverged"])
PhasePoint = namedtuple("PhasePoint", ["k", "rate", "mean_residual"])


def cs_encode(x, phi):
    """y = phi x"""
    entries = _entries(phi)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != entries.shape[1]:
        raise DimensionMismatch(
            f"signal of length {x.size} does not fit a {entries.shape[0]}x{entries.shape[1]} matrix",
            expected=entries.shape[1],
            got=x.size,
        )
    return entries @ x


def cs_decode_omp(y, phi, s_max=None, tol=1e-8):
    """Orthogonal matching pursuit

    Repeatedly select the column most correlated with the residual
    (normalised correlation, lowest index on ties), re-solve least squares
    on the selected support, until the residual norm is <= tol or s_max
    atoms are selected. A rank-deficient support falls back to the
    minimum-norm solution and sets `rank_deficient`.
    """
    entries = _entries(phi)
    k, n = entries.shape
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != k:
        raise DimensionMismatch(
            f"measurement of length {y.size} does not fit a {k}x{n} matrix",
            expected=k,
            got=y.size,
        )
    if s_max is None:
        s_max = k
    if not 0 <= s_max <= k <= n:
        raise PreconditionError(f"need s_max <= k <= N, got s_max={s_max}, k={k}, N={n}")
    if tol < 0:
        raise PreconditionError(f"tol must be >= 0, got {tol}")

    norms = np.linalg.norm(entries, axis=0)
    usable = norms > 0
    residual = y.copy()
    support = []
    coef = np.zeros(0)
    rank_deficient = False
    iterations = 0
    while np.linalg.norm(residual) > tol and iterations < s_max:
        correlation = np.zeros(n)
        correlation[usable] = np.abs(entries[:, usable].T @ residual) / norms[usable]
        correlation[support] = -np.inf
        atom = int(np.argmax(correlation))
        support.append(atom)
        iterations += 1
        selected = entries[:, support]
        coef, _, rank, _ = np.linalg.lstsq(selected, y, rcond=None)
        if rank < len(support):
            rank_deficient = True
        residual = y - selected @ coef
        app_log.debug(
            "omp iteration %i: atom %i, residual %.3g",
            iterations,
            atom,
            np.linalg.norm(residual),
        )
    if rank_deficient:
        app_log.warning(
            "omp: selected columns are rank deficient, using minimum-norm solution"
        )
    order = np.argsort(support)
    signal = SparseSignal(n, tuple(np.asarray(support)[order]), tuple(coef[order]))
    return OmpResult(signal, float(np.linalg.norm(residual)), iterations, rank_deficient)


def random_sparse_signal(n, s, rng):
    """s-sparse signal of length n: uniform support, unit-normal values"""
    support = np.sort(rng.choice(n, size=s, replace=False))
    values = rng.standard_normal(s)
    return SparseSignal(n, tuple(support), tuple(values))


def is_exact_recovery(estimate, truth, atol=RECOVERY_TOLERANCE):
    """Support match and every value within atol

    Atoms the decoder selected but left at (numerically) zero are not
    part of the recovered support.
    """
    dense = estimate.to_dense()
    support = set(np.flatnonzero(np.abs(dense) > atol).tolist())
    if support != set(truth.support):
        return False
    return bool(np.all(np.abs(dense - truth.to_dense()) < atol))


def cs_phase_curve(
    n, s, k_list, trials, seed=0, ensemble=Ensemble.GAUSSIAN, tol=1e-8, workers=1
):
    """Exact recovery rate of OMP for each number of measurements k

    Trial t draws its signal and its matrix from sub-seeds of (seed, t),
    so every k sees the same signals, and the matrix for k is the leading
    k rows (rescaled) of the matrix for a larger k.
    """
    k_list = list(k_list)
    if not k_list:
        raise PreconditionError("k_list must not be empty")
    for k in k_list:
        if not s <= k <= n:
            raise PreconditionError(f"every k must satisfy s <= k <= N, got k={k}, s={s}, N={n}")
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")
    ensemble = Ensemble(ensemble)

    curve = []
    for k in k_list:

        def trial(t, k=k):
            truth = random_sparse_signal(n, s, make_rng(derive_seed(seed, "signal", t)))
            phi = MeasurementMatrix.draw(k, n, ensemble, derive_seed(seed, "matrix", t))
            result = cs_decode_omp(cs_encode(truth.to_dense(), phi), phi, s_max=k, tol=tol)
            return is_exact_recovery(result.signal, truth), result.residual_norm

        outcomes = run_trials(trial, range(trials), workers=workers, kind="cs-bench")
        rate = sum(ok for ok, _ in outcomes) / trials
        mean_residual = sum(r for _, r in outcomes) / trials
        app_log.info("cs phase curve: N=%i s=%i k=%i rate=%.3f", n, s, k, rate)
        curve.append(PhasePoint(k, rate, mean_residual))
    return curve


def sensing_demo(
    n=400, s=10, k=None, trials=100, seed=0, ensemble=Ensemble.GAUSSIAN, workers=1
):
    """Recovery at a fixed compression ratio, N=400 into k=N/20 by default

    Returns rows (n, k, compression, rate, mean_residual).
    The rate is measured and reported, never asserted.
    """
    if k is None:
        k = n // 20
    (point,) = cs_phase_curve(n, s, [k], trials, seed, ensemble, workers=workers)
    return [(n, k, n / k, point.rate, point.mean_residual)]


def lsq_baseline(y, phi, iterations, step=None):
    """Gradient iterations x <- x + step * phi^T (y - phi x) from x = 0

    The default step 1/sigma_max^2 is inside the stable range
    (0, 2/sigma_max^2). When the residual grows 10x over its minimum the
    run stops and `diverged` is set.
    """
    entries = _entries(phi)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != entries.shape[0]:
        raise DimensionMismatch(
            f"measurement of length {y.size} does not fit a {entries.shape[0]}x{entries.shape[1]} matrix",
            expected=entries.shape[0],
            got=y.size,
        )
    if iterations < 0:
        raise PreconditionError(f"iterations must be >= 0, got {iterations}")
    if step is None:
        sigma_max = np.linalg.norm(entries, 2)
        step = 1.0 / sigma_max**2 if sigma_max > 0 else 1.0
    if step <= 0:
        raise PreconditionError(f"step must be > 0, got {step}")

    x = np.zeros(entries.shape[1])
    residuals = []
    lowest = math.inf
    diverged = False
    for _ in range(iterations):
        x = x + step * (entries.T @ (y - entries @ x))
        residual = float(np.linalg.norm(y - entries @ x))
        residuals.append(residual)
        lowest = min(lowest, residual)
        if residual > 10 * lowest:
            app_log.warning(
                "lsq baseline diverged after %i iterations (step %g)",
                len(residuals),
                step,
            )
            diverged = True
            break
    return LsqResult(x, tuple(residuals), diverged)


BaselineRow = namedtuple(
    "BaselineRow",
    [
        "iterations",
        "lsq_residual",
        "lsq_error",
        "lsq_support",
        "omp_residual",
        "omp_error",
        "omp_support",
    ],
)


def baseline_contrast(
    n=64, s=4, k=32, iterations=(1, 10, 100, 500), seed=0, ensemble=Ensemble.GAUSSIAN
):
    """Dense gradient estimate against the sparse OMP code of one scene

    The scene and matrix are those of trial 0 of cs_phase_curve with the
    same seed. One row per iteration count of the gradient baseline; the
    OMP columns repeat on every row. Supports count entries larger than
    RECOVERY_TOLERANCE, errors are distances to the true signal.
    """
    iterations = sorted(iterations)
    if not iterations or iterations[0] < 0:
        raise PreconditionError(f"iteration counts must be >= 0, got {iterations}")
    if not s <= k <= n:
        raise PreconditionError(f"need s <= k <= N, got s={s}, k={k}, N={n}")
    truth = random_sparse_signal(n, s, make_rng(derive_seed(seed, "signal", 0)))
    phi = MeasurementMatrix.draw(k, n, Ensemble(ensemble), derive_seed(seed, "matrix", 0))
    x = truth.to_dense()
    y = cs_encode(x, phi)

    omp = cs_decode_omp(y, phi, s_max=k)
    omp_estimate = omp.signal.to_dense()
    omp_error = float(np.linalg.norm(omp_estimate - x))
    omp_support = int(np.count_nonzero(np.abs(omp_estimate) > RECOVERY_TOLERANCE))

    rows = []
    for count in iterations:
        lsq = lsq_baseline(y, phi, count)
        rows.append(
            BaselineRow(
                count,
                float(np.linalg.norm(y - phi.entries @ lsq.estimate)),
                float(np.linalg.norm(lsq.estimate - x)),
                int(np.count_nonzero(np.abs(lsq.estimate) > RECOVERY_TOLERANCE)),
                omp.residual_norm,
                omp_error,
                omp_support,
            )
        )
    return rows


# random codebooks


@dataclass(frozen=True, eq=False)
class Codebook:
    """M codewords of k symbols from an alphabet of `alphabet` symbols

    Duplicated codewords are allowed; they are what limits capacity.
    """

    words: np.ndarray
    alphabet: int
    seed: int = None

    @property
    def size(self):
        return self.words.shape[0]

    @property
    def length(self):
        return self.words.shape[1]


CapacityPoint = namedtuple("CapacityPoint", ["k", "accuracy"])
ErasurePoint = namedtuple("ErasurePoint", ["k", "code", "accuracy"])


def random_codebook(m, k, alphabet, seed=0):
    """M x k symbols drawn uniformly from [0, alphabet)"""
    if m < 1 or k < 1:
        raise PreconditionError(f"codebook needs M >= 1 and k >= 1, got M={m}, k={k}")
    if alphabet < 2:
        raise PreconditionError(f"alphabet must be >= 2, got {alphabet}")
    words = make_rng(seed).integers(0, alphabet, size=(m, k))
    words.flags.writeable = False
    return Codebook(words, alphabet, seed)


def digital_codebook(m, k, alphabet):
    """Codeword i is the k-digit base-`alphabet` expansion of i

    With too few digits the high digits are lost and words repeat.
    """
    if m < 1 or k < 1 or alphabet < 2:
        raise PreconditionError(
            f"codebook needs M >= 1, k >= 1 and alphabet >= 2, got M={m}, k={k}, alphabet={alphabet}"
        )
    index = np.arange(m)[:, None]
    powers = alphabet ** np.arange(k - 1, -1, -1)[None, :]
    words = (index // powers) % alphabet
    words.flags.writeable = False
    return Codebook(words, alphabet)


def codebook_collisions(cb):
    """Number of codewords that repeat an earlier one"""
    return cb.size - len(np.unique(cb.words, axis=0))


def nearest_decode(word, cb, keep=None):
    """Index of the codeword closest in Hamming distance, lowest index on ties

    `keep` optionally masks which symbol positions take part, e.g. to skip
    failed units.
    """
    word = np.asarray(word)
    if word.shape != (cb.length,):
        raise MalformedWord(
            f"word of shape {word.shape} does not fit codewords of length {cb.length}"
        )
    if not np.issubdtype(word.dtype, np.integer) or np.any(word < 0) or np.any(
        word >= cb.alphabet
    ):
        raise MalformedWord(f"word symbols must be integers in [0, {cb.alphabet})")
    mismatches = cb.words != word
    if keep is not None:
        mismatches = mismatches[:, keep]
    # argmin returns the first minimum
    return int(np.argmin(mismatches.sum(axis=1)))


def corrupt(word, p, alphabet, rng):
    """Symbol-substitution channel

    Every symbol is replaced with probability p by one of the other
    alphabet - 1 symbols, uniformly.
    """
    word = np.asarray(word)
    hit = rng.random(word.size) < p
    shift = rng.integers(1, alphabet, size=word.size)
    return np.where(hit, (word + shift) % alphabet, word)


def capacity_curve(m, k_list, p, trials, seed=0, alphabet=2, workers=1):
    """Decoding accuracy of an M-word random codebook for each word length k

    One codebook of max(k_list) symbols per word is drawn and every k uses
    its first k columns. Trial t sends the same word through the same
    channel noise for every k, so accuracy only changes through k.
    """
    k_list = list(k_list)
    if not k_list:
        raise PreconditionError("k_list must not be empty")
    if not 0 <= p < 0.5:
        raise PreconditionError(f"flip probability must be in [0, 0.5), got {p}")
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")

    k_max = max(k_list)
    full = random_codebook(m, k_max, alphabet, derive_seed(seed, "codebook"))

    curve = []
    for k in k_list:
        cb = Codebook(full.words[:, :k], alphabet, full.seed)

        def trial(t, cb=cb):
            rng = make_rng(derive_seed(seed, "channel", t))
            sent = int(rng.integers(0, m))
            received = corrupt(full.words[sent], p, alphabet, rng)[:k]
            return nearest_decode(received, cb) == sent

        outcomes = run_trials(trial, range(trials), workers=workers, kind="capacity")
        accuracy = sum(outcomes) / trials
        app_log.info(
            "capacity curve: M=%i k=%i p=%g accuracy=%.3f (%i collisions)",
            m,
            k,
            p,
            accuracy,
            codebook_collisions(cb),
        )
        curve.append(CapacityPoint(k, accuracy))
    return curve


def erasure_curve(r_x, r_y, k_list, failed_units, trials, seed=0, workers=1):
    """Digital against random codes when units fail

    Each of the r_x items gets a k-unit word, either its base-r_y expansion
    (digital) or a random word. Every trial erases `failed_units` randomly
    chosen units and decodes from the surviving ones.
    """
    k_list = list(k_list)
    if not k_list:
        raise PreconditionError("k_list must not be empty")
    minimum = equivalent_unit_count(r_x, r_y)
    for k in k_list:
        if not 0 <= failed_units < k:
            raise PreconditionError(
                f"failed units must be in [0, k), got {failed_units} with k={k}"
            )
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")

    curve = []
    for k in k_list:
        if k < minimum:
            app_log.warning(
                "erasure curve: k=%i digits cannot separate %i items (need %i)",
                k,
                r_x,
                minimum,
            )
        codebooks = {
            "digital": digital_codebook(r_x, k, r_y),
            "random": random_codebook(r_x, k, r_y, derive_seed(seed, "codebook", k)),
        }
        for code, cb in codebooks.items():

            def trial(t, k=k, cb=cb):
                rng = make_rng(derive_seed(seed, "erasure", k, t))
                sent = int(rng.integers(0, r_x))
                keep = np.ones(k, dtype=bool)
                keep[rng.choice(k, size=failed_units, replace=False)] = False
                return nearest_decode(cb.words[sent], cb, keep=keep) == sent

            outcomes = run_trials(trial, range(trials), workers=workers, kind="erasure")
            curve.append(ErasurePoint(k, code, sum(outcomes) / trials))
    return curve
