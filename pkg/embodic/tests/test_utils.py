import math
import threading
import time

import pytest
from traitlets import HasTraits, TraitError

from embodic import utils
from embodic.metrics import REGISTRY


def test_derive_seed_is_stable():
    assert utils.derive_seed(0, "signal", 3) == utils.derive_seed(0, "signal", 3)
    assert 0 <= utils.derive_seed(0, "signal", 3) < 2**64


def test_derive_seed_separates_keys():
    seeds = {
        utils.derive_seed(0, "signal", 3),
        utils.derive_seed(0, "matrix", 3),
        utils.derive_seed(1, "signal", 3),
        utils.derive_seed(0, "signal", 4),
        utils.derive_seed(0, "signal"),
    }
    assert len(seeds) == 5


def test_derive_seed_independent_of_request_order():
    forward = [utils.derive_seed(7, "trial", t) for t in range(10)]
    backward = [utils.derive_seed(7, "trial", t) for t in reversed(range(10))]
    assert forward == backward[::-1]


def test_make_rng_is_reproducible():
    a = utils.make_rng(12).random(5)
    b = utils.make_rng(12).random(5)
    assert a.tolist() == b.tolist()
    assert utils.make_rng(13).random(5).tolist() != a.tolist()


def test_run_trials_keeps_order():
    def trial(t):
        # later arguments finish first
        time.sleep(0.001 * (10 - t))
        return t, threading.get_ident()

    results = utils.run_trials(trial, range(10), workers=4, kind="test")
    assert [t for t, _ in results] == list(range(10))


def test_run_trials_counts():
    before = REGISTRY.get_sample_value("embodic_trial_count_total", {"kind": "test"}) or 0
    utils.run_trials(lambda t: t, range(5), kind="test")
    after = REGISTRY.get_sample_value("embodic_trial_count_total", {"kind": "test"})
    assert after == before + 5


def test_run_trials_propagates_errors():
    def trial(t):
        if t == 2:
            raise ValueError("bad trial")
        return t

    with pytest.raises(ValueError):
        utils.run_trials(trial, range(4), workers=2)


@pytest.mark.parametrize(
    "count, base, expected",
    [
        (1024, 2, 10),
        (1000, 10, 3),
        (1, 2, 0),
        (27, 3, 3),
        (2**2000, 2, 2000),
    ],
)
def test_log_base(count, base, expected):
    assert utils.log_base(count, base) == pytest.approx(expected)


def test_log_base_exact_for_powers():
    assert utils.log_base(2**40, 2) == 40
    assert utils.log_base(10**12, 10) == 12


@pytest.mark.parametrize("base", [1, 0, -3, math.nan, math.inf, "2", None, False])
def test_check_base(base):
    with pytest.raises(utils.PreconditionError):
        utils.check_base(base)


class Experiment(HasTraits):
    k_list = utils.IntegerList()


@pytest.mark.parametrize(
    "value, expected",
    [
        ("8,16,24", [8, 16, 24]),
        ("8, 16 24", [8, 16, 24]),
        ("", []),
        ([1, 2], [1, 2]),
        ((3,), [3]),
    ],
)
def test_integer_list(value, expected):
    e = Experiment(k_list=value)
    assert e.k_list == expected


@pytest.mark.parametrize("value", ["8,x", "1.5", [1, "2"], [True], 5])
def test_integer_list_rejects(value):
    with pytest.raises(TraitError):
        Experiment(k_list=value)


class Entropy(HasTraits):
    bases = utils.NumberList()


@pytest.mark.parametrize(
    "value, expected",
    [
        ("2,10", [2, 10]),
        ("2.718", [2.718]),
        ("1.5, 2 10", [1.5, 2, 10]),
        ([2, 1.5], [2, 1.5]),
        ("", []),
    ],
)
def test_number_list(value, expected):
    e = Entropy(bases=value)
    assert e.bases == expected
    assert [type(b) for b in e.bases] == [type(b) for b in expected]


@pytest.mark.parametrize("value", ["2,x", [2, "e"], [False], 2.5])
def test_number_list_rejects(value):
    with pytest.raises(TraitError):
        Entropy(bases=value)
