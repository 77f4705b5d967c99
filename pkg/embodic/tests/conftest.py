"""pytest fixtures for embodic"""

import os

import pytest

from ..bench import ExperimentConfig
from ..infomorph import ConstraintSet, Morphology, Parallel

here = os.path.abspath(os.path.dirname(__file__))
FIXTURES = os.path.join(here, "fixtures")

# the binary motor sequence of the chunking example
BINARY_SEQUENCE = [0, 1, 0, 0, 0, 1, 1, 0, 0]


def pytest_configure(config):
    """
    Configure plugins and custom markers

    This function is called by pytest after command line arguments have
    been parsed. See https://docs.pytest.org/en/stable/reference/reference.html#pytest.hookspec.pytest_configure
    for more information.
    """
    config.addinivalue_line(
        "markers",
        "slow: mark test as a full-size Monte-Carlo grid, run only with --slow",
    )


def pytest_runtest_setup(item):
    is_slow_test = any(mark for mark in item.iter_markers(name="slow"))
    if not item.config.getoption("--slow"):
        if is_slow_test:
            pytest.skip("Skipping test marked as 'slow'")


@pytest.fixture
def fixture_path():
    """Path of a file in tests/fixtures"""

    def path(name):
        return os.path.join(FIXTURES, name)

    return path


@pytest.fixture
def three_finger_hand():
    """Three fingers of three states each, the grasping example"""
    return Morphology.uniform(3, 3, layout=Parallel)


@pytest.fixture
def grasp():
    return ConstraintSet.counted(3)


@pytest.fixture
def grasp_document():
    return {
        "version": 1,
        "morphology": {
            "kind": "parallel",
            "children": [{"kind": "leaf", "resolution": 3} for _ in range(3)],
        },
        "constraints": {"mode": "count", "count": 3},
    }


@pytest.fixture
def equivalence_config():
    return ExperimentConfig("equivalence", {"pairs": [[1024, 2], [1024, 4]]}, seed=1)
