"""top-level pytest config

options can only be defined here,
not in embodic/tests/conftest.py
"""


def pytest_addoption(parser):
    parser.addoption(
        "--slow",
        action="store_true",
        default=False,
        help="Run the full-size Monte-Carlo grids marked with pytest.mark.slow",
    )
