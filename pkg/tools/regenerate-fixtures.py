#!/usr/bin/env python3
"""
Regenerate the reference results in embodic/tests/fixtures.

The cs-bench fixture pins the recovery rates of the default cs-bench
config at seed 0. Only k and rate are kept: they are counts of exact
recoveries, while mean residuals vary in the last digits with the
LAPACK build. Regenerate it only after a deliberate change to how
trials draw their randomness, and say so in the commit message.
"""

import os

from embodic.bench import ExperimentConfig, run_experiment
from embodic.report import render_csv

here_dir = os.path.abspath(os.path.dirname(__file__))
fixtures_dir = os.path.join(here_dir, os.pardir, "embodic", "tests", "fixtures")

FIXTURES = {
    "cs-bench.csv": (ExperimentConfig("cs-bench", seed=0), ("k", "rate")),
}


def run():
    os.makedirs(fixtures_dir, exist_ok=True)
    for filename, (cfg, columns) in FIXTURES.items():
        path = os.path.join(fixtures_dir, filename)
        print(f"Regenerating {os.path.relpath(path)}...")
        with open(path, "w", newline="") as f:
            f.write(render_csv(run_experiment(cfg).select(*columns)))
    print("OK!")


if __name__ == "__main__":
    run()
