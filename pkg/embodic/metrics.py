"""Prometheus metrics for experiment runs

Metrics live in their own registry and never enter result rows.
"""

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

REGISTRY = CollectorRegistry(auto_describe=True)

# Worked examples finish in microseconds, Monte-Carlo grids in seconds to minutes.
DURATION_BUCKETS = [0.001, 0.01, 0.1, 1, 10, 60, 600, float("inf")]
EXPERIMENT_TIME = Histogram(
    "embodic_experiment_duration_seconds",
    "Histogram of experiment run times",
    ["kind", "status"],
    buckets=DURATION_BUCKETS,
    registry=REGISTRY,
)
TRIAL_COUNT = Counter(
    "embodic_trial_count",
    "Counter of Monte-Carlo trials by experiment kind",
    ["kind"],
    registry=REGISTRY,
)


def write_metrics(path):
    """Write the registry in text exposition format to `path`"""
    write_to_textfile(path, REGISTRY)
