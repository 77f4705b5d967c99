#!/usr/bin/env python3
"""
Validate the example experiment configs in docs/source/configs
against embodic/schemas/experiment.json.
"""

import glob
import os
import sys

from embodic.bench import ConfigError, ExperimentConfig

here_dir = os.path.abspath(os.path.dirname(__file__))
configs_dir = os.path.join(here_dir, os.pardir, "docs", "source", "configs")

failed = 0
for path in sorted(glob.glob(os.path.join(configs_dir, "*.json"))):
    print(f"Validating {os.path.relpath(path)}...")
    try:
        ExperimentConfig.load(path)
    except ConfigError as e:
        print(f"  {e}")
        failed += 1
if failed:
    sys.exit(1)
print("OK!")
