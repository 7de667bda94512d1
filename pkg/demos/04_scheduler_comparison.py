"""Sweep one path's variability and compare schedulers on identical streams.

Reproduces the benchmark layout the CLI's `sweep` subcommand emits: SOS vs a
per-packet baseline, same seeds, improvement = (baseline/candidate - 1).
"""

import sys

from sosim import DelaySourceSpec, ExperimentConfig, run_sweep, write_csv

base = ExperimentConfig(
    paths=(
        DelaySourceSpec(kind="gamma", mean_ms=10.0, stddev_ms=1.0),
        DelaySourceSpec(kind="gamma", mean_ms=12.0, stddev_ms=1.0),
    ),
    scheduler="sos",
    object_size=100,
    replications=1000,
    seed=3,
)

for baseline in ("sedpf", "edf"):
    print(f"--- SOS vs {baseline.upper()}, slower path's stddev swept ---")
    rows = run_sweep(base, "sigma", (1, 5, 10, 20, 50), baseline=baseline, axis_path=1)
    write_csv(rows, sys.stdout)
    print()
