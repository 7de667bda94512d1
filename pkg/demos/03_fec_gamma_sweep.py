"""Redundancy scheduling: how the discount factor controls extra packets.

Two gamma paths, one wildly variable.  Lower gamma models luckier delay
realizations on each path in turn, which buys more redundant packets and a
shot at earlier decode; gamma=1 degenerates to the plain split.
"""

from sosim import DelaySourceSpec, ExperimentConfig, run_experiment
from dataclasses import replace

base = ExperimentConfig(
    paths=(
        DelaySourceSpec(kind="gamma", mean_ms=10.0, stddev_ms=50.0),
        DelaySourceSpec(kind="gamma", mean_ms=12.0, stddev_ms=1.0),
    ),
    scheduler="sos_fec",
    object_size=100,
    replications=500,
    seed=11,
)

plain = run_experiment(replace(base, scheduler="sos"))
print(f"plain split     p95={plain.p95_delay_ms:8.2f}ms mean={plain.mean_delay_ms:8.2f}ms")

for gamma in (0.0, 0.25, 0.5, 0.75, 1.0):
    row = run_experiment(replace(base, gamma=gamma))
    print(
        f"gamma={gamma:4.2f}  p95={row.p95_delay_ms:8.2f}ms  mean={row.mean_delay_ms:8.2f}ms"
        f"  redundancy={row.redundancy_fraction * 100:5.1f}% of the object"
    )
