"""Per-packet baseline schedulers: EDF and SEDPF.

EDF assigns each packet to the path with the earliest expected delivery,
(in_flight + 1) * mean + propagation; it is the optimal greedy rule when
delays are fixed and known.

SEDPF models each path's delivery time of the packet-plus-backlog as a
Gaussian (mean scaling linearly with the queue, variance with the queue size
times sigma^2), folds all paths into the distribution of their maximum via
Clark's first/second-moment recursion, and sends the packet to the candidate
path minimizing the expected maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist

from .errors import ValidationError

_STD_NORMAL = NormalDist()


@dataclass
class PathQueueState:
    """Mutable per-path queue view consumed by the baseline assigners."""

    in_flight: list[int]
    mean_ms: list[float]
    stddev_ms: list[float] = field(default_factory=list)
    prop_ms: list[float] = field(default_factory=list)

    def __post_init__(self):
        m = len(self.in_flight)
        if m == 0:
            raise ValidationError("need at least one path")
        if not self.stddev_ms:
            self.stddev_ms = [0.0] * m
        if not self.prop_ms:
            self.prop_ms = [0.0] * m
        if not (len(self.mean_ms) == len(self.stddev_ms) == len(self.prop_ms) == m):
            raise ValidationError("per-path lists must have equal length")

    def __len__(self) -> int:
        return len(self.in_flight)


def edf_assign(state: PathQueueState) -> int:
    """Index of the path with the earliest expected delivery; ties go low."""
    best = 0
    best_cost = math.inf
    for j in range(len(state)):
        cost = (state.in_flight[j] + 1) * state.mean_ms[j] + state.prop_ms[j]
        if cost < best_cost:
            best, best_cost = j, cost
    return best


def clark_max(m1: float, v1: float, m2: float, v2: float) -> tuple[float, float]:
    """Moment-matched mean and variance of max(X, Y) for independent Gaussians."""
    a2 = v1 + v2
    if a2 <= 0.0:
        return (m1, v1) if m1 >= m2 else (m2, v2)
    a = math.sqrt(a2)
    alpha = (m1 - m2) / a
    cdf = _STD_NORMAL.cdf(alpha)
    pdf = _STD_NORMAL.pdf(alpha)
    mean = m1 * cdf + m2 * (1.0 - cdf) + a * pdf
    second = (m1 * m1 + v1) * cdf + (m2 * m2 + v2) * (1.0 - cdf) + (m1 + m2) * a * pdf
    return mean, max(second - mean * mean, 0.0)


def expected_max(means, variances) -> float:
    """Expected maximum of independent Gaussians, folded pairwise in order."""
    mean, var = means[0], variances[0]
    for m2, v2 in zip(means[1:], variances[1:]):
        mean, var = clark_max(mean, var, m2, v2)
    return mean


def sedpf_assign(state: PathQueueState) -> int:
    """Candidate path minimizing the expected max delivery time over all paths.

    Ties are broken first by the EDF cost and then by index, so the all-zero
    stddev case reduces to edf_assign exactly.
    """
    m = len(state)
    best = 0
    best_key: tuple[float, float] | None = None
    for cand in range(m):
        means = []
        variances = []
        for j in range(m):
            load = state.in_flight[j] + (1 if j == cand else 0)
            means.append(load * state.mean_ms[j] + state.prop_ms[j])
            variances.append(load * state.stddev_ms[j] ** 2)
        edf_cost = (state.in_flight[cand] + 1) * state.mean_ms[cand] + state.prop_ms[cand]
        key = (expected_max(means, variances), edf_cost)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return best
