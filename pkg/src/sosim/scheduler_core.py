"""Split optimization for multipath object transmission.

An object of n packets is divided across m paths.  Path j is summarized by
:class:`PathParams`: mean inter-packet delay mu, observed delay bounds
[a, b], the derived variability weight w, a fixed propagation delay, and the
in-flight backlog u.  Sending x new packets on a path that already carries u
is, with high probability, finished within

    t_upper(x) = (x + u) * mu + sqrt(x + u) * w

and the object-level bound is d_upper = max_j (t_upper_j + prop_j).
The weight w comes from a Chernoff-Hoeffding bound so that the per-path
overshoot probability is at most epsilon_j (epsilon split evenly over paths).

The solvers minimize d_upper over integer splits: a water-level bisection for
the fractional relaxation (all used paths end up with equal t_upper + prop,
the Wardrop condition), ceil/floor corner search to round it, and a direct
O(log n) bisection on the packet count for the two-path case.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import DegenerateInputError, DomainError, ValidationError

#: Relative width at which the water-level bisection stops.
LEVEL_TOLERANCE = 1e-12
#: Relative mismatch between allocated mass and n accepted by the relaxed solver.
MASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PathParams:
    """Per-path delay statistics consumed by every scheduling decision."""

    mu_ms: float
    a_ms: float
    b_ms: float
    w: float
    prop_ms: float = 0.0
    in_flight: int = 0

    def __post_init__(self):
        if self.mu_ms < 0 or self.a_ms < 0 or self.b_ms < 0 or self.prop_ms < 0:
            raise ValidationError("path parameters must be nonnegative")
        if self.a_ms > self.b_ms:
            raise ValidationError(f"lower bound {self.a_ms} exceeds upper bound {self.b_ms}")
        if self.w < 0:
            raise ValidationError("variability weight w must be nonnegative")
        if self.in_flight < 0:
            raise ValidationError("in-flight count must be nonnegative")


@dataclass(frozen=True)
class SplitVector:
    """Per-path packet counts for one object; counts sum to total."""

    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValidationError("split counts must be nonnegative")
        if sum(self.counts) != self.total:
            raise ValidationError(f"split counts {self.counts} do not sum to {self.total}")

    @classmethod
    def from_counts(cls, counts) -> "SplitVector":
        counts = tuple(int(c) for c in counts)
        return cls(counts, sum(counts))

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class SchedulerConfig:
    """Design parameters: overall tail budget epsilon, split evenly over paths."""

    epsilon: float = 0.05
    max_paths: int = 8

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError("epsilon must lie in (0, 1)")
        if self.max_paths < 1:
            raise ValidationError("max_paths must be positive")

    def per_path_epsilon(self, m: int) -> float:
        if m < 1:
            raise ValidationError("need at least one path")
        return self.epsilon / m


@dataclass
class SolveStats:
    """Optional instrumentation: number of bound evaluations a solve performed."""

    d_upper_evals: int = 0


def compute_w(epsilon_j: float, a_ms: float, b_ms: float) -> float:
    """Hoeffding variability weight sqrt(-ln(eps_j) * (b - a)^2 / 2).

    Zero when the delay range collapses (a == b) or eps_j == 1.
    """
    if not 0.0 < epsilon_j <= 1.0:
        raise DomainError(f"per-path epsilon must lie in (0, 1], got {epsilon_j}")
    if a_ms > b_ms:
        raise ValidationError(f"lower bound {a_ms} exceeds upper bound {b_ms}")
    return math.sqrt(-math.log(epsilon_j) * (b_ms - a_ms) ** 2 / 2.0)


def t_upper(n_j: int, u_j: int, params: PathParams) -> float:
    """High-probability transmission time of n_j new packets behind u_j in flight.

    Propagation delay is not included here; d_upper adds it once per path.
    """
    if n_j < 0 or u_j < 0:
        raise ValidationError("packet counts must be nonnegative")
    k = n_j + u_j
    return k * params.mu_ms + math.sqrt(k) * params.w


def d_upper(split: SplitVector, paths) -> float:
    """Object-level delay bound: max over paths of t_upper + propagation.

    Uses each path's recorded in-flight count as the backlog offset.  A path
    with zero allocation still contributes its propagation (and backlog) term.
    """
    paths = list(paths)
    if len(split.counts) != len(paths):
        raise ValidationError(
            f"split has {len(split.counts)} entries for {len(paths)} paths"
        )
    return max(
        t_upper(c, p.in_flight, p) + p.prop_ms for c, p in zip(split.counts, paths)
    )


def _check_paths(paths) -> list[PathParams]:
    paths = list(paths)
    if not paths:
        raise ValidationError("need at least one path")
    degenerate = [j for j, p in enumerate(paths) if p.mu_ms == 0.0 and p.w == 0.0]
    if degenerate:
        raise DegenerateInputError(
            f"paths {degenerate} have zero mean delay and zero variability"
        )
    return paths


def _bound_at(x: float, p: PathParams) -> float:
    # continuous version of t_upper + prop at fractional allocation x
    k = x + p.in_flight
    return k * p.mu_ms + math.sqrt(k) * p.w + p.prop_ms


def _invert_bound(level: float, p: PathParams) -> float:
    """Largest continuous x >= 0 with _bound_at(x) <= level."""
    budget = level - p.prop_ms
    if budget <= 0:
        return 0.0
    # solve mu*s^2 + w*s = budget for s = sqrt(x + u)
    if p.mu_ms == 0.0:
        s = budget / p.w
    else:
        s = (-p.w + math.sqrt(p.w * p.w + 4.0 * p.mu_ms * budget)) / (2.0 * p.mu_ms)
    return max(0.0, s * s - p.in_flight)


def solve_relaxed(n: int, paths) -> list[float]:
    """Fractional split minimizing the object delay bound.

    Bisects on the equalized delay level: at level L every path receives the
    largest allocation whose bound stays below L (zero if its propagation plus
    backlog alone exceeds L), and the level is tuned until allocations sum to
    n.  All paths with positive allocation share the same bound, so no packet
    reassignment can lower the max.
    """
    paths = _check_paths(paths)
    if n < 0:
        raise ValidationError("object size must be nonnegative")
    if n == 0:
        return [0.0] * len(paths)

    # At level lo nothing fits anywhere; at level hi the cheapest path alone
    # already absorbs all n packets, so the target level lies in between.
    lo = min(_bound_at(0.0, p) for p in paths)
    hi = min(_bound_at(float(n), p) for p in paths)

    while hi - lo > LEVEL_TOLERANCE * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        total = sum(_invert_bound(mid, p) for p in paths)
        if abs(total - n) <= MASS_TOLERANCE * n:
            lo = hi = mid
            break
        if total < n:
            lo = mid
        else:
            hi = mid

    level = 0.5 * (lo + hi)
    xs = [_invert_bound(level, p) for p in paths]
    mass = sum(xs)
    if mass > 0.0:
        scale = n / mass
        xs = [x * scale for x in xs]
    return xs


def _solve_two(n: int, paths, stats: SolveStats | None) -> SplitVector:
    """Exact integer optimum for two paths by bisection on the first count.

    The first path's bound rises with k and the second's falls, so their max
    is unimodal in k; binary search finds the rightmost minimizer (ties give
    the first path more packets), using at most two bound evaluations per
    halving step.
    """
    p0, p1 = paths
    cache: dict[int, float] = {}

    def bound(k: int) -> float:
        v = cache.get(k)
        if v is None:
            v = max(
                t_upper(k, p0.in_flight, p0) + p0.prop_ms,
                t_upper(n - k, p1.in_flight, p1) + p1.prop_ms,
            )
            cache[k] = v
            if stats is not None:
                stats.d_upper_evals += 1
        return v

    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if bound(mid) < bound(mid + 1):
            hi = mid
        else:
            lo = mid + 1
    return SplitVector((lo, n - lo), n)


def solve_integer(n: int, paths, stats: SolveStats | None = None) -> SplitVector:
    """Integer split minimizing the object delay bound.

    Two paths use the O(log n) bisection; more paths solve the relaxation and
    search the ceil/floor corners around it.  Ties prefer giving more packets
    to the lowest-index path.
    """
    paths = _check_paths(paths)
    if n < 0:
        raise ValidationError("object size must be nonnegative")
    m = len(paths)
    if n == 0:
        return SplitVector((0,) * m, 0)
    if m == 1:
        return SplitVector((n,), n)
    if m == 2:
        return _solve_two(n, paths, stats)

    xs = solve_relaxed(n, paths)
    floors = [math.floor(x) for x in xs]
    rem = n - sum(floors)
    bumpable = [j for j in range(m) if math.ceil(xs[j]) > floors[j]]
    if rem < 0 or rem > len(bumpable):
        # float noise collapsed a fractional part; apportion by largest remainder
        fracs = sorted(range(m), key=lambda j: (floors[j] - xs[j], j))
        counts = list(floors)
        for j in fracs[: max(rem, 0)]:
            counts[j] += 1
        combos = [tuple(counts)]
    else:
        combos = []
        for bump in itertools.combinations(bumpable, rem):
            counts = list(floors)
            for j in bump:
                counts[j] += 1
            combos.append(tuple(counts))

    best_counts: tuple[int, ...] | None = None
    best_d = math.inf
    for counts in combos:
        d = max(
            t_upper(c, p.in_flight, p) + p.prop_ms for c, p in zip(counts, paths)
        )
        if stats is not None:
            stats.d_upper_evals += 1
        if d < best_d or (d == best_d and (best_counts is None or counts > best_counts)):
            best_d = d
            best_counts = counts
    assert best_counts is not None
    return SplitVector(best_counts, n)


def split_object(n: int, paths, stats: SolveStats | None = None) -> SplitVector:
    """Split one object across paths, accounting for in-flight backlogs.

    Identical to :func:`solve_integer` (the bound already adds each path's
    in-flight count); the returned counts are new packets only.
    """
    return solve_integer(n, paths, stats=stats)
