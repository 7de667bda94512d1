"""Per-packet inter-packet delay generators.

Three kinds: a constant source, a Gamma-distributed source (moment-matched:
shape = (mu/sigma)^2, scale = sigma^2/mu), and replay of a measured trace
file.  Trace files are line-oriented `seq,delay_ms` with an optional single
header row; replay wraps around at end of file so experiments of any length
can run on finite traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.stats

from .errors import ConfigError, ParseError, ValidationError
from .estimation import nearest_rank

KINDS = ("deterministic", "gamma", "trace")
_REFILL = 4096


@dataclass(frozen=True)
class DelaySourceSpec:
    """Declarative description of one path's delay process."""

    kind: str
    mean_ms: float = 0.0
    stddev_ms: float = 0.0
    trace_path: str | Path | None = None
    propagation_ms: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown delay source kind {self.kind!r}")
        if self.mean_ms < 0 or self.stddev_ms < 0 or self.propagation_ms < 0:
            raise ConfigError("delay source parameters must be nonnegative")
        if self.kind == "gamma" and (self.mean_ms <= 0 or self.stddev_ms <= 0):
            raise ConfigError("gamma sources need mean_ms > 0 and stddev_ms > 0")
        if self.kind == "trace" and self.trace_path is None:
            raise ConfigError("trace sources need a trace_path")


class DelaySource:
    """Stream of inter-packet delays for one path; one consumer per run."""

    spec: DelaySourceSpec

    def take(self, count: int) -> np.ndarray:
        raise NotImplementedError

    def next_delay(self) -> float:
        return float(self.take(1)[0])


class DeterministicSource(DelaySource):
    def __init__(self, spec: DelaySourceSpec):
        self.spec = spec

    def take(self, count: int) -> np.ndarray:
        return np.full(count, self.spec.mean_ms, dtype=float)


class GammaSource(DelaySource):
    """Gamma samples with the requested mean and standard deviation."""

    def __init__(self, spec: DelaySourceSpec):
        if spec.seed is None:
            raise ConfigError("synthetic sources need a seed")
        self.spec = spec
        self.shape = (spec.mean_ms / spec.stddev_ms) ** 2
        self.scale = spec.stddev_ms**2 / spec.mean_ms
        self._rng = np.random.Generator(np.random.PCG64(spec.seed))
        self._buf = np.empty(0)
        self._pos = 0

    def take(self, count: int) -> np.ndarray:
        avail = len(self._buf) - self._pos
        if count <= avail:
            out = self._buf[self._pos : self._pos + count]
            self._pos += count
            return out.copy()
        head = self._buf[self._pos :]
        fresh = self._rng.gamma(self.shape, self.scale, size=max(count - avail, _REFILL))
        self._buf = fresh
        self._pos = count - avail
        return np.concatenate([head, fresh[: self._pos]])


class TraceSource(DelaySource):
    """Replays recorded samples in order, wrapping around at the end."""

    def __init__(self, samples, spec: DelaySourceSpec):
        arr = np.asarray(samples, dtype=float)
        if arr.size == 0:
            raise ConfigError("trace has no samples")
        self.spec = spec
        self._samples = arr
        self._idx = 0

    def __len__(self) -> int:
        return len(self._samples)

    def take(self, count: int) -> np.ndarray:
        n = len(self._samples)
        idx = (self._idx + np.arange(count)) % n
        self._idx = (self._idx + count) % n
        return self._samples[idx]


def _parse_trace(path: Path) -> list[float]:
    samples: list[float] = []
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line_no == 1 and line.replace(" ", "") == "seq,delay_ms":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(path, line_no, "expected two columns 'seq,delay_ms'")
            try:
                int(parts[0])
                delay = float(parts[1])
            except ValueError as exc:
                raise ParseError(path, line_no, f"unparseable value: {exc}") from exc
            if delay < 0:
                raise ValidationError(f"{path}:{line_no}: negative delay {delay}")
            samples.append(delay)
    if not samples:
        raise ConfigError(f"trace file {path} contains no samples")
    return samples


def load_trace(path, propagation_ms: float = 0.0) -> TraceSource:
    """Parse a `seq,delay_ms` trace file into a replay source."""
    path = Path(path)
    spec = DelaySourceSpec(kind="trace", trace_path=path, propagation_ms=propagation_ms)
    return TraceSource(_parse_trace(path), spec)


def make_source(spec: DelaySourceSpec) -> DelaySource:
    if spec.kind == "deterministic":
        return DeterministicSource(spec)
    if spec.kind == "gamma":
        return GammaSource(spec)
    return TraceSource(_parse_trace(Path(spec.trace_path)), spec)


def oracle_stats(
    spec: DelaySourceSpec, window: int = 5000
) -> tuple[float, float, float, float]:
    """Population (mean, min, p95, stddev) matching the windowed estimator.

    For gamma kinds the p95 is the analytic quantile and the minimum is the
    population analog of a size-`window` sample minimum (the 1/(window+1)
    quantile), so estimated-mode parameters converge to these after warm-up.
    Trace statistics are taken over the whole file.
    """
    if spec.kind == "deterministic":
        return spec.mean_ms, spec.mean_ms, spec.mean_ms, 0.0
    if spec.kind == "gamma":
        shape = (spec.mean_ms / spec.stddev_ms) ** 2
        scale = spec.stddev_ms**2 / spec.mean_ms
        dist = scipy.stats.gamma(shape, scale=scale)
        a = float(dist.ppf(1.0 / (window + 1)))
        b = float(dist.ppf(0.95))
        return spec.mean_ms, a, b, spec.stddev_ms
    samples = np.asarray(_parse_trace(Path(spec.trace_path)))
    return (
        float(samples.mean()),
        float(samples.min()),
        nearest_rank(samples, 0.95),
        float(samples.std()),
    )
