"""Deterministic discrete-event engine for multipath object transmission.

Each path is a serial server: packets queue per path, consume one
inter-packet delay sample per service in dispatch order, and are delivered
one propagation delay after service ends.  The sender observes a delivery
after a configurable ACK return time; inter-packet gaps measured between
back-to-back services feed the rolling estimation windows.

Events are processed in nondecreasing time with a fixed lexicographic
tie-break (time, kind, path, insertion order), so identical configurations
and seeds reproduce identical outcomes exactly.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass

from . import fec as fec_mod
from .baselines import PathQueueState, edf_assign, sedpf_assign
from .delay_sources import DelaySource, DelaySourceSpec, make_source, oracle_stats
from .errors import (
    ConfigError,
    InfeasibleError,
    UndefinedSizeError,
    ValidationError,
)
from .estimation import RollingWindow, snapshot_params
from .scheduler_core import PathParams, SplitVector, compute_w, d_upper, split_object
from .workloads import ObjectSpec, Trigger

# Event kinds, in tie-break order at equal timestamps.
KIND_ARRIVAL = 0      # object_arrival
KIND_SERVER_FREE = 1  # internal: a path finished serving one packet
KIND_DELIVERED = 2    # packet_delivered (receiver side)
KIND_ACK = 3          # ack_observed (sender side)

SCHEDULERS = ("sos", "sos_fec", "edf", "sedpf")


@dataclass(frozen=True)
class SimConfig:
    """Run-wide knobs shared by the engine and the harness."""

    epsilon: float = 0.05
    gamma: float = fec_mod.DEFAULT_GAMMA
    ack_return_ms: float = 0.0
    mode: str = "oracle"  # oracle | estimated
    warmup_packets: int = 0
    window_capacity: int = 5000
    priors: tuple | None = None  # per-path (mu, a, b, stddev) for cold starts

    def __post_init__(self):
        if self.mode not in ("oracle", "estimated"):
            raise ConfigError(f"unknown parameter mode {self.mode!r}")
        if self.ack_return_ms < 0:
            raise ConfigError("ack_return_ms must be nonnegative")


@dataclass(frozen=True)
class TransferRecord:
    """Per-object simulation outcome."""

    object_id: str
    start_ms: float
    completion_ms: float
    sent_per_path: tuple[int, ...]
    redundancy: int
    hol_buffer_peak: int
    d_upper_at_send: float


@dataclass(frozen=True)
class Plan:
    """One dispatch decision: per-path send counts plus decode threshold."""

    counts: tuple[int, ...]
    threshold: int
    base_counts: tuple[int, ...] | None = None  # redundancy-free split (FEC only)
    order: tuple[int, ...] | None = None  # per-packet path sequence (baselines)

    @property
    def redundancy(self) -> int:
        return sum(self.counts) - self.threshold


def completion_time(arrivals, threshold: int) -> float:
    """Time of the threshold-th smallest arrival."""
    arrivals = sorted(arrivals)
    if threshold < 1:
        raise ValidationError("threshold must be positive")
    if len(arrivals) < threshold:
        raise InfeasibleError(
            f"need {threshold} arrivals, got {len(arrivals)}"
        )
    return arrivals[threshold - 1]


def receive_buffer_size(split: SplitVector, paths) -> int:
    """In-order receive buffer sizing: ceil of sum over paths of D_U / mu."""
    paths = list(paths)
    if any(p.mu_ms == 0.0 for p in paths):
        raise UndefinedSizeError("buffer size undefined when some path has zero mean delay")
    bound = d_upper(split, paths)
    return math.ceil(sum(bound / p.mu_ms for p in paths))


# ---------------------------------------------------------------------------
# Scheduling policies


class SosPolicy:
    name = "sos"
    coded = False

    def plan(self, n: int, params, stddevs) -> Plan:
        split = split_object(n, params)
        return Plan(split.counts, n)


class SosFecPolicy:
    name = "sos_fec"
    coded = True

    def __init__(self, gamma: float = fec_mod.DEFAULT_GAMMA):
        self.gamma = gamma

    def plan(self, n: int, params, stddevs) -> Plan:
        alloc = fec_mod.solve_fec_split(n, params, self.gamma)
        return Plan(alloc.totals, n, base_counts=alloc.base.counts)


class _GreedyPolicy:
    coded = False
    assign = None

    def plan(self, n: int, params, stddevs) -> Plan:
        state = PathQueueState(
            in_flight=[p.in_flight for p in params],
            mean_ms=[p.mu_ms for p in params],
            stddev_ms=list(stddevs),
            prop_ms=[p.prop_ms for p in params],
        )
        counts = [0] * len(params)
        order = []
        for _ in range(n):
            j = type(self).assign(state)
            order.append(j)
            counts[j] += 1
            state.in_flight[j] += 1
        return Plan(tuple(counts), n, order=tuple(order))


class EdfPolicy(_GreedyPolicy):
    name = "edf"
    assign = staticmethod(edf_assign)


class SedpfPolicy(_GreedyPolicy):
    name = "sedpf"
    assign = staticmethod(sedpf_assign)


def make_policy(name: str, config: SimConfig | None = None):
    gamma = config.gamma if config is not None else fec_mod.DEFAULT_GAMMA
    if name == "sos":
        return SosPolicy()
    if name == "sos_fec":
        return SosFecPolicy(gamma)
    if name == "edf":
        return EdfPolicy()
    if name == "sedpf":
        return SedpfPolicy()
    raise ConfigError(f"unknown scheduler {name!r}")


def dispatch_order(counts, params) -> tuple[int, ...]:
    """Interleave per-path allocations by expected arrival time.

    Keeps sequence-adjacent packets close in expected delivery so the in-order
    receive buffer stays small; ties go to the lower path index.
    """
    heap = []
    for j, c in enumerate(counts):
        if c > 0:
            p = params[j]
            heap.append(((p.in_flight + 1) * p.mu_ms + p.prop_ms, j, 1))
    heapq.heapify(heap)
    order = []
    while heap:
        _, j, k = heapq.heappop(heap)
        order.append(j)
        if k < counts[j]:
            p = params[j]
            heapq.heappush(heap, ((p.in_flight + k + 1) * p.mu_ms + p.prop_ms, j, k + 1))
    return tuple(order)


# ---------------------------------------------------------------------------
# Parameter feed


class ParamFeed:
    """Supplies per-path scheduling parameters, true or window-estimated."""

    def __init__(self, specs, config: SimConfig, windows=None):
        self.specs = list(specs)
        self.config = config
        self.windows = windows
        m = len(self.specs)
        self.epsilon_j = config.epsilon / m
        if config.priors is not None:
            if len(config.priors) != m:
                raise ConfigError("need one prior tuple per path")
            self._truth = [tuple(p) for p in config.priors]
        else:
            self._truth = [oracle_stats(s, config.window_capacity) for s in self.specs]

    def warmup(self, sources, count: int) -> None:
        """Prime the windows with a continuous packet stream per path."""
        if self.windows is None or count <= 0:
            return
        for win, src in zip(self.windows, sources):
            draws = src.take(count)
            win.extend(draws[1:])  # first packet of a busy run has no gap reference

    def snapshot(self, in_flight) -> tuple[list[PathParams], list[float]]:
        params = []
        stddevs = []
        for j, spec in enumerate(self.specs):
            window = self.windows[j] if self.windows is not None else None
            u = int(in_flight[j])
            if self.config.mode == "estimated" and window is not None and len(window):
                params.append(
                    snapshot_params(window, self.epsilon_j, spec.propagation_ms, u)
                )
                stddevs.append(window.stddev())
            else:
                mu, a, b, sigma = self._truth[j]
                params.append(
                    PathParams(
                        mu_ms=mu,
                        a_ms=a,
                        b_ms=b,
                        w=compute_w(self.epsilon_j, a, b),
                        prop_ms=spec.propagation_ms,
                        in_flight=u,
                    )
                )
                stddevs.append(sigma)
        return params, stddevs


# ---------------------------------------------------------------------------
# Engine


class LiveObject:
    """Runtime state of one object moving through the engine."""

    def __init__(self, spec: ObjectSpec, n_paths: int, coded: bool):
        self.spec = spec
        self.needed = spec.size_packets
        self.coded = coded
        self.delivered = 0
        self.released = 0  # in-order prefix released to the application
        self.outstanding = 0  # dispatched, not yet delivered
        self.unserved = 0  # dispatched, service not yet started
        self.sent_per_path = [0] * n_paths
        self.start_ms: float | None = None
        self.completion_ms: float | None = None
        self.d_upper_at_send: float | None = None
        self.buffer_peak = 0
        self._arrived: list[bool] = [False] * (0 if coded else spec.size_packets)
        self._seq_counter = 0
        self.pulled_seqs: list[int] = []  # identities awaiting re-dispatch

    @property
    def settled(self) -> bool:
        return self.completion_ms is not None and self.outstanding == 0

    @property
    def parse_progress(self) -> int:
        """Packets usable by the application so far (drives dependency triggers)."""
        return self.delivered if self.coded else self.released

    def next_seqs(self, count: int) -> list[int]:
        if not self.coded and self.pulled_seqs:
            take, self.pulled_seqs = self.pulled_seqs[:count], self.pulled_seqs[count:]
            if len(take) < count:
                raise ValidationError("residual dispatch exceeds pulled packets")
            return take
        seqs = list(range(self._seq_counter, self._seq_counter + count))
        self._seq_counter += count
        return seqs

    def on_delivery(self, seq: int) -> None:
        self.delivered += 1
        self.outstanding -= 1
        if self.coded:
            occupancy = self.delivered if self.delivered < self.needed else 0
        else:
            if seq < len(self._arrived):
                self._arrived[seq] = True
            while self.released < len(self._arrived) and self._arrived[self.released]:
                self.released += 1
            occupancy = self.delivered - self.released
        if occupancy > self.buffer_peak:
            self.buffer_peak = occupancy

    def record(self) -> TransferRecord:
        if self.completion_ms is None or self.start_ms is None:
            raise InfeasibleError(f"object {self.spec.id!r} never completed")
        return TransferRecord(
            object_id=self.spec.id,
            start_ms=self.start_ms,
            completion_ms=self.completion_ms,
            sent_per_path=tuple(self.sent_per_path),
            redundancy=sum(self.sent_per_path) - self.needed,
            hol_buffer_peak=self.buffer_peak,
            d_upper_at_send=self.d_upper_at_send if self.d_upper_at_send is not None else 0.0,
        )


class _Lane:
    """Serial server for one path: a queue of packets served one gap apart."""

    def __init__(self, source: DelaySource):
        self.source = source
        self.prop_ms = source.spec.propagation_ms
        self.queue: deque[tuple[LiveObject, int]] = deque()
        self.serving = False
        self.u = 0  # dispatched, undelivered


class Simulation:
    """Event core: lanes, the event heap, delivery/ACK bookkeeping."""

    def __init__(self, sources, config: SimConfig = SimConfig()):
        sources = [
            make_source(s) if isinstance(s, DelaySourceSpec) else s for s in sources
        ]
        if not sources:
            raise ConfigError("need at least one path")
        self.config = config
        self.lanes = [_Lane(src) for src in sources]
        self.windows = [RollingWindow(config.window_capacity) for _ in sources]
        self.clock = 0.0
        self._heap: list = []
        self._counter = itertools.count()
        # Driver hooks.
        self.on_arrival = None  # fn(payload, now)
        self.on_ack = None  # fn(obj, seq, now)
        self.on_fully_sent = None  # fn(obj, now): last queued packet entered service

    @property
    def in_flight(self) -> tuple[int, ...]:
        return tuple(lane.u for lane in self.lanes)

    def schedule(self, time_ms: float, kind: int, path: int = -1, payload=None) -> None:
        heapq.heappush(self._heap, (time_ms, kind, path, next(self._counter), payload))

    def dispatch(self, obj: LiveObject, plan: Plan, params, now: float) -> None:
        """Enqueue one planned segment of an object across the lanes."""
        if obj.start_ms is None:
            obj.start_ms = now
            bound_counts = plan.base_counts if plan.base_counts is not None else plan.counts
            obj.d_upper_at_send = d_upper(
                SplitVector.from_counts(bound_counts), params
            )
        order = plan.order if plan.order is not None else dispatch_order(plan.counts, params)
        seqs = obj.next_seqs(len(order))
        per_lane: dict[int, list[tuple[LiveObject, int]]] = {}
        for seq, j in zip(seqs, order):
            per_lane.setdefault(j, []).append((obj, seq))
        for j, items in per_lane.items():
            lane = self.lanes[j]
            lane.queue.extend(items)
            lane.u += len(items)
            obj.outstanding += len(items)
            obj.unserved += len(items)
            obj.sent_per_path[j] += len(items)
        for j in per_lane:
            self._kick(j, now, continuation=False)

    def pull_unserved(self, obj: LiveObject) -> int:
        """Remove an object's queued (unserved) packets from all lanes."""
        pulled_total = 0
        for j, lane in enumerate(self.lanes):
            kept = deque(item for item in lane.queue if item[0] is not obj)
            pulled = len(lane.queue) - len(kept)
            if pulled:
                if not obj.coded:
                    obj.pulled_seqs.extend(
                        seq for o, seq in lane.queue if o is obj
                    )
                lane.queue = kept
                lane.u -= pulled
                obj.outstanding -= pulled
                obj.unserved -= pulled
                obj.sent_per_path[j] -= pulled
                pulled_total += pulled
        if not obj.coded:
            obj.pulled_seqs.sort()
        return pulled_total

    def _kick(self, j: int, now: float, continuation: bool) -> None:
        lane = self.lanes[j]
        if lane.serving or not lane.queue:
            return
        obj, seq = lane.queue.popleft()
        gap = lane.source.next_delay()
        end = now + gap
        lane.serving = True
        # A gap is a valid inter-ACK sample only between back-to-back services.
        recorded = gap if continuation else None
        self.schedule(end, KIND_SERVER_FREE, j)
        self.schedule(end + lane.prop_ms, KIND_DELIVERED, j, (obj, seq, recorded))
        obj.unserved -= 1
        if obj.unserved == 0 and self.on_fully_sent is not None:
            self.on_fully_sent(obj, now)

    def step(self) -> bool:
        """Process one event; returns False once the heap is empty."""
        if not self._heap:
            return False
        time_ms, kind, path, _, payload = heapq.heappop(self._heap)
        self.clock = time_ms
        if kind == KIND_ARRIVAL:
            if self.on_arrival is not None:
                self.on_arrival(payload, time_ms)
        elif kind == KIND_SERVER_FREE:
            lane = self.lanes[path]
            lane.serving = False
            self._kick(path, time_ms, continuation=True)
        elif kind == KIND_DELIVERED:
            obj, seq, recorded = payload
            self.lanes[path].u -= 1
            obj.on_delivery(seq)
            if obj.delivered == obj.needed and obj.completion_ms is None:
                obj.completion_ms = time_ms
            self.schedule(
                time_ms + self.config.ack_return_ms, KIND_ACK, path, (obj, seq, recorded)
            )
        elif kind == KIND_ACK:
            obj, seq, recorded = payload
            if recorded is not None:
                self.windows[path].record(recorded)
            if self.on_ack is not None:
                self.on_ack(obj, seq, time_ms)
        return True

    def run(self) -> None:
        while self.step():
            pass


def _normalize_objects(objects) -> list[ObjectSpec]:
    specs = []
    for i, obj in enumerate(objects):
        if isinstance(obj, ObjectSpec):
            specs.append(obj)
        else:
            specs.append(
                ObjectSpec(id=f"obj{i}", size_packets=int(obj), trigger=Trigger.t0())
            )
    return specs


def run_transfer(objects, scheduler, sources, config: SimConfig = SimConfig()):
    """Transmit objects one at a time; each starts once the previous settled.

    `objects` may be packet counts or ObjectSpecs; `scheduler` is a policy
    instance or one of {"sos", "sos_fec", "edf", "sedpf"}.  Returns one
    TransferRecord per object.
    """
    sources = [
        make_source(s) if isinstance(s, DelaySourceSpec) else s for s in sources
    ]
    policy = make_policy(scheduler, config) if isinstance(scheduler, str) else scheduler
    sim = Simulation(sources, config)
    feed = ParamFeed([src.spec for src in sources], config, sim.windows)
    if config.mode == "estimated":
        feed.warmup(sources, config.warmup_packets)

    records = []
    clock = 0.0
    for spec in _normalize_objects(objects):
        live = LiveObject(spec, len(sources), policy.coded)
        params, stddevs = feed.snapshot(sim.in_flight)
        plan = policy.plan(spec.size_packets, params, stddevs)
        sim.dispatch(live, plan, params, clock)
        sim.run()
        clock = sim.clock
        records.append(live.record())
    return records
