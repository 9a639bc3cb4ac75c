"""Discrete-event simulation of the lossy M/M/1 status-update queue.

Only two clocks are ever live (next arrival, current service completion), so
the event calendar is a pair of floats rather than a heap.  A completion that
ties with an arrival is processed first.

Service that is interrupted (preemptive LCFS) or repeated (retransmission)
restarts with a fresh exponential draw, which is equivalent in distribution to
resuming it.
"""
from __future__ import annotations

import csv
import math
import time as _time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Tuple

from .core import Policy, SystemParams, validate_params
from .exceptions import EventBudgetExceeded, InsufficientSamples, NonCausalDelivery
from .rng import VariateStream
from .stats import batch_means, t_interval

ARRIVAL = "arrival"
COMPLETION = "completion"


class Event(NamedTuple):
    time: float
    kind: str
    packet_id: int


class EventRecord(NamedTuple):
    """One row of the optional event log."""

    time: float
    kind: str
    packet_id: int
    gen_time: float
    queue_length_after: int
    delivered: int  # 1 if a completion reached the destination, else 0

    @classmethod
    def from_row(cls, row) -> "EventRecord":
        return cls(float(row[0]), row[1], int(row[2]), float(row[3]), int(row[4]), int(row[5]))


EVENT_LOG_COLUMNS = EventRecord._fields


class PeakTracker:
    """Destination-side age bookkeeping.

    A delivery is informative when its packet is newer than everything the
    destination already holds.  Each informative delivery after the first
    closes one peak of the age process, equal to the delivery time minus the
    generation time of the previous informative packet.
    """

    __slots__ = ("last_informative_gen", "peaks", "deliveries_total", "deliveries_informative")

    def __init__(self):
        self.last_informative_gen: Optional[float] = None
        self.peaks: List[float] = []
        self.deliveries_total = 0
        self.deliveries_informative = 0

    def record_delivery(self, gen_time: float, deliver_time: float) -> Optional[float]:
        """Register a successful delivery; return the peak it closes, if any."""
        if not deliver_time > gen_time:
            raise NonCausalDelivery(f"delivered at {deliver_time!r} before generation {gen_time!r}")
        self.deliveries_total += 1
        last = self.last_informative_gen
        if last is None:
            self.last_informative_gen = gen_time
            self.deliveries_informative += 1
            return None
        if gen_time > last:
            peak = deliver_time - last
            self.peaks.append(peak)
            self.last_informative_gen = gen_time
            self.deliveries_informative += 1
            return peak
        return None


@dataclass(frozen=True)
class SimConfig:
    target_peaks: int = 200_000
    warmup_peaks: Optional[int] = None
    n_batches: int = 32
    seed: int = 0
    stream: int = 0
    max_events: int = 10 ** 9
    allow_unstable_lcfs_pre: bool = False

    def __post_init__(self):
        if self.warmup_peaks is None:
            # max(1000, 1%) unless that would swallow a short run
            default = max(1000, self.target_peaks // 100)
            if default >= self.target_peaks:
                default = self.target_peaks // 2
            object.__setattr__(self, "warmup_peaks", default)
        if self.n_batches < 2:
            raise ValueError("n_batches must be at least 2")
        if self.target_peaks < 10 * self.n_batches:
            raise ValueError(f"target_peaks must be >= 10 * n_batches ({10 * self.n_batches})")
        if not 0 <= self.warmup_peaks < self.target_peaks:
            raise ValueError("warmup_peaks must lie in [0, target_peaks)")
        if self.max_events < 1:
            raise ValueError("max_events must be positive")


@dataclass(frozen=True)
class DecompositionStats:
    """Measured counterparts of the conditional means in the derivations.

    Only informative packets contribute to the wait/service means; waits and
    services are measured from arrival to first service start and from there
    to the informative delivery.
    """

    mean_wait_informative: float
    mean_service_informative: float
    prob_informative: float
    mean_queue_seen: float
    wait_informative_se: float = math.nan
    service_informative_se: float = math.nan
    n_informative: int = 0
    n_generated: int = 0


@dataclass(frozen=True)
class SimResult:
    policy: Policy
    params: SystemParams
    paoi_mean: float
    paoi_se: float
    ci95: Tuple[float, float]
    n_peaks: int
    informative_fraction: float
    decomposition: DecompositionStats
    seed_used: int
    stream: int = 0
    n_events: int = 0
    sim_time: float = 0.0
    n_generated: int = 0
    n_departed: int = 0
    n_discarded: int = 0
    n_in_system: int = 0
    deliveries_total: int = 0
    deliveries_informative: int = 0
    elapsed_s: float = field(default=0.0, compare=False)


@dataclass
class _RunState:
    tracker: PeakTracker
    n_events: int = 0
    clock: float = 0.0
    n_generated: int = 0
    n_departed: int = 0
    n_discarded: int = 0
    n_in_system: int = 0
    # measurement window (after warm-up)
    window_arrivals: int = 0
    window_queue_seen: int = 0
    window_informative: int = 0
    waits: List[float] = field(default_factory=list)
    services: List[float] = field(default_factory=list)
    reached_target: bool = False


def _run(params: SystemParams, policy: Policy, variates: VariateStream, *,
         warmup_peaks: int, stop_peaks: Optional[int], max_events: int,
         on_event: Optional[Callable[[EventRecord], None]] = None) -> _RunState:
    """Event loop shared by every policy.

    Packets are ``(id, generation_time, first_service_start)`` tuples; waiting
    packets that have never been served carry only ``(id, generation_time)``.
    """
    lam, mu, p = params.lam, params.mu, params.p
    next_exp = variates.next_exp
    next_uniform = variates.next_uniform
    tracker = PeakTracker()
    record = tracker.record_delivery
    peaks = tracker.peaks
    st = _RunState(tracker)
    waits, services = st.waits, st.services

    fcfs = policy is Policy.FCFS
    lcfs_pre = policy is Policy.LCFS_PREEMPTIVE
    retx_pre = policy is Policy.RETX_PREEMPTIVE
    retx_non = policy is Policy.RETX_NON_PREEMPTIVE
    one_slot = retx_non or policy is Policy.PACKET_MGMT_SIM_ONLY

    backlog = deque() if fcfs else []
    waiting = None                     # single overwrite slot (retx-non, packet management)
    serving = None
    n_sys = 0
    pid = 0
    t = 0.0
    inf = math.inf
    next_arrival = next_exp() / lam
    next_done = inf
    measuring = warmup_peaks == 0
    stop = inf if stop_peaks is None else stop_peaks
    n_events = 0
    n_departed = n_discarded = 0
    window_arrivals = window_seen = window_inf = 0

    while n_events < max_events:
        n_events += 1
        if next_done <= next_arrival:
            t = next_done
            cur = serving
            delivered = next_uniform() < p
            if delivered:
                before = tracker.deliveries_informative
                record(cur[1], t)
                if tracker.deliveries_informative != before and measuring:
                    window_inf += 1
                    waits.append(cur[2] - cur[1])
                    services.append(t - cur[2])
            if retx_pre:
                next_done = t + next_exp() / mu
            elif retx_non:
                if waiting is not None:
                    serving = (waiting[0], waiting[1], t)
                    waiting = None
                    n_sys -= 1
                    n_departed += 1
                next_done = t + next_exp() / mu
            else:
                n_sys -= 1
                n_departed += 1
                if fcfs:
                    nxt = backlog.popleft() if backlog else None
                elif one_slot:
                    nxt, waiting = waiting, None
                else:
                    nxt = backlog.pop() if backlog else None
                if nxt is None:
                    serving = None
                    next_done = inf
                else:
                    # preempted packets already carry their original start time
                    serving = nxt if lcfs_pre else (nxt[0], nxt[1], t)
                    next_done = t + next_exp() / mu
            if on_event is not None:
                on_event(EventRecord(t, COMPLETION, cur[0], cur[1], n_sys, int(delivered)))
            if delivered:
                n_peaks = len(peaks)
                if not measuring and n_peaks >= warmup_peaks:
                    measuring = True
                if n_peaks >= stop:
                    st.reached_target = True
                    break
        else:
            t = next_arrival
            next_arrival = t + next_exp() / lam
            pid += 1
            if measuring:
                window_arrivals += 1
                window_seen += n_sys
            if serving is None:
                serving = (pid, t, t)
                next_done = t + next_exp() / mu
                n_sys += 1
            elif lcfs_pre:
                backlog.append(serving)
                serving = (pid, t, t)
                next_done = t + next_exp() / mu
                n_sys += 1
            elif retx_pre:
                serving = (pid, t, t)
                next_done = t + next_exp() / mu
                n_discarded += 1
            elif one_slot:
                if waiting is None:
                    n_sys += 1
                else:
                    n_discarded += 1
                waiting = (pid, t)
            else:
                backlog.append((pid, t))
                n_sys += 1
            if on_event is not None:
                on_event(EventRecord(t, ARRIVAL, pid, t, n_sys, 0))

    st.n_events = n_events
    st.clock = t
    st.n_generated = pid
    st.n_departed = n_departed
    st.n_discarded = n_discarded
    st.n_in_system = n_sys
    st.window_arrivals = window_arrivals
    st.window_queue_seen = window_seen
    st.window_informative = window_inf
    return st


def _mean_se(samples: List[float], n_batches: int) -> Tuple[float, float]:
    if not samples:
        return math.nan, math.nan
    try:
        return batch_means(samples, n_batches)
    except InsufficientSamples:
        return math.fsum(samples) / len(samples), math.nan


def simulate(params: SystemParams, policy: Policy, config: SimConfig = SimConfig(), *,
             on_event: Optional[Callable[[EventRecord], None]] = None) -> SimResult:
    """Run one replication until ``config.target_peaks`` post-warm-up peaks are seen.

    Raises EventBudgetExceeded if ``config.max_events`` runs out first.
    """
    validate_params(params, policy, config.allow_unstable_lcfs_pre)
    started = _time.perf_counter()
    variates = VariateStream(config.seed, config.stream)
    st = _run(params, policy, variates,
              warmup_peaks=config.warmup_peaks,
              stop_peaks=config.warmup_peaks + config.target_peaks,
              max_events=config.max_events, on_event=on_event)
    if not st.reached_target:
        raise EventBudgetExceeded(
            f"{policy} at {params}: {len(st.tracker.peaks)} peaks after {st.n_events} events")

    window = st.tracker.peaks[config.warmup_peaks:]
    mean, se = batch_means(window, config.n_batches)
    ci = t_interval(mean, se, config.n_batches - 1)
    fraction = st.window_informative / st.window_arrivals if st.window_arrivals else math.nan
    wait_mean, wait_se = _mean_se(st.waits, config.n_batches)
    svc_mean, svc_se = _mean_se(st.services, config.n_batches)
    decomposition = DecompositionStats(
        mean_wait_informative=wait_mean,
        mean_service_informative=svc_mean,
        prob_informative=fraction,
        mean_queue_seen=(st.window_queue_seen / st.window_arrivals
                         if st.window_arrivals else math.nan),
        wait_informative_se=wait_se,
        service_informative_se=svc_se,
        n_informative=st.window_informative,
        n_generated=st.window_arrivals,
    )
    return SimResult(
        policy=policy,
        params=params,
        paoi_mean=mean,
        paoi_se=se,
        ci95=ci,
        n_peaks=len(window),
        informative_fraction=fraction,
        decomposition=decomposition,
        seed_used=config.seed,
        stream=config.stream,
        n_events=st.n_events,
        sim_time=st.clock,
        n_generated=st.n_generated,
        n_departed=st.n_departed,
        n_discarded=st.n_discarded,
        n_in_system=st.n_in_system,
        deliveries_total=st.tracker.deliveries_total,
        deliveries_informative=st.tracker.deliveries_informative,
        elapsed_s=_time.perf_counter() - started,
    )


@dataclass
class Trace:
    """Fixed-length logged run, used for replay checks."""

    tracker: PeakTracker
    events: List[EventRecord]
    n_generated: int
    n_departed: int
    n_discarded: int
    n_in_system: int


def trace(params: SystemParams, policy: Policy, n_events: int, seed: int = 0,
          stream: int = 0, allow_unstable_lcfs_pre: bool = False) -> Trace:
    """Run exactly ``n_events`` events and keep the full event log in memory."""
    validate_params(params, policy, allow_unstable_lcfs_pre)
    events: List[EventRecord] = []
    st = _run(params, policy, VariateStream(seed, stream), warmup_peaks=0,
              stop_peaks=None, max_events=n_events, on_event=events.append)
    return Trace(st.tracker, events, st.n_generated, st.n_departed,
                 st.n_discarded, st.n_in_system)


def write_event_log(path, events) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_LOG_COLUMNS)
        writer.writerows(_format_record(e) for e in events)


class EventLogWriter:
    """Streams event records to CSV as they happen; use as ``on_event``."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(EVENT_LOG_COLUMNS)

    def __call__(self, record: EventRecord) -> None:
        self._writer.writerow(_format_record(record))

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_event_log(path) -> List[EventRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [EventRecord.from_row(row) for row in reader]


def _format_record(e: EventRecord):
    return (repr(e.time), e.kind, e.packet_id, repr(e.gen_time), e.queue_length_after, e.delivered)
