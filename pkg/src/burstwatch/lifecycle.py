"""Per-hashtag lifecycle: trigger -> burst -> off-burst -> death.

Each hashtag owns a 1-minute count series and a small integer state vector
advanced by ``kernels.lifecycle_advance``. Events carry two minutes:
``minute`` is when the engine could first know the event, ``at`` is the
lifecycle moment it names. They differ only for off-burst and death, which
are confirmed one quiet horizon after the moment they start.
"""

from __future__ import annotations

import bisect
import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import _pykernels as layout
from . import kernels
from .ingest import TweetRecord


class LifecycleOrderError(ValueError):
    """Minutes were fed out of order or twice."""


class DuplicateMinuteError(LifecycleOrderError):
    pass


class NotResolvedError(LookupError):
    """Labels were requested for a cycle whose outcome is not yet known."""


class UndefinedRatioError(ZeroDivisionError):
    pass


class Phase(str, enum.Enum):
    DORMANT = "Dormant"
    TRIGGERED = "Triggered"
    BURSTING = "Bursting"
    OFFBURST = "OffBurst"
    DEAD = "Dead"


_PHASES = {
    layout.DORMANT: Phase.DORMANT,
    layout.TRIGGERED: Phase.TRIGGERED,
    layout.BURSTING: Phase.BURSTING,
    layout.OFFBURST_PHASE: Phase.OFFBURST,
}


class EventKind(str, enum.Enum):
    TRIGGERED = "Triggered"
    BURST_ONSET = "BurstOnset"
    LABELED_NEGATIVE = "LabeledNegative"
    OFFBURST = "OffBurst"
    DEATH = "Death"


_KINDS = {
    layout.EV_TRIGGERED: EventKind.TRIGGERED,
    layout.EV_BURST: EventKind.BURST_ONSET,
    layout.EV_NEGATIVE: EventKind.LABELED_NEGATIVE,
    layout.EV_OFFBURST: EventKind.OFFBURST,
    layout.EV_DEATH: EventKind.DEATH,
}

KIND_RANK = {
    EventKind.TRIGGERED: 0,
    EventKind.BURST_ONSET: 1,
    EventKind.LABELED_NEGATIVE: 1,
    EventKind.OFFBURST: 2,
    EventKind.DEATH: 3,
}


@dataclass(frozen=True)
class LifecycleParams:
    delta: int = 50
    window_minutes: int = 5
    burst_horizon_minutes: int = 1440
    offburst_quiet_minutes: int = 1440
    death_quiet_minutes: int = 1440

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.window_minutes < 1:
            raise ValueError("window_minutes must be >= 1")
        for name in ("burst_horizon_minutes", "offburst_quiet_minutes", "death_quiet_minutes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        # a cycle must not reset before its burst or off-burst outcome can be known
        if max(self.burst_horizon_minutes, self.offburst_quiet_minutes) > self.death_quiet_minutes:
            raise ValueError("burst_horizon_minutes and offburst_quiet_minutes must not exceed "
                             "death_quiet_minutes")

    def kernel_args(self):
        return (self.delta, self.window_minutes, self.burst_horizon_minutes,
                self.offburst_quiet_minutes, self.death_quiet_minutes)


@dataclass
class TimeSeries:
    origin_minute: int
    counts: np.ndarray
    trigger_minute: int | None = None

    @property
    def current_minute(self) -> int:
        return self.origin_minute + len(self.counts) - 1

    def slice(self, start: int, stop: int) -> np.ndarray:
        """Counts for minutes ``start..stop`` inclusive (zeros outside the range held)."""
        out = np.zeros(stop - start + 1, dtype=np.int64)
        lo = max(start, self.origin_minute)
        hi = min(stop, self.current_minute)
        if lo <= hi:
            out[lo - start:hi - start + 1] = self.counts[lo - self.origin_minute:hi - self.origin_minute + 1]
        return out


@dataclass(frozen=True)
class LifecycleEvent:
    key: str
    cycle: int
    kind: EventKind
    minute: int
    at: int
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"key": self.key, "cycle": self.cycle, "kind": self.kind.value,
                           "minute": self.minute, "at": self.at, "payload": self.payload},
                          sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "LifecycleEvent":
        d = json.loads(line)
        return cls(d["key"], d["cycle"], EventKind(d["kind"]), d["minute"], d["at"], d.get("payload", {}))

    def sort_key(self):
        return (self.minute, self.key, self.cycle, KIND_RANK[self.kind])


@dataclass
class CycleRecord:
    """Resolved (or partially resolved) lifecycle moments of one cycle."""

    key: str
    cycle: int
    first_seen: int
    trigger: int
    c1: int
    threshold: int
    burst: int | None = None
    negative: bool = False
    negative_minute: int | None = None
    offburst: int | None = None
    offburst_confirmed: int | None = None
    death: int | None = None
    death_confirmed: int | None = None
    series: list = field(default_factory=list)

    @property
    def is_bursting(self) -> bool:
        return self.burst is not None

    @property
    def label_resolved(self) -> bool:
        return self.burst is not None or self.negative

    @property
    def tbb(self) -> int | None:
        return None if self.burst is None else self.burst - self.trigger

    @property
    def tra(self) -> int | None:
        if self.burst is None or self.offburst is None:
            return None
        return self.offburst - self.burst

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CycleRecord":
        return cls(**d)

    def time_series(self, until: int | None = None) -> TimeSeries:
        if not self.series:
            last = self.trigger if until is None else until
            return TimeSeries(self.first_seen, np.zeros(last - self.first_seen + 1, np.int64), self.trigger)
        last = self.series[-1][0] if until is None else until
        counts = np.zeros(last - self.first_seen + 1, dtype=np.int64)
        for minute, count in self.series:
            if minute > last:
                break
            counts[minute - self.first_seen] = count
        return TimeSeries(self.first_seen, counts, self.trigger)


def burst_threshold(c1: int, delta: int) -> int:
    """Count that a minute must strictly exceed to mark the burst onset."""
    if c1 < 0:
        raise ValueError("c1 must be non-negative")
    return max(c1 + delta, (3 * c1 + 1) // 2)


def check_trigger(series: TimeSeries, minute: int, params: LifecycleParams) -> bool:
    window = series.slice(minute - params.window_minutes + 1, minute)
    return int(window.sum()) > params.delta


class HashtagState:
    """Lifecycle state of one hashtag key (all of its cycles)."""

    def __init__(self, key: str, first_minute: int, params: LifecycleParams | None = None):
        self.key = key
        self.params = params or LifecycleParams()
        self.kstate = kernels.new_state(self.params.window_minutes, first_minute)
        self.current: CycleRecord | None = None
        self.closed: list[CycleRecord] = []
        self._minutes: list[int] = []
        self._counts: list[int] = []
        self._triggers = 0

    @property
    def next_minute(self) -> int:
        return int(self.kstate[layout.NEXT_MINUTE])

    @property
    def phase(self) -> Phase:
        return _PHASES[int(self.kstate[layout.PHASE])]

    @property
    def cycle(self) -> int:
        return int(self.kstate[layout.CYCLE])

    @property
    def first_seen_minute(self) -> int | None:
        v = int(self.kstate[layout.FIRST_SEEN])
        return None if v < 0 else v

    @property
    def trigger_minute(self) -> int | None:
        v = int(self.kstate[layout.TRIGGER])
        return None if v < 0 else v

    def series(self, until: int | None = None) -> TimeSeries:
        """Dense counts of the current cycle from its first tweet through ``until``."""
        origin = self.first_seen_minute
        last = self.next_minute - 1 if until is None else until
        if origin is None:
            return TimeSeries(last + 1, np.zeros(0, dtype=np.int64))
        counts = np.zeros(last - origin + 1, dtype=np.int64)
        for minute, count in zip(self._minutes, self._counts):
            if origin <= minute <= last:
                counts[minute - origin] = count
        return TimeSeries(origin, counts, self.trigger_minute)

    def _absorb(self, raw) -> list[LifecycleEvent]:
        out = []
        for kind_code, emitted, at in raw:
            kind = _KINDS[kind_code]
            emitted = int(emitted)
            at = int(at)
            payload: dict = {}
            if kind is EventKind.TRIGGERED:
                # one raw batch may close a cycle and open the next, so the
                # kernel's cycle counter is not reliable per event
                cycle_no = self._triggers
                self._triggers += 1
                st = self.kstate
                rec = CycleRecord(self.key, cycle_no, int(st[layout.FIRST_SEEN]), at,
                                  int(st[layout.C1]), int(st[layout.THRESHOLD]))
                self.current = rec
                payload = {"c1": rec.c1, "threshold": rec.threshold, "first_seen": rec.first_seen}
            else:
                rec = self.current
                cycle_no = rec.cycle
                if kind is EventKind.BURST_ONSET:
                    rec.burst = at
                    payload = {"tbb": at - rec.trigger}
                elif kind is EventKind.LABELED_NEGATIVE:
                    rec.negative = True
                    rec.negative_minute = at
                elif kind is EventKind.OFFBURST:
                    rec.offburst = at
                    rec.offburst_confirmed = emitted
                    payload = {"tra": at - rec.burst}
                else:
                    rec.death = at
                    rec.death_confirmed = emitted
                    cut = bisect.bisect_right(self._minutes, emitted)
                    rec.series = [[m, c] for m, c in zip(self._minutes[:cut], self._counts[:cut])
                                  if m >= rec.first_seen]
                    del self._minutes[:cut]
                    del self._counts[:cut]
                    self.closed.append(rec)
                    self.current = None
            out.append(LifecycleEvent(self.key, cycle_no, kind, emitted, at, payload))
        return out

    def open_record(self) -> CycleRecord | None:
        """Snapshot of the running cycle, series included, without closing it."""
        if self.current is None:
            return None
        rec = CycleRecord(**{**self.current.to_dict(), "series": []})
        rec.series = [[m, c] for m, c in zip(self._minutes, self._counts) if m >= rec.first_seen]
        return rec

    def _record_counts(self, start: int, counts) -> None:
        for i, c in enumerate(counts):
            if c:
                self._minutes.append(start + i)
                self._counts.append(int(c))
        if self._minutes and self.current is None and self.kstate[layout.PHASE] == layout.DORMANT:
            # dormant history older than the trigger window is only needed for first_seen
            self._trim_dormant()

    def _trim_dormant(self):
        first = self.first_seen_minute
        if first is None or len(self._minutes) < 4096:
            return
        keep_from = self.next_minute - self.params.window_minutes - 1
        cut = bisect.bisect_left(self._minutes, keep_from)
        # keep the first-seen entry so the cycle origin survives
        if cut > 1:
            del self._minutes[1:cut]
            del self._counts[1:cut]


def advance(state: HashtagState, minute: int, count: int,
            params: LifecycleParams | None = None) -> list[LifecycleEvent]:
    """Finalize one minute of ``state``; silent minutes before it are filled with zeros."""
    p = params or state.params
    nxt = state.next_minute
    if minute < nxt:
        if minute == nxt - 1:
            raise DuplicateMinuteError(f"{state.key}: minute {minute} already finalized")
        raise LifecycleOrderError(f"{state.key}: minute {minute} arrives after {nxt - 1}")
    if count < 0:
        raise ValueError("counts must be non-negative")
    events = []
    if minute > nxt:
        events += state._absorb(kernels.lifecycle_skip_zeros(state.kstate, minute - nxt, *p.kernel_args()))
    state._record_counts(minute, (count,))
    events += state._absorb(kernels.lifecycle_advance(state.kstate, np.array([count], np.int64),
                                                      *p.kernel_args()))
    return events


def advance_many(state: HashtagState, counts, params: LifecycleParams | None = None) -> list[LifecycleEvent]:
    """Finalize ``len(counts)`` consecutive minutes starting at ``state.next_minute``."""
    p = params or state.params
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if (counts < 0).any():
        raise ValueError("counts must be non-negative")
    state._record_counts(state.next_minute, counts)
    return state._absorb(kernels.lifecycle_advance(state.kstate, counts, *p.kernel_args()))


def finalize_through(state: HashtagState, minute: int, params: LifecycleParams | None = None):
    """Advance silent minutes up to and including ``minute``."""
    p = params or state.params
    n = minute - state.next_minute + 1
    if n <= 0:
        return []
    return state._absorb(kernels.lifecycle_skip_zeros(state.kstate, n, *p.kernel_args()))


def replay_series(counts, origin_minute: int = 0, params: LifecycleParams | None = None,
                  key: str = "h", incremental: bool = True) -> list[LifecycleEvent]:
    """Run the machine over a whole dense series, one minute at a time or in one block."""
    state = HashtagState(key, origin_minute, params)
    if not incremental:
        return advance_many(state, counts)
    events = []
    for i, c in enumerate(counts):
        if c:
            events += advance(state, origin_minute + i, int(c))
    events += finalize_through(state, origin_minute + len(counts) - 1)
    return events


class LifecycleEngine:
    """Streaming detector over time-ordered tweet records.

    Each key is advanced lazily: a key catches up through its silent minutes
    only when its next tweet arrives or when the stream closes. ``events()``
    returns the log in emission order.
    """

    def __init__(self, params: LifecycleParams | None = None):
        self.params = params or LifecycleParams()
        self.states: dict[str, HashtagState] = {}
        self._pending: dict[str, list] = {}
        self._events: list[LifecycleEvent] = []
        self.last_minute: int | None = None
        self.closed = False

    def feed(self, record: TweetRecord) -> None:
        m = record.timestamp // 60
        if self.last_minute is None or m > self.last_minute:
            self.last_minute = m
        for occ in record.hashtags:
            self.feed_count(occ.key, m, 1)

    def feed_count(self, key: str, minute: int, count: int) -> None:
        pending = self._pending.get(key)
        if pending is None:
            self.states[key] = HashtagState(key, minute, self.params)
            self._pending[key] = [minute, count]
            return
        if minute == pending[0]:
            pending[1] += count
            return
        if minute < pending[0]:
            raise LifecycleOrderError(f"{key}: record for minute {minute} after minute {pending[0]}")
        self._events += advance(self.states[key], pending[0], pending[1], self.params)
        pending[0] = minute
        pending[1] = count

    def close(self, end_minute: int | None = None) -> list[LifecycleEvent]:
        end = self.last_minute if end_minute is None else end_minute
        for key, state in self.states.items():
            minute, count = self._pending[key]
            if minute <= end:
                self._events += advance(state, minute, count, self.params)
                self._events += finalize_through(state, end, self.params)
        self.closed = True
        self._events.sort(key=LifecycleEvent.sort_key)
        return self._events

    def cycle_records(self) -> list[CycleRecord]:
        """Every triggered cycle: closed ones plus the still-open ones."""
        out = []
        for key in sorted(self.states):
            st = self.states[key]
            out.extend(st.closed)
            rec = st.open_record()
            if rec is not None:
                out.append(rec)
        return out


def detect_stream(records: Iterable[TweetRecord], params: LifecycleParams | None = None,
                  end_minute: int | None = None):
    engine = LifecycleEngine(params)
    for rec in records:
        engine.feed(rec)
    events = engine.close(end_minute)
    return events, engine.cycle_records()


def cycles_from_events(events: Iterable[LifecycleEvent]) -> list[CycleRecord]:
    """Rebuild cycle records (without series) from an event log."""
    table: dict[tuple[str, int], CycleRecord] = {}
    for ev in events:
        k = (ev.key, ev.cycle)
        if ev.kind is EventKind.TRIGGERED:
            table[k] = CycleRecord(ev.key, ev.cycle, ev.payload["first_seen"], ev.at,
                                   ev.payload["c1"], ev.payload["threshold"])
            continue
        rec = table[k]
        if ev.kind is EventKind.BURST_ONSET:
            rec.burst = ev.at
        elif ev.kind is EventKind.LABELED_NEGATIVE:
            rec.negative = True
            rec.negative_minute = ev.at
        elif ev.kind is EventKind.OFFBURST:
            rec.offburst = ev.at
            rec.offburst_confirmed = ev.minute
        else:
            rec.death = ev.at
            rec.death_confirmed = ev.minute
    return [table[k] for k in sorted(table)]


@dataclass(frozen=True)
class InstanceLabels:
    burst_label: int
    tbb: int | None
    tra: int | None


def label_instance(record: CycleRecord, prediction_minute: int) -> InstanceLabels:
    """Ground truth for a prediction issued at ``prediction_minute``.

    TBB and TRA are minutes from the prediction moment, clamped to >= 1.
    """
    if not record.label_resolved:
        raise NotResolvedError(f"{record.key}#{record.cycle}: burst outcome unknown")
    if record.burst is None:
        return InstanceLabels(0, None, None)
    tbb = tra = None
    if prediction_minute <= record.burst:
        tbb = max(record.burst - prediction_minute, 1)
    if record.burst <= prediction_minute:
        if record.offburst is None:
            raise NotResolvedError(f"{record.key}#{record.cycle}: off-burst not yet confirmed")
        if prediction_minute < record.offburst:
            tra = max(record.offburst - prediction_minute, 1)
    return InstanceLabels(1, tbb, tra)


DEFAULT_CHECKPOINTS = (5, 15, 30, 60, 180, 360, 1440, 2880)


def lifecycle_statistics(events_or_cycles, checkpoints: Iterable[int] = DEFAULT_CHECKPOINTS):
    """RAB / ROB / RAD at offsets (minutes) after each bursting hashtag's trigger.

    A moment counts at checkpoint ``x`` when it lies at most ``x`` minutes
    after the trigger.
    """
    items = list(events_or_cycles)
    if items and isinstance(items[0], LifecycleEvent):
        cycles = cycles_from_events(items)
    else:
        cycles = items
    bursting = [c for c in cycles if c.burst is not None]
    if not bursting:
        raise UndefinedRatioError("no bursting hashtags in the event log")
    n = len(bursting)
    table = []
    for x in checkpoints:
        rab = sum(1 for c in bursting if c.burst - c.trigger <= x) / n
        rob = sum(1 for c in bursting if c.offburst is not None and c.offburst - c.trigger <= x) / n
        rad = sum(1 for c in bursting if c.death is not None and c.death - c.trigger <= x) / n
        table.append({"checkpoint": int(x), "RAB": rab, "ROB": rob, "RAD": rad})
    return table


def read_events(path) -> Iterator[LifecycleEvent]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield LifecycleEvent.from_json(line)


def minute_of(timestamp: int) -> int:
    return math.floor(timestamp / 60)
