"""Event-driven simulation kernel.

Holds the clock, the event calendar, named random streams and the
shifted-exponential processing-time law used by every station.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from typing import Any, Callable, Optional

SimTime = float

PROCESS_COMPLETE = "process-complete"
TRANSFER_COMPLETE = "buffer-transfer-complete"
WORKER_ARRIVAL = "worker-arrival"
AGENT_BOUNDARY = "agent-boundary"


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


@dataclass(eq=False)
class Event:
    fire_at: SimTime
    sequence: int
    target: str
    kind: str
    callback: Optional[Callable[[], Any]] = None
    payload: Any = None
    cancelled: bool = False

    def cancel(self) -> None:
        self.cancelled = True


class Calendar:
    """Priority queue of events ordered by ``(fire_at, sequence)``."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, Event]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def next_sequence(self) -> int:
        self._seq += 1
        return self._seq

    def push(self, event: Event) -> None:
        heapq.heappush(self._heap, (event.fire_at, event.sequence, event))

    def peek_time(self) -> float:
        return self._heap[0][0] if self._heap else math.inf

    def pop(self) -> Event:
        return heapq.heappop(self._heap)[2]

    def events(self) -> list[Event]:
        return [entry[2] for entry in self._heap]


class Engine:
    """Single-threaded discrete-event engine.

    ``run_until`` dispatches every event whose time is ``<= t_end`` and
    leaves the clock exactly at ``t_end``.
    """

    def __init__(self, log_events: bool = False) -> None:
        self.clock: SimTime = 0.0
        self.calendar = Calendar()
        self.log: Optional[list[dict]] = [] if log_events else None
        self.dispatched = 0

    def schedule(self, event: Event) -> Event:
        if event.fire_at < self.clock:
            raise SchedulingError(
                f"event {event.kind!r} for {event.target!r} at {event.fire_at} "
                f"is before clock {self.clock}"
            )
        self.calendar.push(event)
        return event

    def at(self, fire_at: SimTime, target: str, kind: str,
           callback: Optional[Callable[[], Any]] = None, payload: Any = None) -> Event:
        event = Event(fire_at, self.calendar.next_sequence(), target, kind, callback, payload)
        return self.schedule(event)

    def after(self, delay: SimTime, target: str, kind: str,
              callback: Optional[Callable[[], Any]] = None, payload: Any = None) -> Event:
        return self.at(self.clock + delay, target, kind, callback, payload)

    def run_until(self, t_end: SimTime) -> None:
        if t_end < self.clock:
            raise SchedulingError(f"cannot run back to {t_end} from {self.clock}")
        calendar = self.calendar
        while calendar._heap and calendar._heap[0][0] <= t_end:
            event = calendar.pop()
            if event.cancelled:
                continue
            self.clock = event.fire_at
            self.dispatched += 1
            if self.log is not None:
                self.log.append({
                    "time": event.fire_at,
                    "object": event.target,
                    "kind": event.kind,
                    "payload": event.payload,
                })
            if event.callback is not None:
                event.callback()
        self.clock = t_end

    def pending(self, ignore_kinds: tuple[str, ...] = (AGENT_BOUNDARY,)) -> list[Event]:
        return [e for e in self.calendar.events()
                if not e.cancelled and e.kind not in ignore_kinds]


class RandomStream:
    """Independent random stream keyed by ``(seed, stream_id)``.

    The string seed goes through ``random.Random``'s sha512 seeding, so the
    sequence depends only on the pair and never on other streams.
    """

    def __init__(self, seed: int, stream_id: str) -> None:
        self.seed = int(seed)
        self.stream_id = stream_id
        self._rng = random.Random(f"{self.seed}:{stream_id}")

    def exponential(self, mean: float) -> float:
        if mean <= 0:
            return 0.0
        return self._rng.expovariate(1.0 / mean)

    def uniform(self, low: float, high: float) -> float:
        return self._rng.uniform(low, high)

    def random(self) -> float:
        return self._rng.random()

    def randrange(self, n: int) -> int:
        return self._rng.randrange(n)


@dataclass(frozen=True)
class Distribution:
    """Shifted exponential law ``minimum + Exp(exp_mean)``."""

    minimum: float = 0.0
    exp_mean: float = 0.0

    def __post_init__(self) -> None:
        if self.minimum < 0 or self.exp_mean < 0:
            raise ValueError(f"negative distribution parameters: {self}")

    @property
    def mean(self) -> float:
        return self.minimum + self.exp_mean

    @property
    def variance(self) -> float:
        return self.exp_mean ** 2

    @property
    def deterministic(self) -> bool:
        return self.exp_mean == 0

    def scaled(self, factor: float) -> "Distribution":
        """Same noise, minimum multiplied by ``factor``."""
        return Distribution(self.minimum * factor, self.exp_mean)

    @classmethod
    def coerce(cls, value: Any) -> "Distribution":
        if isinstance(value, Distribution):
            return value
        if value is None:
            return cls()
        if isinstance(value, (int, float)):
            return cls(float(value), 0.0)
        if isinstance(value, dict):
            return cls(float(value.get("minimum", 0.0)), float(value.get("exp_mean", 0.0)))
        raise TypeError(f"cannot interpret {value!r} as a Distribution")

    def to_dict(self) -> dict:
        return {"minimum": self.minimum, "exp_mean": self.exp_mean}


def sample_time(dist: Distribution, stream: RandomStream) -> SimTime:
    if dist.exp_mean == 0:
        return dist.minimum
    return dist.minimum + stream.exponential(dist.exp_mean)


def performance_coefficient(n: int, c: float) -> float:
    return math.exp(-c * n)


def sample_worker_time(T: float, S: float, n: int, c: float, stream: RandomStream) -> SimTime:
    """Draw ``T * exp(-c n) + Exp(S * T)``; ``S`` is relative to ``T``."""
    if n < 0 or c < 0:
        raise ValueError("worker count and coefficient must be non-negative")
    base = T * performance_coefficient(n, c)
    return base + stream.exponential(S * T)
