"""Production-line objects and their process-interaction dynamics.

Every station is a generator that yields small commands (hold for a
duration, get a carrier, wait for buffer space, suspend while switched
off).  ``Station._advance`` interprets those commands against the engine,
so blocking and starving fall out of the buffer wake-up rules rather than
being coded per station type.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from .des import (
    PROCESS_COMPLETE,
    TRANSFER_COMPLETE,
    WORKER_ARRIVAL,
    Distribution,
    Engine,
    RandomStream,
    sample_time,
)

WORKING = "working"
FAILING = "failing"
WAITING = "waiting"
MODES = (WORKING, FAILING, WAITING)


class LayoutError(ValueError):
    """Structural problem in a layout description."""


class AssignmentError(ValueError):
    """A worker was sent to a station outside its pool."""


@dataclass
class Part:
    id: int
    created_at: float
    origin: str
    assembly_condition: Optional[float] = None

    def age(self, now: float) -> float:
        return now - self.created_at

    def expired(self, now: float) -> bool:
        return self.assembly_condition is not None and self.age(now) > self.assembly_condition


@dataclass(eq=False)
class Carrier:
    id: int
    capacity: int
    parts: list[Part] = field(default_factory=list)


# commands yielded by station generators

class Hold:
    __slots__ = ("duration", "kind", "mode", "payload")

    def __init__(self, duration: float, kind: str = PROCESS_COMPLETE,
                 mode: str = WORKING, payload: Any = None) -> None:
        self.duration = duration
        self.kind = kind
        self.mode = mode
        self.payload = payload


class Get:
    __slots__ = ("buffer", "retargetable")

    def __init__(self, buffer: "Buffer", retargetable: bool = False) -> None:
        self.buffer = buffer
        self.retargetable = retargetable


class Space:
    __slots__ = ("buffer",)

    def __init__(self, buffer: "Buffer") -> None:
        self.buffer = buffer


class Suspend:
    __slots__ = ()


class Buffer:
    """Finite FIFO of carriers between one upstream and one downstream station."""

    def __init__(self, id: str, upstream: "Station", downstream: "Station", capacity: int,
                 traversal_time: float = 0.0, put_time: Any = None, get_time: Any = None,
                 component: bool = False) -> None:
        if capacity < 1:
            raise LayoutError(f"buffer {id!r} needs a positive capacity")
        self.id = id
        self.upstream = upstream
        self.downstream = downstream
        self.capacity = int(capacity)
        self.traversal_time = float(traversal_time)
        self.put_time = Distribution.coerce(put_time)
        self.get_time = Distribution.coerce(get_time)
        self.component = component
        self.queue: deque[tuple[Carrier, float]] = deque()
        self.getter: Optional[Station] = None
        self.putter: Optional[Station] = None
        self.n_in = 0
        self.n_out = 0

    def __repr__(self) -> str:
        return f"Buffer({self.id!r}, {len(self.queue)}/{self.capacity})"

    @property
    def engine(self) -> Engine:
        return self.upstream.engine

    @property
    def occupancy(self) -> int:
        return len(self.queue)

    @property
    def fill(self) -> float:
        return len(self.queue) / self.capacity

    def has_space(self) -> bool:
        return len(self.queue) < self.capacity

    def gettable(self, now: float) -> bool:
        return bool(self.queue) and self.queue[0][1] <= now

    def insert(self, carrier: Carrier) -> None:
        if len(self.queue) >= self.capacity:
            raise RuntimeError(f"buffer {self.id!r} overflow")
        now = self.engine.clock
        ready_at = now + self.traversal_time
        self.queue.append((carrier, ready_at))
        self.n_in += 1
        if self.getter is not None and len(self.queue) == 1:
            self._wake_getter_at(ready_at)

    def take(self) -> Carrier:
        carrier, _ = self.queue.popleft()
        self.n_out += 1
        if self.putter is not None:
            putter = self.putter
            self.engine.after(0.0, self.id, "wake", putter._retry)
        if self.getter is not None and self.queue:
            self._wake_getter_at(self.queue[0][1])
        return carrier

    def _wake_getter_at(self, ready_at: float) -> None:
        getter = self.getter
        engine = self.engine
        engine.at(max(ready_at, engine.clock), self.id, TRANSFER_COMPLETE, getter._retry)

    def carriers(self) -> list[Carrier]:
        return [c for c, _ in self.queue]


def jumped_duration(jump: dict, start: float, work: float) -> float:
    """Time to finish ``work`` minimum-time units begun at ``start``.

    Inside ``[trigger, trigger + length]`` work advances at speed
    ``1 / factor``; a cycle lying wholly inside the window therefore takes
    ``factor * work`` and one lying outside takes ``work``.
    """
    low = jump["trigger"]
    high = low + jump["length"]
    factor = jump["factor"]
    t, remaining = start, work
    if t < low:
        step = min(remaining, low - t)
        t += step
        remaining -= step
    if remaining > 0 and t < high:
        room = (high - t) / factor
        if remaining <= room:
            t += remaining * factor
            remaining = 0.0
        else:
            remaining -= room
            t = high
    return t + remaining - start


class Station:
    kind = "station"

    def __init__(self, id: str, processing: Any = 0.0, rework_probability: float = 0.0,
                 on: bool = True, actionable_on: bool = False) -> None:
        self.id = id
        self.processing = Distribution.coerce(processing)
        self.rework_probability = float(rework_probability)
        self.on = on
        self.actionable_on = actionable_on
        self.mode = WAITING
        self.in_buffers: list[Buffer] = []
        self.out_buffers: list[Buffer] = []
        self.line: Optional[Line] = None
        self.engine: Optional[Engine] = None
        self.rng: Optional[RandomStream] = None
        self.pool: Optional[WorkerPool] = None
        self.n_workers = 0
        self.n_ok = 0
        self.n_nok = 0
        self.last_processing_time = 0.0
        self.processing_valid = False
        self.processing_active = False
        self.held: list[Carrier] = []
        self.jump: Optional[dict] = None
        self._gen: Optional[Iterator] = None
        self._pending: Any = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.id!r})"

    # -- process machinery ---------------------------------------------------

    @property
    def blocked(self) -> bool:
        return isinstance(self._pending, (Get, Space))

    @property
    def suspended(self) -> bool:
        return isinstance(self._pending, Suspend)

    def start(self) -> None:
        self._gen = self.run()
        self._advance(None)

    def _advance(self, value: Any) -> None:
        engine = self.engine
        while True:
            try:
                cmd = self._gen.send(value)
            except StopIteration:
                self._pending = None
                self.mode = WAITING
                return
            value = None
            if type(cmd) is Hold:
                self._pending = None
                self.mode = cmd.mode
                engine.after(cmd.duration, self.id, cmd.kind, self._resume, cmd.payload)
                return
            self._pending = cmd
            value = self._try(cmd)
            if self._pending is not None:
                self.mode = WAITING
                return

    def _try(self, cmd: Any) -> Any:
        """Satisfy ``cmd`` now if possible; otherwise register as waiter."""
        now = self.engine.clock
        if type(cmd) is Get:
            buffer = cmd.buffer
            if buffer.gettable(now):
                buffer.getter = None
                self._pending = None
                return buffer.take()
            buffer.getter = self
            if buffer.queue:
                buffer._wake_getter_at(buffer.queue[0][1])
            return None
        if type(cmd) is Space:
            buffer = cmd.buffer
            if buffer.has_space():
                buffer.putter = None
                self._pending = None
                return None
            buffer.putter = self
            return None
        if type(cmd) is Suspend:
            if self.on:
                self._pending = None
            return None
        raise TypeError(f"unknown command {cmd!r}")

    def _resume(self) -> None:
        self._advance(None)

    def _retry(self) -> None:
        cmd = self._pending
        if cmd is None:
            return
        value = self._try(cmd)
        if self._pending is None:
            self._advance(value)

    def retarget_get(self, buffer: Buffer) -> None:
        cmd = self._pending
        if type(cmd) is Get and cmd.retargetable and cmd.buffer is not buffer:
            if cmd.buffer.getter is self:
                cmd.buffer.getter = None
            cmd.buffer = buffer
            self.engine.after(0.0, self.id, "wake", self._retry)

    def set_on(self, on: bool) -> None:
        self.on = bool(on)
        if self.on and self.suspended:
            self.engine.after(0.0, self.id, "wake", self._retry)

    # -- shared cycle pieces -------------------------------------------------

    def _check_on(self):
        while not self.on:
            yield Suspend()

    def distribution_at(self, t: float) -> Distribution:
        jump = self.jump
        if jump and jump["trigger"] <= t <= jump["trigger"] + jump["length"]:
            return self.processing.scaled(jump["factor"])
        return self.processing

    def draw_processing(self) -> float:
        dist = self.processing
        minimum = dist.minimum
        if self.pool is not None:
            minimum *= math.exp(-self.pool.performance_coefficient * self.n_workers)
        extra = self.rng.exponential(dist.exp_mean) if dist.exp_mean > 0 else 0.0
        if self.jump:
            duration = jumped_duration(self.jump, self.engine.clock, minimum) + extra
        else:
            duration = minimum + extra
        if self.rework_probability > 0 and self.rng.random() < self.rework_probability:
            duration *= 2
        return duration

    def _process(self, duration: float):
        self.processing_active = True
        yield Hold(duration, PROCESS_COMPLETE, payload={"duration": duration})
        self.processing_active = False
        self.last_processing_time = duration
        self.processing_valid = True
        if self.pool is not None:
            self.pool.task_complete(self)

    def _get(self, buffer: Buffer, retargetable: bool = False):
        cmd = Get(buffer, retargetable)
        carrier = yield cmd
        self.held.append(carrier)
        duration = sample_time(cmd.buffer.get_time, self.rng)
        if duration > 0:
            yield Hold(duration, TRANSFER_COMPLETE, payload={"get": cmd.buffer.id})
        return carrier

    def _put(self, buffer: Buffer, carrier: Carrier):
        yield Space(buffer)
        duration = sample_time(buffer.put_time, self.rng)
        if duration > 0:
            yield Hold(duration, TRANSFER_COMPLETE, payload={"put": buffer.id})
        buffer.insert(carrier)
        self.held.remove(carrier)

    def run(self):
        raise NotImplementedError

    def minimal_cycle_time(self) -> float:
        """Smallest possible processing time (used by OEE)."""
        minimum = self.processing.minimum
        if self.pool is not None:
            minimum *= math.exp(-self.pool.performance_coefficient * len(self.pool.workers))
        return minimum


class Source(Station):
    kind = "source"

    def __init__(self, id: str, processing: Any = 0.0, waiting_time: float = 0.0,
                 actionable_waiting_time: bool = False, part_specs: Optional[list[dict]] = None,
                 carrier_capacity: int = 1, **kwargs) -> None:
        super().__init__(id, processing, **kwargs)
        self.waiting_time = float(waiting_time)
        self.actionable_waiting_time = actionable_waiting_time
        self.part_specs = list(part_specs) if part_specs else [{}]
        self.carrier_capacity = int(carrier_capacity)
        self.parts_created = 0

    @property
    def out(self) -> Buffer:
        return self.out_buffers[0]

    def run(self):
        line = self.line
        while True:
            yield from self._check_on()
            if self.in_buffers:
                carrier = yield from self._get(self.in_buffers[0])
                carrier.parts.clear()
            else:
                carrier = line.new_carrier(self.carrier_capacity)
                self.held.append(carrier)
            yield from self._process(self.draw_processing())
            now = self.engine.clock
            for spec in self.part_specs:
                carrier.parts.append(line.new_part(self.id, now, spec.get("assembly_condition")))
                self.parts_created += 1
            yield from self._put(self.out, carrier)
            self.n_ok += 1
            # the gap between two consecutive parts; read fresh every cycle
            if self.waiting_time > 0:
                yield Hold(self.waiting_time, "waiting-complete", WAITING)


class Process(Station):
    kind = "process"

    def run(self):
        while True:
            yield from self._check_on()
            carrier = yield from self._get(self.in_buffers[0])
            yield from self._process(self.draw_processing())
            yield from self._put(self.out_buffers[0], carrier)
            self.n_ok += 1


class Assembly(Station):
    kind = "assembly"

    def __init__(self, id: str, processing: Any = 0.0, nok_error_time: float = 0.0,
                 **kwargs) -> None:
        super().__init__(id, processing, **kwargs)
        self.nok_error_time = float(nok_error_time)

    @property
    def main_in(self) -> Buffer:
        return next(b for b in self.in_buffers if not b.component)

    @property
    def component_ins(self) -> list[Buffer]:
        return [b for b in self.in_buffers if b.component]

    def run(self):
        line = self.line
        main_in = self.main_in
        component_ins = self.component_ins
        while True:
            yield from self._check_on()
            main = yield from self._get(main_in)
            components = []
            for buffer in component_ins:
                components.append((buffer, (yield from self._get(buffer))))
            while True:
                now = self.engine.clock
                expired = [item for item in components
                           if any(p.expired(now) for p in item[1].parts)]
                if not expired:
                    break
                for item in expired:
                    buffer, carrier = item
                    components.remove(item)
                    self.held.remove(carrier)
                    self.n_nok += len(carrier.parts)
                    line.parts_scrapped += len(carrier.parts)
                    if self.nok_error_time > 0:
                        yield Hold(self.nok_error_time, "scrap-complete",
                                   payload={"scrapped": [p.id for p in carrier.parts]})
                    components.append((buffer, (yield from self._get(buffer))))
            yield from self._process(self.draw_processing())
            for _, carrier in components:
                main.parts.extend(carrier.parts)
                carrier.parts = []
                self.held.remove(carrier)
            yield from self._put(self.out_buffers[0], main)
            self.n_ok += 1


class Sink(Station):
    kind = "sink"

    def __init__(self, id: str, processing: Any = 0.0, **kwargs) -> None:
        super().__init__(id, processing, **kwargs)
        self.parts_absorbed = 0

    def run(self):
        line = self.line
        while True:
            yield from self._check_on()
            carrier = yield from self._get(self.in_buffers[0])
            yield from self._process(self.draw_processing())
            self.n_ok += 1
            self.parts_absorbed += len(carrier.parts)
            line.parts_absorbed += len(carrier.parts)
            carrier.parts = []
            if self.out_buffers:
                yield from self._put(self.out_buffers[0], carrier)
            else:
                self.held.remove(carrier)


class Switch(Station):
    kind = "switch"

    def __init__(self, id: str, processing: Any = 0.0, in_index: int = 0, out_index: int = 0,
                 **kwargs) -> None:
        super().__init__(id, processing, **kwargs)
        self.in_index = int(in_index)
        self.out_index = int(out_index)

    def set_in_index(self, index: int) -> None:
        self.in_index = int(index)
        self.retarget_get(self.in_buffers[self.in_index])

    def set_out_index(self, index: int) -> None:
        self.out_index = int(index)

    def run(self):
        while True:
            yield from self._check_on()
            carrier = yield from self._get(self.in_buffers[self.in_index], retargetable=True)
            yield from self._process(self.draw_processing())
            yield from self._put(self.out_buffers[self.out_index], carrier)
            self.n_ok += 1


class Magazine(Station):
    """Carrier store; releases empty carriers and takes returned ones back."""

    kind = "magazine"

    def __init__(self, id: str, processing: Any = 0.0, n_carriers: int = 0,
                 carrier_capacity: int = 1, **kwargs) -> None:
        super().__init__(id, processing, **kwargs)
        self.n_carriers = int(n_carriers)
        self.carrier_capacity = int(carrier_capacity)
        self.stock: list[Carrier] = []

    def run(self):
        self.stock = [self.line.new_carrier(self.carrier_capacity) for _ in range(self.n_carriers)]
        while True:
            yield from self._check_on()
            if self.stock:
                carrier = self.stock.pop(0)
                self.held.append(carrier)
            elif self.in_buffers:
                carrier = yield from self._get(self.in_buffers[0])
            else:
                return
            yield from self._process(self.draw_processing())
            yield from self._put(self.out_buffers[0], carrier)
            self.n_ok += 1


STATION_TYPES: dict[str, type[Station]] = {
    cls.kind: cls for cls in (Source, Process, Assembly, Sink, Switch, Magazine)
}


@dataclass(eq=False)
class Worker:
    id: str
    pool: "WorkerPool"
    assigned_station: str
    location: Optional[str]
    traversal_time: float = 0.0
    leaving: bool = False
    _arrival: Any = None


class WorkerPool:
    """Workers shared by a fixed group of stations.

    A reassigned worker keeps counting for its origin until the origin's
    running processing step ends, then travels ``traversal_time`` and only
    counts for the target after arrival.
    """

    def __init__(self, id: str, stations: list[Station], n_workers: int,
                 performance_coefficient: float = 0.3, traversal_time: float = 0.0,
                 initial: Optional[list[str]] = None) -> None:
        if not stations:
            raise LayoutError(f"pool {id!r} has no stations")
        self.id = id
        self.stations = {s.id: s for s in stations}
        self.performance_coefficient = float(performance_coefficient)
        self.traversal_time = float(traversal_time)
        station_ids = list(self.stations)
        if initial is None:
            initial = [station_ids[i % len(station_ids)] for i in range(n_workers)]
        if len(initial) != n_workers:
            raise LayoutError(f"pool {id!r}: {len(initial)} initial assignments for {n_workers} workers")
        self.workers: list[Worker] = []
        for i, station_id in enumerate(initial):
            if station_id not in self.stations:
                raise LayoutError(f"pool {id!r} references unknown station {station_id!r}")
            self.workers.append(Worker(f"{id}_W{i}", self, station_id, station_id, self.traversal_time))
        for station in stations:
            station.pool = self
        self.engine: Optional[Engine] = None

    @property
    def station_ids(self) -> list[str]:
        return list(self.stations)

    def recount(self) -> None:
        for station in self.stations.values():
            station.n_workers = 0
        for worker in self.workers:
            if worker.location is not None:
                self.stations[worker.location].n_workers += 1

    @property
    def in_transit(self) -> int:
        return sum(1 for w in self.workers if w.location is None)

    def counts(self) -> dict[str, int]:
        return {sid: s.n_workers for sid, s in self.stations.items()}

    def reassign(self, worker: Worker, station_id: str) -> None:
        if station_id not in self.stations:
            raise AssignmentError(f"{station_id!r} is not eligible for pool {self.id!r}")
        if worker.assigned_station == station_id:
            return
        worker.assigned_station = station_id
        if worker.location is None:
            if worker._arrival is not None:
                worker._arrival.cancel()
            self._travel(worker)
        elif worker.location == station_id:
            worker.leaving = False
        elif self.stations[worker.location].processing_active:
            worker.leaving = True
        else:
            self._depart(worker)

    def task_complete(self, station: Station) -> None:
        for worker in self.workers:
            if worker.leaving and worker.location == station.id:
                self._depart(worker)

    def _depart(self, worker: Worker) -> None:
        worker.leaving = False
        self.stations[worker.location].n_workers -= 1
        worker.location = None
        self._travel(worker)

    def _travel(self, worker: Worker) -> None:
        def arrive() -> None:
            worker._arrival = None
            worker.location = worker.assigned_station
            self.stations[worker.location].n_workers += 1

        worker._arrival = self.engine.after(
            worker.traversal_time, worker.id, WORKER_ARRIVAL, arrive,
            {"station": worker.assigned_station},
        )


class Line:
    """Fixed topology plus runtime state of one simulated production line."""

    def __init__(self, seed: int = 0, log_events: bool = False) -> None:
        self.seed = int(seed)
        self.engine = Engine(log_events=log_events)
        self.stations: dict[str, Station] = {}
        self.buffers: dict[str, Buffer] = {}
        self.pools: dict[str, WorkerPool] = {}
        self.unobservable: set[tuple[str, str]] = set()
        self.parts_absorbed = 0
        self.parts_scrapped = 0
        self._next_part = 0
        self._next_carrier = 0
        self._streams: dict[str, RandomStream] = {}
        self.started = False

    # -- construction --------------------------------------------------------

    def stream(self, stream_id: str) -> RandomStream:
        if stream_id not in self._streams:
            self._streams[stream_id] = RandomStream(self.seed, stream_id)
        return self._streams[stream_id]

    def add(self, station: Station) -> Station:
        if self.started:
            raise LayoutError("topology is fixed once the line has started")
        if station.id in self.stations or station.id in self.buffers:
            raise LayoutError(f"duplicate id {station.id!r}")
        station.line = self
        station.engine = self.engine
        station.rng = self.stream(station.id)
        self.stations[station.id] = station
        return station

    def connect(self, upstream: str, downstream: str, capacity: int, traversal_time: float = 0.0,
                put_time: Any = None, get_time: Any = None, component: bool = False,
                id: Optional[str] = None) -> Buffer:
        if self.started:
            raise LayoutError("topology is fixed once the line has started")
        for sid in (upstream, downstream):
            if sid not in self.stations:
                raise LayoutError(f"buffer references unknown station {sid!r}")
        buffer_id = id or f"Buffer_{upstream}_to_{downstream}"
        if buffer_id in self.buffers or buffer_id in self.stations:
            raise LayoutError(f"duplicate id {buffer_id!r}")
        buffer = Buffer(buffer_id, self.stations[upstream], self.stations[downstream], capacity,
                        traversal_time, put_time, get_time, component)
        self.stations[upstream].out_buffers.append(buffer)
        self.stations[downstream].in_buffers.append(buffer)
        self.buffers[buffer_id] = buffer
        return buffer

    def add_pool(self, pool: WorkerPool) -> WorkerPool:
        if pool.id in self.pools:
            raise LayoutError(f"duplicate pool {pool.id!r}")
        pool.engine = self.engine
        self.pools[pool.id] = pool
        pool.recount()
        return pool

    def validate(self) -> None:
        if not any(isinstance(s, Sink) for s in self.stations.values()):
            raise LayoutError("no sink")
        for station in self.stations.values():
            n_in, n_out = len(station.in_buffers), len(station.out_buffers)
            if isinstance(station, Source):
                if n_out != 1 or n_in > 1:
                    raise LayoutError(f"source {station.id!r} needs exactly one output buffer")
            elif isinstance(station, Assembly):
                if not station.component_ins:
                    raise LayoutError(f"assembly {station.id!r} has no component input")
                mains = [b for b in station.in_buffers if not b.component]
                if len(mains) != 1 or n_out != 1:
                    raise LayoutError(f"assembly {station.id!r} needs one main input and one output")
            elif isinstance(station, Sink):
                if n_in != 1 or n_out > 1:
                    raise LayoutError(f"sink {station.id!r} needs exactly one input buffer")
            elif isinstance(station, Switch):
                if n_in < 1 or n_out < 1:
                    raise LayoutError(f"switch {station.id!r} needs inputs and outputs")
                if not (0 <= station.in_index < n_in and 0 <= station.out_index < n_out):
                    raise LayoutError(f"switch {station.id!r} index out of range")
            elif isinstance(station, Process):
                if n_in != 1 or n_out != 1:
                    raise LayoutError(f"process {station.id!r} needs one input and one output")
            elif isinstance(station, Magazine):
                if n_out != 1:
                    raise LayoutError(f"magazine {station.id!r} needs one output buffer")

    def topological_order(self) -> list[str]:
        """Stations upstream-first; declaration order breaks ties and cycles."""
        indegree = {sid: 0 for sid in self.stations}
        for buffer in self.buffers.values():
            indegree[buffer.downstream.id] += 1
        order: list[str] = []
        remaining = list(self.stations)
        while remaining:
            ready = [sid for sid in remaining if indegree[sid] == 0]
            pick = ready[0] if ready else remaining[0]
            remaining.remove(pick)
            order.append(pick)
            for buffer in self.stations[pick].out_buffers:
                indegree[buffer.downstream.id] -= 1
        return order

    def start(self) -> None:
        if self.started:
            return
        self.validate()
        self.started = True
        for sid in self.topological_order():
            self.stations[sid].start()

    # -- runtime ---------------------------------------------------------------

    @property
    def clock(self) -> float:
        return self.engine.clock

    def run_until(self, t_end: float) -> None:
        self.start()
        self.engine.run_until(t_end)

    def new_part(self, origin: str, created_at: float, assembly_condition: Optional[float]) -> Part:
        self._next_part += 1
        return Part(self._next_part, created_at, origin, assembly_condition)

    def new_carrier(self, capacity: int) -> Carrier:
        self._next_carrier += 1
        return Carrier(self._next_carrier, capacity)

    @property
    def parts_created(self) -> int:
        return sum(s.parts_created for s in self.stations.values() if isinstance(s, Source))

    def parts_in_flight(self) -> int:
        total = 0
        for buffer in self.buffers.values():
            total += sum(len(c.parts) for c, _ in buffer.queue)
        for station in self.stations.values():
            total += sum(len(c.parts) for c in station.held)
        return total

    @property
    def sinks(self) -> list[Sink]:
        return [s for s in self.stations.values() if isinstance(s, Sink)]

    @property
    def n_ok(self) -> int:
        return sum(s.n_ok for s in self.sinks)

    @property
    def n_nok(self) -> int:
        return sum(s.n_nok for s in self.stations.values())

    def n_ok_by_sink(self) -> dict[str, int]:
        return {s.id: s.n_ok for s in self.sinks}

    def n_nok_by_station(self) -> dict[str, int]:
        return {sid: s.n_nok for sid, s in self.stations.items()}

    def workers(self) -> list[Worker]:
        return [w for pool in self.pools.values() for w in pool.workers]


def detect_deadlock(line: Line) -> bool:
    """True when nothing but agent boundaries is scheduled and no station can move.

    A switch starving on one input while another input holds a carrier is not
    stuck (an index change would free it), so it does not count as deadlocked.
    """
    if not line.started or line.engine.pending():
        return False
    now = line.clock
    for station in line.stations.values():
        if station.suspended:
            return False
        if isinstance(station, Switch) and isinstance(station._pending, Get):
            if any(b.gettable(now) for b in station.in_buffers):
                return False
    return True
