"""Named observation vectors and validated action commands.

Descriptor order is stable: stations in topological order, then buffers,
then workers; within one object states are sorted by name.  Discrete
states are label-encoded in catalog order.  ``processing_time`` is lagged
(last finished cycle) and reads 0 until ``processing_time_valid`` flips.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional

import numpy as np

from .line import MODES, Line, Source, Station, Switch

DISCRETE = "discrete"
COUNT = "count"
NUMERIC = "numeric"

ON_LABELS = ("off", "on")
FLAG_LABELS = ("no", "yes")


class ActionError(ValueError):
    """Base class for rejected action entries; ``entry`` is ``(owner, name, value)``."""

    def __init__(self, message: str, entry: tuple) -> None:
        super().__init__(message)
        self.entry = entry


class UnknownStateError(ActionError):
    pass


class NotActionableError(ActionError):
    pass


class ActionRangeError(ActionError):
    pass


@dataclass(frozen=True)
class StateDescriptor:
    owner: str
    name: str
    kind: str
    labels: tuple = ()
    low: Optional[float] = None
    high: Optional[float] = None
    observable: bool = True
    actionable: bool = False

    @property
    def key(self) -> str:
        return f"{self.owner}.{self.name}"

    def coerce(self, value: Any) -> Any:
        """Validate an action value; returns the decoded value or raises."""
        entry = (self.owner, self.name, value)
        if self.kind == DISCRETE:
            if isinstance(value, str):
                if value not in self.labels:
                    raise ActionRangeError(f"{self.key}: {value!r} not in {self.labels}", entry)
                return self.labels.index(value)
            if isinstance(value, bool):
                value = int(value)
            try:
                index = operator.index(value)
            except TypeError:
                if isinstance(value, float) and value.is_integer():
                    index = int(value)
                else:
                    raise ActionRangeError(f"{self.key}: {value!r} is not a label index", entry) from None
            if not 0 <= index < len(self.labels):
                raise ActionRangeError(
                    f"{self.key}: index {index} outside 0..{len(self.labels) - 1}", entry)
            return index
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ActionRangeError(f"{self.key}: {value!r} is not numeric", entry) from None
        if math.isnan(number) or (self.low is not None and number < self.low) \
                or (self.high is not None and number > self.high):
            raise ActionRangeError(f"{self.key}: {number} outside [{self.low}, {self.high}]", entry)
        return number


@dataclass(frozen=True)
class Observation:
    values: np.ndarray
    names: tuple
    timestamp: float

    def __len__(self) -> int:
        return len(self.names)

    def __getitem__(self, key: str) -> float:
        return float(self.values[self.names.index(key)])

    def get(self, key: str, default: Optional[float] = None) -> Optional[float]:
        try:
            return self[key]
        except ValueError:
            return default

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


@dataclass
class LineSpace:
    """Descriptor lists plus the topology facts scripted agents need."""

    observations: list[StateDescriptor]
    actions: list[StateDescriptor]
    switches: dict[str, dict[str, list[str]]] = field(default_factory=dict)
    pools: dict[str, dict[str, list[str]]] = field(default_factory=dict)
    buffers: dict[str, int] = field(default_factory=dict)
    stations: list[str] = field(default_factory=list)

    def __iter__(self) -> Iterator[list[StateDescriptor]]:
        yield self.observations
        yield self.actions

    def action(self, owner: str, name: str) -> StateDescriptor:
        for desc in self.actions:
            if desc.owner == owner and desc.name == name:
                return desc
        raise KeyError(f"{owner}.{name}")


def _station_states(station: Station) -> list[tuple[StateDescriptor, Callable[[], float]]]:
    sid = station.id
    states = [
        (StateDescriptor(sid, "mode", DISCRETE, MODES), lambda: MODES.index(station.mode)),
        (StateDescriptor(sid, "on", DISCRETE, ON_LABELS, actionable=station.actionable_on),
         lambda: 1.0 if station.on else 0.0),
        (StateDescriptor(sid, "n_ok", COUNT, low=0), lambda: station.n_ok),
        (StateDescriptor(sid, "processing_time", NUMERIC, low=0.0),
         lambda: station.last_processing_time),
        (StateDescriptor(sid, "processing_time_valid", DISCRETE, FLAG_LABELS),
         lambda: 1.0 if station.processing_valid else 0.0),
    ]
    if not isinstance(station, Switch):
        states.append((StateDescriptor(sid, "n_nok", COUNT, low=0), lambda: station.n_nok))
    if station.pool is not None:
        states.append((StateDescriptor(sid, "n_workers", COUNT, low=0), lambda: station.n_workers))
    if isinstance(station, Source):
        states.append((StateDescriptor(sid, "waiting_time", NUMERIC, low=0.0,
                                       actionable=station.actionable_waiting_time),
                       lambda: station.waiting_time))
    if isinstance(station, Switch):
        states.append((StateDescriptor(sid, "index_buffer_in", DISCRETE,
                                       tuple(b.id for b in station.in_buffers), actionable=True),
                       lambda: station.in_index))
        states.append((StateDescriptor(sid, "index_buffer_out", DISCRETE,
                                       tuple(b.id for b in station.out_buffers), actionable=True),
                       lambda: station.out_index))
    return sorted(states, key=lambda item: item[0].name)


def _catalog(line: Line) -> list[tuple[StateDescriptor, Callable[[], float]]]:
    catalog = []
    order = line.topological_order()
    for sid in order:
        catalog.extend(_station_states(line.stations[sid]))
    rank = {sid: i for i, sid in enumerate(order)}
    buffers = sorted(line.buffers.values(), key=lambda b: rank[b.upstream.id])
    for buffer in buffers:
        catalog.append((StateDescriptor(buffer.id, "fill", NUMERIC, low=0.0, high=1.0),
                        (lambda b=buffer: b.fill)))
    for pool in line.pools.values():
        labels = tuple(pool.station_ids)
        for worker in pool.workers:
            catalog.append((StateDescriptor(worker.id, "assignment", DISCRETE, labels, actionable=True),
                            (lambda w=worker: labels.index(w.assigned_station))))
    masked = line.unobservable
    if masked:
        catalog = [
            (StateDescriptor(d.owner, d.name, d.kind, d.labels, d.low, d.high,
                             (d.owner, d.name) not in masked, d.actionable), getter)
            for d, getter in catalog
        ]
    return catalog


class _Plan:
    def __init__(self, line: Line) -> None:
        catalog = _catalog(line)
        self.descriptors = [d for d, _ in catalog]
        visible = [(d, g) for d, g in catalog if d.observable]
        self.names = tuple(d.key for d, _ in visible)
        self.getters = [g for _, g in visible]
        self.by_key = {(d.owner, d.name): d for d in self.descriptors}


def _plan(line: Line) -> _Plan:
    plan = getattr(line, "_observation_plan", None)
    if plan is None:
        plan = _Plan(line)
        line._observation_plan = plan
    return plan


def space_descriptors(line: Line) -> LineSpace:
    plan = _plan(line)
    switches = {
        s.id: {"in": [b.id for b in s.in_buffers], "out": [b.id for b in s.out_buffers]}
        for s in line.stations.values() if isinstance(s, Switch)
    }
    pools = {
        p.id: {"stations": p.station_ids, "workers": [w.id for w in p.workers]}
        for p in line.pools.values()
    }
    return LineSpace(
        observations=[d for d in plan.descriptors if d.observable],
        actions=[d for d in plan.descriptors if d.actionable],
        switches=switches,
        pools=pools,
        buffers={b.id: b.capacity for b in line.buffers.values()},
        stations=line.topological_order(),
    )


def snapshot(line: Line) -> Observation:
    plan = _plan(line)
    values = np.fromiter((g() for g in plan.getters), dtype=np.float64, count=len(plan.getters))
    return Observation(values, plan.names, line.clock)


def validate(line: Line, cmd: dict) -> list[tuple[StateDescriptor, Any]]:
    """Check every entry of ``cmd``; returns decoded ``(descriptor, value)`` pairs."""
    plan = _plan(line)
    decoded = []
    for owner, updates in (cmd or {}).items():
        if not isinstance(updates, dict):
            raise UnknownStateError(f"{owner!r}: expected a mapping of state names", (owner, None, updates))
        for name, value in updates.items():
            desc = plan.by_key.get((owner, name))
            if desc is None:
                raise UnknownStateError(f"unknown state {owner}.{name}", (owner, name, value))
            if not desc.actionable:
                raise NotActionableError(f"{owner}.{name} is not actionable", (owner, name, value))
            decoded.append((desc, desc.coerce(value)))
    return decoded


def apply(line: Line, cmd: dict) -> None:
    """Validate the whole command first, then write every entry."""
    for desc, value in validate(line, cmd):
        owner, name = desc.owner, desc.name
        if name == "waiting_time":
            line.stations[owner].waiting_time = value
        elif name == "index_buffer_in":
            line.stations[owner].set_in_index(value)
        elif name == "index_buffer_out":
            line.stations[owner].set_out_index(value)
        elif name == "on":
            line.stations[owner].set_on(bool(value))
        elif name == "assignment":
            worker = next(w for w in line.workers() if w.id == owner)
            worker.pool.reassign(worker, desc.labels[value])
        else:  # pragma: no cover - catalog and writer out of sync
            raise NotActionableError(f"no writer for {owner}.{name}", (owner, name, value))
