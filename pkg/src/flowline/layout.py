"""Declarative layout documents: parse into a :class:`Line` and back.

A layout is a JSON-compatible tree::

    {"version": 1,
     "stations": [{"id": "S", "type": "source", "processing": {"minimum": 5, "exp_mean": 0.5}}, ...],
     "buffers":  [{"from": "S", "to": "A", "capacity": 2, "traversal_time": 1}, ...],
     "pools":    [{"id": "P", "stations": ["A"], "workers": 3}]}

The full JSON schema is ``LAYOUT_SCHEMA`` (also shipped as
``docs/layout.schema.json``).
"""

from __future__ import annotations

import copy
import json
from typing import Any

import jsonschema

from .des import Distribution
from .line import (
    STATION_TYPES,
    Assembly,
    LayoutError,
    Line,
    Magazine,
    Source,
    Switch,
    WorkerPool,
)

LAYOUT_VERSION = 1

_dist = {
    "oneOf": [
        {"type": "number", "minimum": 0},
        {
            "type": "object",
            "properties": {
                "minimum": {"type": "number", "minimum": 0},
                "exp_mean": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
    ]
}

LAYOUT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "production line layout",
    "type": "object",
    "required": ["version", "stations", "buffers"],
    "properties": {
        "version": {"const": LAYOUT_VERSION},
        "stations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "type"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "type": {"enum": sorted(STATION_TYPES)},
                    "processing": _dist,
                    "rework_probability": {"type": "number", "minimum": 0, "maximum": 1},
                    "on": {"type": "boolean"},
                    "actionable_on": {"type": "boolean"},
                    "waiting_time": {"type": "number", "minimum": 0},
                    "actionable_waiting_time": {"type": "boolean"},
                    "part_specs": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {"assembly_condition": {"type": ["number", "null"]}},
                        },
                    },
                    "carrier_capacity": {"type": "integer", "minimum": 1},
                    "nok_error_time": {"type": "number", "minimum": 0},
                    "in_index": {"type": "integer", "minimum": 0},
                    "out_index": {"type": "integer", "minimum": 0},
                    "n_carriers": {"type": "integer", "minimum": 0},
                    "jump": {
                        "type": ["object", "null"],
                        "required": ["trigger", "length", "factor"],
                        "properties": {
                            "trigger": {"type": "number"},
                            "length": {"type": "number", "minimum": 0},
                            "factor": {"type": "number", "minimum": 0},
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "buffers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to", "capacity"],
                "properties": {
                    "id": {"type": "string"},
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "capacity": {"type": "integer", "minimum": 1},
                    "traversal_time": {"type": "number", "minimum": 0},
                    "put_time": _dist,
                    "get_time": _dist,
                    "component": {"type": "boolean"},
                },
                "additionalProperties": False,
            },
        },
        "pools": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "stations", "workers"],
                "properties": {
                    "id": {"type": "string"},
                    "stations": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "workers": {"type": "integer", "minimum": 0},
                    "performance_coefficient": {"type": "number", "minimum": 0},
                    "traversal_time": {"type": "number", "minimum": 0},
                    "initial": {"type": "array", "items": {"type": "string"}},
                },
                "additionalProperties": False,
            },
        },
        "unobservable": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
    },
    "additionalProperties": False,
}

_STATION_KEYS = {
    "source": ("waiting_time", "actionable_waiting_time", "part_specs", "carrier_capacity"),
    "assembly": ("nok_error_time",),
    "switch": ("in_index", "out_index"),
    "magazine": ("n_carriers", "carrier_capacity"),
    "process": (),
    "sink": (),
}


def build_layout(spec: dict, seed: int = 0, log_events: bool = False) -> Line:
    """Validate ``spec`` and build a runnable line (buffers empty, clock 0)."""
    if not isinstance(spec, dict) or not spec.get("stations"):
        raise LayoutError("no sink")
    try:
        jsonschema.validate(spec, LAYOUT_SCHEMA)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path)
        raise LayoutError(f"invalid layout at {path or '<root>'}: {err.message}") from None

    line = Line(seed=seed, log_events=log_events)
    for entry in spec["stations"]:
        kind = entry["type"]
        kwargs = {key: entry[key] for key in _STATION_KEYS[kind] if key in entry}
        for key in ("rework_probability", "on", "actionable_on"):
            if key in entry:
                kwargs[key] = entry[key]
        station = STATION_TYPES[kind](entry["id"], Distribution.coerce(entry.get("processing")), **kwargs)
        station.jump = copy.deepcopy(entry.get("jump"))
        line.add(station)

    for entry in spec["buffers"]:
        for end in ("from", "to"):
            if entry[end] not in line.stations:
                raise LayoutError(f"dangling buffer reference {entry[end]!r}")
        line.connect(entry["from"], entry["to"], entry["capacity"],
                     entry.get("traversal_time", 0.0), entry.get("put_time"),
                     entry.get("get_time"), entry.get("component", False), entry.get("id"))

    for entry in spec.get("pools", []):
        members = []
        for sid in entry["stations"]:
            if sid not in line.stations:
                raise LayoutError(f"worker pool {entry['id']!r} references unknown station {sid!r}")
            members.append(line.stations[sid])
        line.add_pool(WorkerPool(entry["id"], members, entry["workers"],
                                 entry.get("performance_coefficient", 0.3),
                                 entry.get("traversal_time", 0.0), entry.get("initial")))

    line.unobservable = {tuple(pair) for pair in spec.get("unobservable", [])}
    line.validate()
    return line


def to_layout(line: Line) -> dict:
    """Describe the topology and parameters of ``line`` as a layout document."""
    stations = []
    for station in line.stations.values():
        entry: dict[str, Any] = {
            "id": station.id,
            "type": station.kind,
            "processing": station.processing.to_dict(),
        }
        if station.rework_probability:
            entry["rework_probability"] = station.rework_probability
        if not station.on:
            entry["on"] = False
        if station.actionable_on:
            entry["actionable_on"] = True
        if isinstance(station, Source):
            entry.update(waiting_time=station.waiting_time,
                         actionable_waiting_time=station.actionable_waiting_time,
                         part_specs=copy.deepcopy(station.part_specs),
                         carrier_capacity=station.carrier_capacity)
        elif isinstance(station, Assembly):
            entry["nok_error_time"] = station.nok_error_time
        elif isinstance(station, Switch):
            entry.update(in_index=station.in_index, out_index=station.out_index)
        elif isinstance(station, Magazine):
            entry.update(n_carriers=station.n_carriers, carrier_capacity=station.carrier_capacity)
        if station.jump:
            entry["jump"] = dict(station.jump)
        stations.append(entry)

    buffers = []
    for buffer in line.buffers.values():
        buffers.append({
            "id": buffer.id,
            "from": buffer.upstream.id,
            "to": buffer.downstream.id,
            "capacity": buffer.capacity,
            "traversal_time": buffer.traversal_time,
            "put_time": buffer.put_time.to_dict(),
            "get_time": buffer.get_time.to_dict(),
            "component": buffer.component,
        })

    pools = []
    for pool in line.pools.values():
        pools.append({
            "id": pool.id,
            "stations": pool.station_ids,
            "workers": len(pool.workers),
            "performance_coefficient": pool.performance_coefficient,
            "traversal_time": pool.traversal_time,
            "initial": [w.assigned_station for w in pool.workers],
        })

    doc = {"version": LAYOUT_VERSION, "stations": stations, "buffers": buffers, "pools": pools}
    if line.unobservable:
        doc["unobservable"] = [list(pair) for pair in sorted(line.unobservable)]
    return doc


def dumps(line: Line) -> str:
    return json.dumps(to_layout(line), indent=2, sort_keys=True)


def loads(text: str, seed: int = 0) -> Line:
    return build_layout(json.loads(text), seed=seed)
