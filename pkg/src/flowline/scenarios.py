"""Factories for the five benchmark lines.

``WT``   two sources feeding one assembly under an assembly condition.
``WTJ``  WT with a temporary slowdown of the assembly.
``PD``   a switch distributing parts over k parallel processes.
``WA``   k sequential processes sharing a pool of N workers.
``CL``   a component source routed by a switch to k chained assemblies.

Each factory returns a layout document; :class:`ScenarioSpec` turns it into
a :class:`Scenario` (line, cost model, episode horizon) for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .des import Distribution, RandomStream
from .layout import build_layout
from .line import Line
from .scoring import CostModel

VARIANTS = ("WT", "WTJ", "PD", "WA", "CL")

TRIGGER_RANGE = (500.0, 1500.0)
LENGTH_RANGE = (1600.0, 2000.0)

# WT / WTJ station laws
WT_ASSEMBLY = Distribution(20.0, 2.0)
WT_SOURCE = Distribution(5.0, 0.5)
WT_ASSEMBLY_CONDITION = 35.0
WT_GET_TIME = 1.0
WT_PUT_TIME = 0.0
WT_TRAVERSAL = 1.0
WT_SINK = 1.0


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class JumpProfile:
    trigger: float
    length: float
    factor: float

    @property
    def window(self) -> tuple[float, float]:
        return (self.trigger, self.trigger + self.length)

    def active(self, t: float) -> bool:
        low, high = self.window
        return low <= t <= high

    def to_dict(self) -> dict:
        return {"trigger": self.trigger, "length": self.length, "factor": self.factor}


def jump_factor(T_jump: float, R: float, T: float, S: float, E: float, T_sim: float = 4000.0) -> float:
    """Slowdown factor that cuts the expected part count to ``R`` times its normal value."""
    denominator = (R - 1.0) * T_sim + T_jump
    if denominator <= 0:
        raise ScenarioError(f"jump window {T_jump} too short to reach R={R} within {T_sim}")
    return (T_jump * (T + S + E) / denominator - S - E) / T


def sample_jump(stream: RandomStream, R: float, T: float, S: float, E: float,
                T_sim: float = 4000.0) -> JumpProfile:
    trigger = stream.uniform(*TRIGGER_RANGE)
    low, high = LENGTH_RANGE
    # below R = 0.6 the short end of the range cannot absorb the lost output
    shortest = (1.0 - R) * T_sim
    if shortest >= low:
        low = shortest + 1.0
        if low >= high:
            raise ScenarioError(f"no jump length in {LENGTH_RANGE} reaches R={R} within {T_sim}")
    length = stream.uniform(low, high)
    return JumpProfile(trigger, length, jump_factor(length, R, T, S, E, T_sim))


def jumped_processing_time(profile: Optional[JumpProfile], t: float,
                           base: Distribution = WT_ASSEMBLY) -> Distribution:
    if profile is not None and profile.active(t):
        return base.scaled(profile.factor)
    return base


# -- layout documents ---------------------------------------------------------

def _buffer(src: str, dst: str, capacity: int, traversal: float = 0.0, get_time: float = 0.0,
            put_time: float = 0.0, component: bool = False) -> dict:
    entry = {"from": src, "to": dst, "capacity": capacity, "traversal_time": traversal,
             "get_time": get_time, "put_time": put_time}
    if component:
        entry["component"] = True
    return entry


def wt_layout(waiting_time: float = 0.0, assembly_condition: Optional[float] = WT_ASSEMBLY_CONDITION,
              assembly: Distribution = WT_ASSEMBLY, source: Distribution = WT_SOURCE,
              get_time: float = WT_GET_TIME, traversal: float = WT_TRAVERSAL,
              nok_error_time: float = 5.0, jump: Optional[JumpProfile] = None) -> dict:
    stations = [
        {"id": "S_M", "type": "source", "processing": source.to_dict()},
        {"id": "S_C", "type": "source", "processing": source.to_dict(),
         "waiting_time": waiting_time, "actionable_waiting_time": True,
         "part_specs": [{"assembly_condition": assembly_condition}]},
        {"id": "A", "type": "assembly", "processing": assembly.to_dict(),
         "nok_error_time": nok_error_time},
        {"id": "Sink", "type": "sink", "processing": WT_SINK},
    ]
    if jump is not None:
        stations[2]["jump"] = jump.to_dict()
    buffers = [
        _buffer("S_M", "A", 3, traversal, get_time, WT_PUT_TIME),
        _buffer("S_C", "A", 2, traversal, get_time, WT_PUT_TIME, component=True),
        _buffer("A", "Sink", 3, traversal, get_time, WT_PUT_TIME),
    ]
    return {"version": 1, "stations": stations, "buffers": buffers}


def pd_minima(k: int) -> list[float]:
    return [10.0 * (i + 1) for i in range(1, k + 1)]


def pd_layout(k: int, exp_mean: float = 0.1, capacity: int = 2) -> dict:
    stations: list[dict] = [
        {"id": "Source", "type": "source", "processing": 1.0},
        {"id": "Switch_in", "type": "switch", "processing": 1.0},
    ]
    buffers = [_buffer("Source", "Switch_in", capacity)]
    for i, minimum in enumerate(pd_minima(k), start=1):
        stations.append({"id": f"P{i}", "type": "process",
                         "processing": {"minimum": minimum, "exp_mean": exp_mean}})
        buffers.append(_buffer("Switch_in", f"P{i}", capacity))
    stations.append({"id": "Switch_out", "type": "switch", "processing": 1.0})
    for i in range(1, k + 1):
        buffers.append(_buffer(f"P{i}", "Switch_out", capacity))
    stations.append({"id": "Sink", "type": "sink", "processing": 0.0})
    buffers.append(_buffer("Switch_out", "Sink", capacity))
    return {"version": 1, "stations": stations, "buffers": buffers}


def wa_minima(k: int) -> list[float]:
    return [16.0 + 4.0 * i for i in range(1, k + 1)]


WA_NOISE = 0.1


def wa_layout(k: int, workers: Optional[int] = None, coefficient: float = 0.3,
              noise: float = WA_NOISE, worker_traversal: float = 1.0, capacity: int = 2,
              initial: Optional[list[int]] = None) -> dict:
    workers = 3 * k if workers is None else workers
    stations: list[dict] = [{"id": "Source", "type": "source", "processing": 1.0}]
    buffers = []
    previous = "Source"
    for i, minimum in enumerate(wa_minima(k), start=1):
        # noise is relative: the exponential part has mean noise * minimum
        stations.append({"id": f"P{i}", "type": "process",
                         "processing": {"minimum": minimum, "exp_mean": noise * minimum}})
        buffers.append(_buffer(previous, f"P{i}", capacity))
        previous = f"P{i}"
    stations.append({"id": "Sink", "type": "sink", "processing": 0.0})
    buffers.append(_buffer(previous, "Sink", capacity))
    members = [f"P{i}" for i in range(1, k + 1)]
    pool = {"id": "Pool", "stations": members, "workers": workers,
            "performance_coefficient": coefficient, "traversal_time": worker_traversal}
    if initial is not None:
        pool["initial"] = partition_assignment(members, initial)
    return {"version": 1, "stations": stations, "buffers": buffers, "pools": [pool]}


def partition_assignment(stations: list[str], partition: list[int]) -> list[str]:
    """Worker-by-worker station list realizing ``partition`` (first n_1 workers to station 1, ...)."""
    if len(partition) != len(stations):
        raise ScenarioError(f"partition {partition} does not match {len(stations)} stations")
    return [sid for sid, n in zip(stations, partition) for _ in range(n)]


CL_ASSEMBLY = Distribution(20.0, 2.0)
CL_ASSEMBLY_CONDITION = 35.0


def cl_layout(k: int, workers: Optional[int] = None, waiting_time: float = 0.0,
              assembly: Distribution = CL_ASSEMBLY,
              assembly_condition: Optional[float] = CL_ASSEMBLY_CONDITION,
              coefficient: float = 0.3, worker_traversal: float = 1.0,
              nok_error_time: float = 5.0) -> dict:
    workers = 3 * k if workers is None else workers
    assemblies = [f"A{i}" for i in range(1, k + 1)]
    stations: list[dict] = [
        {"id": "S_main", "type": "source", "processing": 1.0},
        {"id": "S_comp", "type": "source", "processing": {"minimum": 1.0, "exp_mean": 0.1},
         "waiting_time": waiting_time, "actionable_waiting_time": True,
         "part_specs": [{"assembly_condition": assembly_condition}]},
        {"id": "Switch", "type": "switch", "processing": 1.0},
    ]
    buffers = [_buffer("S_comp", "Switch", 2, 1.0)]
    previous = "S_main"
    for sid in assemblies:
        stations.append({"id": sid, "type": "assembly", "processing": assembly.to_dict(),
                         "nok_error_time": nok_error_time})
        buffers.append(_buffer(previous, sid, 2, 1.0))
        buffers.append(_buffer("Switch", sid, 2, 1.0, component=True))
        previous = sid
    stations.append({"id": "Sink", "type": "sink", "processing": 1.0})
    buffers.append(_buffer(previous, "Sink", 2, 1.0))
    pool = {"id": "Pool", "stations": assemblies, "workers": workers,
            "performance_coefficient": coefficient, "traversal_time": worker_traversal}
    return {"version": 1, "stations": stations, "buffers": buffers, "pools": [pool]}


# -- scenario objects ----------------------------------------------------------

@dataclass
class Scenario:
    name: str
    line: Line
    cost_model: CostModel
    T_sim: float
    T_step: float
    scrap_weight: float = 1.0
    jump: Optional[JumpProfile] = None
    params: dict = field(default_factory=dict)


@dataclass
class ScenarioSpec:
    variant: str
    k: Optional[int] = None
    workers: Optional[int] = None
    R: float = 0.75
    T_sim: float = 4000.0
    T_step: float = 1.0
    overrides: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        variant = self.variant.upper()
        if variant not in VARIANTS:
            raise ScenarioError(f"unknown scenario {self.variant!r}; expected one of {VARIANTS}")
        self.variant = variant
        if variant in ("PD", "WA", "CL"):
            if self.k is None:
                self.k = 3
            if self.k < 2:
                raise ScenarioError(f"{variant} needs k >= 2, got {self.k}")
        if variant in ("WA", "CL"):
            if self.workers is None:
                self.workers = 3 * self.k
            if self.workers < 0:
                raise ScenarioError("worker count must be non-negative")
        if variant == "WTJ" and not 0.5 < self.R < 1.0:
            raise ScenarioError(f"WTJ needs 0.5 < R < 1, got {self.R}")
        if self.T_sim <= 0 or self.T_step <= 0:
            raise ScenarioError("T_sim and T_step must be positive")

    @property
    def name(self) -> str:
        if self.variant == "WTJ":
            return f"WTJ_{self.R:g}"
        if self.variant == "WA":
            return f"WA_{self.k},{self.workers}"
        if self.variant in ("PD", "CL"):
            return f"{self.variant}_{self.k}"
        return self.variant

    def layout(self, seed: int = 0) -> tuple[dict, Optional[JumpProfile]]:
        opts = dict(self.overrides)
        if self.variant == "WT":
            return wt_layout(**opts), None
        if self.variant == "WTJ":
            base = opts.get("assembly", WT_ASSEMBLY)
            E = 2 * opts.get("get_time", WT_GET_TIME) + WT_PUT_TIME
            jump = sample_jump(RandomStream(seed, "scenario"), self.R, base.minimum,
                               base.exp_mean, E, self.T_sim)
            return wt_layout(jump=jump, **opts), jump
        if self.variant == "PD":
            return pd_layout(self.k, **opts), None
        if self.variant == "WA":
            return wa_layout(self.k, self.workers, **opts), None
        return cl_layout(self.k, self.workers, **opts), None

    def build(self, seed: int = 0, log_events: bool = False) -> Scenario:
        doc, jump = self.layout(seed)
        line = build_layout(doc, seed=seed, log_events=log_events)
        cost, weight = self._costs(line)
        return Scenario(self.name, line, cost, self.T_sim, self.T_step, weight, jump,
                        {"variant": self.variant, "k": self.k, "workers": self.workers,
                         "R": self.R, "seed": seed})

    def _costs(self, line: Line) -> tuple[CostModel, float]:
        T_sim = self.T_sim
        if self.variant in ("WT", "WTJ"):
            a = self.overrides.get("assembly", WT_ASSEMBLY)
            T_C = a.mean + 2 * self.overrides.get("get_time", WT_GET_TIME) + WT_PUT_TIME
            return CostModel({"S_M": 1.0, "S_C": 1.0}, T_C, T_sim, scrap_costs={"A": 1.0}), 1.0
        if self.variant == "PD":
            rate = sum(1.0 / (m + self.overrides.get("exp_mean", 0.1)) for m in pd_minima(self.k))
            return CostModel({"Source": 1.0}, 1.0 / rate, T_sim), 1.0
        if self.variant == "WA":
            pool = line.pools["Pool"]
            c = pool.performance_coefficient
            noise = self.overrides.get("noise", WA_NOISE)
            minima = wa_minima(self.k)
            best = min_max_cycle(minima, [noise * m for m in minima], self.workers, c)
            return CostModel({"Source": 1.0}, best, T_sim), 1.0
        costs = {"S_main": 1.0}
        costs.update({f"A{i}": 1.0 for i in range(1, self.k + 1)})
        a = self.overrides.get("assembly", CL_ASSEMBLY)
        c = line.pools["Pool"].performance_coefficient
        per_station = self.workers / self.k
        T_C = a.minimum * math.exp(-c * per_station) + a.exp_mean
        return CostModel(costs, T_C, T_sim), 1.0 / self.k


def min_max_cycle(minima: list[float], exp_means: list[float], N: int, c: float) -> float:
    """Smallest achievable bottleneck mean cycle over all ways to split N workers."""
    from .baselines import compositions

    best = math.inf
    for split in compositions(N, len(minima)):
        worst = max(m * math.exp(-c * n) + e for m, e, n in zip(minima, exp_means, split))
        best = min(best, worst)
    return best


def make_wt(**overrides) -> ScenarioSpec:
    return ScenarioSpec("WT", overrides=overrides)


def make_wtj(R: float = 0.75, **overrides) -> ScenarioSpec:
    return ScenarioSpec("WTJ", R=R, overrides=overrides)


def make_pd(k: int = 3, **overrides) -> ScenarioSpec:
    return ScenarioSpec("PD", k=k, overrides=overrides)


def make_wa(k: int = 3, N: Optional[int] = None, T_sim: float = 4000.0, **overrides) -> ScenarioSpec:
    return ScenarioSpec("WA", k=k, workers=N, T_sim=T_sim, overrides=overrides)


def make_cl(k: int = 3, N: Optional[int] = None, **overrides) -> ScenarioSpec:
    return ScenarioSpec("CL", k=k, workers=N, overrides=overrides)
