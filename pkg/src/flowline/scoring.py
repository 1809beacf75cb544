"""Line value, per-step reward and OEE.

The value a line has produced up to time ``t`` is

    C(t) = (T_C / T_sim) * (c * n_ok(t) - w * sum_i c_i * n_nok(t, i))

with ``c = sum_i c_i``.  The prefactor uses the fixed horizon ``T_sim`` so
step rewards are pure count deltas and their sum telescopes to ``C(T_sim)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .line import Line, Sink, Station, Switch


@dataclass
class CostModel:
    station_costs: dict[str, float]
    T_C: float
    T_sim: float = 4000.0
    scrap_costs: Optional[dict[str, float]] = None

    def __post_init__(self) -> None:
        if self.T_C <= 0:
            raise ValueError("T_C must be positive")
        if self.T_sim <= 0:
            raise ValueError("T_sim must be positive")
        if any(c < 0 for c in self.station_costs.values()):
            raise ValueError("station costs must be non-negative")

    @property
    def part_value(self) -> float:
        return sum(self.station_costs.values())

    @property
    def scale(self) -> float:
        return self.T_C / self.T_sim

    def scrap_cost(self, station_id: str) -> float:
        """Cost lost when ``station_id`` scraps a part (defaults to its own c_i)."""
        if self.scrap_costs is not None and station_id in self.scrap_costs:
            return self.scrap_costs[station_id]
        return self.station_costs.get(station_id, 0.0)

    @classmethod
    def uniform(cls, line: Line, T_sim: float = 4000.0, T_C: Optional[float] = None) -> "CostModel":
        """Unit cost on every station that works on parts (switches and sinks only move them)."""
        costs = {sid: 1.0 for sid, s in line.stations.items() if not isinstance(s, (Switch, Sink))}
        if T_C is None:
            T_C = bottleneck_minimum(line)
        return cls(costs, T_C, T_sim)


def bottleneck_minimum(line: Line) -> float:
    """Largest minimal cycle time over all stations (fallback 1.0 for an all-zero line)."""
    worst = max((s.minimal_cycle_time() for s in line.stations.values()), default=0.0)
    return worst if worst > 0 else 1.0


@dataclass
class RewardLedger:
    cost_model: CostModel
    scrap_weight: float = 1.0
    n_ok: dict[str, int] = field(default_factory=dict)
    n_nok: dict[str, int] = field(default_factory=dict)
    history: list[float] = field(default_factory=list)

    def record(self, line: Line) -> float:
        """Sync counters with ``line`` and append C at the current boundary."""
        for sink in line.sinks:
            if sink.n_ok < self.n_ok.get(sink.id, 0):
                raise RuntimeError(f"OK counter of {sink.id!r} decreased")
            self.n_ok[sink.id] = sink.n_ok
        for sid, station in line.stations.items():
            if station.n_nok < self.n_nok.get(sid, 0):
                raise RuntimeError(f"NOK counter of {sid!r} decreased")
            self.n_nok[sid] = station.n_nok
        value = aggregate_value(self, self.cost_model, max(line.clock, 1e-12))
        self.history.append(value)
        return value

    @property
    def total_ok(self) -> int:
        return sum(self.n_ok.values())

    @property
    def total_nok(self) -> int:
        return sum(self.n_nok.values())


def aggregate_value(ledger: RewardLedger, cost_model: CostModel, t: float) -> float:
    if t <= 0:
        raise ValueError("t must be positive")
    scrap = sum(cost_model.scrap_cost(sid) * n for sid, n in ledger.n_nok.items() if n)
    return cost_model.scale * (cost_model.part_value * ledger.total_ok - ledger.scrap_weight * scrap)


def step_reward(ledger: RewardLedger, cost_model: CostModel, step: int) -> float:
    """Reward of step ``step``: C at boundary ``step + 1`` minus C at boundary ``step``."""
    if step + 1 >= len(ledger.history):
        raise IndexError(f"boundary {step + 1} not reached yet")
    return ledger.history[step + 1] - ledger.history[step]


def oee(station: Station, t: float) -> float:
    if t <= 0:
        raise ValueError("t must be positive")
    return station.minimal_cycle_time() * station.n_ok / t
