"""Analytic optima and scripted agents.

Agents are callables ``agent(obs, space) -> command``.  An agent whose
``every_step`` attribute is false is consulted once at reset and its
command is left in force for the whole episode.
"""

from __future__ import annotations

import math
import random
from collections import deque
from itertools import combinations
from typing import Iterator, Optional, Sequence

from .des import Distribution
from .observe import DISCRETE, LineSpace, Observation

Partition = tuple[int, ...]


# -- waiting time ---------------------------------------------------------------

def optimal_waiting_time(T_A: Distribution, T_g: Distribution, T_SC: Distribution) -> float:
    """Gap between component releases that matches the assembly's mean cycle."""
    return T_A.mean + 2 * T_g.mean - T_SC.mean


def expected_excess(a: float, s_a: float, b: float, s_b: float) -> float:
    """E[max(X, Y)] for independent X = a + Exp(s_a), Y = b + Exp(s_b)."""
    if a < b:
        a, s_a, b, s_b = b, s_b, a, s_a
    # X >= a > b: E[max] = E[X] + E[(Y - X)^+]
    d = a - b
    if s_b == 0:
        return a + s_a
    if s_a == 0:
        return a + s_b * math.exp(-d / s_b)
    alpha, beta = 1.0 / s_a, 1.0 / s_b
    return a + s_a + s_b * (alpha / (alpha + beta)) * math.exp(-d / s_b)


def expected_max_parts_wt(T_sim: float = 4000.0, T_A: Distribution = Distribution(20, 2),
                          T_g: Distribution = Distribution(1), T_p: Distribution = Distribution(0),
                          T_SC: Distribution = Distribution(5, 0.5),
                          T_SM: Distribution = Distribution(5, 0.5),
                          traversal_SC: float = 1.0, traversal_SM: float = 1.0,
                          traversal_AS: float = 1.0, T_S: Distribution = Distribution(1)) -> float:
    """Expected finished parts when the assembly never idles after ramp-up."""
    ramp_up = expected_excess(T_SC.minimum + T_p.minimum + traversal_SC, T_SC.exp_mean + T_p.exp_mean,
                              T_SM.minimum + T_p.minimum + traversal_SM, T_SM.exp_mean + T_p.exp_mean)
    numerator = T_sim - ramp_up - traversal_AS - T_g.mean - T_S.mean
    cycle = T_A.mean + 2 * T_g.mean + T_p.mean
    if cycle <= 0:
        raise ValueError("mean assembly cycle must be positive")
    return max(numerator, 0.0) / cycle


# -- part distribution -------------------------------------------------------------

def optimal_part_distribution(T: Sequence[float], S: Sequence[float], T_sim: float = 4000.0,
                              closed_form: bool = True) -> tuple[list[float], float]:
    """Shares per parallel process and expected total parts.

    ``S`` is relative: process i takes ``T_i + Exp(S_i * T_i)``.  The closed
    form for the shares needs equal ``S_i``; otherwise pass
    ``closed_form=False`` for the ratio of expected part counts.
    """
    if len(T) != len(S) or not T:
        raise ValueError("T and S must be non-empty and of equal length")
    counts = [T_sim / ((1 + s) * t) for t, s in zip(T, S)]
    total = sum(counts)
    if closed_form:
        if any(not math.isclose(s, S[0]) for s in S):
            raise ValueError("closed-form shares need equal S_i; use closed_form=False")
        shares = [1.0 / sum(t_i / t_j for t_j in T) for t_i in T]
    else:
        shares = [n / total for n in counts]
    return shares, total


# -- worker assignment ---------------------------------------------------------------

def compositions(N: int, k: int) -> Iterator[Partition]:
    """All k-tuples of non-negative integers summing to N, in lexicographic order."""
    if k <= 0:
        if N == 0:
            yield ()
        return
    # stars and bars: bar positions in increasing order give lexicographic tuples
    for bars in combinations(range(N + k - 1), k - 1):
        parts, previous = [], -1
        for bar in bars:
            parts.append(bar - previous - 1)
            previous = bar
        parts.append(N + k - 2 - previous)
        yield tuple(parts)


def assignment_objective(partition: Sequence[int], T: Sequence[float], S: Sequence[float],
                         c: float = 0.3) -> float:
    return max(t * math.exp(-c * n) + s * t for t, s, n in zip(T, S, partition))


def solve_worker_assignment(T: Sequence[float], S: Sequence[float], N: int,
                            c: float = 0.3) -> tuple[Partition, float]:
    """Exhaustive min-max split of N workers; ties go to the lexicographically smallest."""
    if not T or len(T) != len(S):
        raise ValueError("T and S must be non-empty and of equal length")
    if N < 0:
        raise ValueError("N must be non-negative")
    best: Optional[Partition] = None
    best_value = math.inf
    for split in compositions(N, len(T)):
        value = assignment_objective(split, T, S, c)
        if value < best_value:
            best, best_value = split, value
    return best, best_value


def enumerate_monotone_partitions(N: int, k: int) -> list[Partition]:
    """Weakly increasing compositions of N into k parts, lexicographic order."""
    out: list[Partition] = []

    def extend(prefix: list[int], remaining: int, slots: int, low: int) -> None:
        if slots == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        # the last slots must each hold at least the current value
        for value in range(low, remaining // slots + 1):
            extend(prefix + [value], remaining - value, slots - 1, value)

    if k > 0:
        extend([], N, k, 0)
    elif N == 0:
        out.append(())
    return out


# -- agents -----------------------------------------------------------------------------

class Agent:
    every_step = True

    def reset(self) -> None:
        pass

    def __call__(self, obs: Observation, space: LineSpace) -> dict:
        raise NotImplementedError


class NoOpAgent(Agent):
    every_step = False

    def __call__(self, obs, space):
        return {}


class StaticAgent(Agent):
    every_step = False

    def __init__(self, command: dict) -> None:
        self.command = command

    def __call__(self, obs, space):
        return self.command


def optimal_wt_agent(T_A: Distribution = Distribution(20, 2), T_g: Distribution = Distribution(1),
                     T_SC: Distribution = Distribution(5, 0.5), source: str = "S_C") -> StaticAgent:
    return StaticAgent({source: {"waiting_time": optimal_waiting_time(T_A, T_g, T_SC)}})


class RollingMeanAgent(Agent):
    """Waiting time from the mean of the last ``lookback`` assembly cycles."""

    def __init__(self, lookback: int = 1, T_g: Distribution = Distribution(1),
                 T_SC: Distribution = Distribution(5, 0.5), T_A: Distribution = Distribution(20, 2),
                 source: str = "S_C", assembly: str = "A") -> None:
        if lookback < 1:
            raise ValueError("lookback must be >= 1")
        self.lookback = lookback
        self.offset = 2 * T_g.mean - T_SC.mean
        self.static = optimal_waiting_time(T_A, T_g, T_SC)
        self.source = source
        self.key = f"{assembly}.processing_time"
        self.valid_key = f"{assembly}.processing_time_valid"
        self.reset()

    def reset(self) -> None:
        self.window: deque[float] = deque(maxlen=self.lookback)
        self._seen = None

    def __call__(self, obs, space):
        if obs[self.valid_key]:
            # a new finished cycle shows up as a changed duration
            value = obs[self.key]
            if value != self._seen:
                self._seen = value
                self.window.append(value)
        if not self.window:
            return {self.source: {"waiting_time": self.static}}
        value = sum(self.window) / len(self.window) + self.offset
        return {self.source: {"waiting_time": max(value, 0.0)}}


def _fills(obs: Observation, buffers: list[str]) -> list[float]:
    return [obs[f"{b}.fill"] for b in buffers]


def _argmin(values: list[float]) -> int:
    return min(range(len(values)), key=lambda i: (values[i], i))


def _argmax(values: list[float]) -> int:
    return min(range(len(values)), key=lambda i: (-values[i], i))


class GreedySwitchAgent(Agent):
    """Push to the emptiest output buffer, fetch from the fullest input."""

    def __call__(self, obs, space):
        cmd = {}
        for sid, ends in space.switches.items():
            entry = {}
            if len(ends["out"]) > 1:
                entry["index_buffer_out"] = _argmin(_fills(obs, ends["out"]))
            if len(ends["in"]) > 1:
                entry["index_buffer_in"] = _argmax(_fills(obs, ends["in"]))
            if entry:
                cmd[sid] = entry
        return cmd


class RoundRobinSwitchAgent(Agent):
    """Cycle every switch through its outputs (and inputs), one carrier each."""

    def reset(self) -> None:
        self._done: dict[str, int] = {}

    def __init__(self) -> None:
        self.reset()

    def __call__(self, obs, space):
        cmd = {}
        for sid, ends in space.switches.items():
            moved = int(obs[f"{sid}.n_ok"])
            entry = {}
            if len(ends["out"]) > 1:
                entry["index_buffer_out"] = moved % len(ends["out"])
            if len(ends["in"]) > 1:
                entry["index_buffer_in"] = moved % len(ends["in"])
            if entry:
                cmd[sid] = entry
        return cmd


class FixedRouteAgent(Agent):
    """Send every carrier of ``switch`` to output ``index``."""

    every_step = False

    def __init__(self, switch: str = "Switch", index: int = 0) -> None:
        self.switch = switch
        self.index = index

    def __call__(self, obs, space):
        return {self.switch: {"index_buffer_out": self.index}}


class RandomAgent(Agent):
    """Uniform random value for every actionable state at every step."""

    def __init__(self, seed: int = 0, numeric_high: float = 50.0) -> None:
        self.seed = seed
        self.numeric_high = numeric_high
        self.reset()

    def reset(self) -> None:
        self.rng = random.Random(f"{self.seed}:agent")

    def __call__(self, obs, space):
        cmd: dict[str, dict] = {}
        for desc in space.actions:
            if desc.kind == DISCRETE:
                value = self.rng.randrange(len(desc.labels))
            else:
                low = desc.low if desc.low is not None else 0.0
                high = desc.high if desc.high is not None else self.numeric_high
                value = self.rng.uniform(low, high)
            cmd.setdefault(desc.owner, {})[desc.name] = value
        return cmd


def assignment_command(space: LineSpace, pool: str, partition: Sequence[int]) -> dict:
    """Reassign the pool's workers so station i gets ``partition[i]`` of them."""
    stations = space.pools[pool]["stations"]
    workers = space.pools[pool]["workers"]
    if len(partition) != len(stations) or sum(partition) != len(workers):
        raise ValueError(f"partition {tuple(partition)} does not fit pool {pool!r}")
    targets = [sid for sid, n in zip(stations, partition) for _ in range(n)]
    return {w: {"assignment": sid} for w, sid in zip(workers, targets)}


class PartitionAgent(Agent):
    """Fixed worker split applied once at reset."""

    every_step = False

    def __init__(self, partition: Sequence[int], pool: str = "Pool") -> None:
        self.partition = tuple(partition)
        self.pool = pool

    def __call__(self, obs, space):
        return assignment_command(space, self.pool, self.partition)


class CLHeuristicAgent(Agent):
    """Route components to the emptiest assembly buffer, favouring later stages.

    Fills within one slot of the minimum count as tied and the latest such
    buffer wins.  Full buffers are skipped; when all are full the first
    assembly is chosen, since it is the only one that cannot starve.
    Workers and the source waiting time are set once and then left alone.
    """

    def __init__(self, waiting_time: float, partition: Sequence[int], switch: str = "Switch",
                 source: str = "S_comp", pool: str = "Pool") -> None:
        self.waiting_time = waiting_time
        self.partition = tuple(partition)
        self.switch = switch
        self.source = source
        self.pool = pool
        self.reset()

    def reset(self) -> None:
        self._initialized = False

    def __call__(self, obs, space):
        outs = space.switches[self.switch]["out"]
        slots = [round(obs[f"{b}.fill"] * space.buffers[b]) for b in outs]
        free = [i for i, b in enumerate(outs) if slots[i] < space.buffers[b]]
        if free:
            lowest = min(slots[i] for i in free)
            choice = max(i for i in free if slots[i] <= lowest + 1)
        else:
            # a put into a full buffer is binding; the first stage never starves on carriers
            choice = 0
        cmd: dict[str, dict] = {self.switch: {"index_buffer_out": choice}}
        if not self._initialized:
            self._initialized = True
            cmd[self.source] = {"waiting_time": self.waiting_time}
            cmd.update(assignment_command(space, self.pool, self.partition))
        return cmd


# grid_search_cl on CL(3), waiting 1..3 by 0.5, every split with n_i >= 1, seeds 0..2
CL_DEFAULTS: dict[int, tuple[float, Partition]] = {3: (2.0, (3, 3, 3))}
CL_DEFAULT_WAITING = 2.0


def cl_heuristic_agent(waiting_time: Optional[float] = None, worker_partition: Optional[Sequence[int]] = None,
                       k: int = 3, workers: Optional[int] = None) -> CLHeuristicAgent:
    workers = 3 * k if workers is None else workers
    default_wait, default_split = CL_DEFAULTS.get(k, (None, None))
    if worker_partition is None:
        if default_split is not None and sum(default_split) == workers:
            worker_partition = default_split
        else:
            base, extra = divmod(workers, k)
            worker_partition = [base] * (k - extra) + [base + 1] * extra
    if waiting_time is None:
        waiting_time = default_wait if default_wait is not None else CL_DEFAULT_WAITING
    return CLHeuristicAgent(waiting_time, worker_partition)


def grid_search_cl(spec, waiting_grid: Sequence[float], partitions: Sequence[Sequence[int]],
                   seeds: Sequence[int] = range(5)):
    """Evaluate every (waiting time, partition) pair; returns best params, best mean, full table."""
    from .env import LineEnv, run_episode

    if not waiting_grid or not partitions:
        raise ValueError("grids must be non-empty")
    table = []
    best = None
    for waiting in waiting_grid:
        for partition in partitions:
            rewards = []
            for seed in seeds:
                agent = CLHeuristicAgent(waiting, partition)
                rewards.append(run_episode(LineEnv(spec), agent, seed=seed).total_reward)
            mean = sum(rewards) / len(rewards)
            table.append(((waiting, tuple(partition)), mean))
            if best is None or mean > best[1]:
                best = ((waiting, tuple(partition)), mean)
    return best[0], best[1], table


# -- name registry ---------------------------------------------------------------------

AGENT_NAMES = ("optimal-wt", "rolling-mean", "greedy", "round-robin", "cl-heuristic",
               "first-assembly", "random", "none")


def make_agent(name: str, spec=None, seed: int = 0, lookback: int = 1) -> Agent:
    if name == "optimal-wt":
        return optimal_wt_agent()
    if name == "rolling-mean":
        return RollingMeanAgent(lookback)
    if name == "greedy":
        return GreedySwitchAgent()
    if name == "round-robin":
        return RoundRobinSwitchAgent()
    if name == "cl-heuristic":
        k = getattr(spec, "k", None) or 3
        return cl_heuristic_agent(k=k, workers=getattr(spec, "workers", None))
    if name == "first-assembly":
        return FixedRouteAgent("Switch", 0)
    if name == "random":
        return RandomAgent(seed)
    if name == "none":
        return NoOpAgent()
    raise ValueError(f"unknown agent {name!r}; expected one of {AGENT_NAMES}")
