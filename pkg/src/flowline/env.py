"""Episodic environment on a fixed agent step grid.

One episode covers ``T_sim`` time units in ``T_sim / T_step`` steps.  At
each boundary the command is applied first, then the engine advances one
step and the ledger records the line value; the step reward is the change
of that value, so the rewards of an episode sum to the final value.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .des import AGENT_BOUNDARY
from .line import detect_deadlock
from .observe import Observation, apply, snapshot, space_descriptors
from .scenarios import Scenario, ScenarioSpec
from .scoring import RewardLedger

AgentFactory = Callable[[int], Callable]


class EpisodeDone(RuntimeError):
    pass


@dataclass(frozen=True)
class EpisodeConfig:
    T_sim: float = 4000.0
    T_step: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.T_sim <= 0 or self.T_step <= 0:
            raise ValueError("T_sim and T_step must be positive")
        ratio = self.T_sim / self.T_step
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"T_sim / T_step = {ratio} is not an integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.T_sim / self.T_step))


@dataclass
class EpisodeResult:
    scenario: str
    seed: int
    episode: int
    total_reward: float
    n_ok: int
    n_nok: dict[str, int]
    step_rewards: list[float]
    deadlocked: bool
    deadlocked_at: Optional[float] = None
    wall_time: float = 0.0
    station_ok: dict[str, int] = field(default_factory=dict)
    parts_created: int = 0

    @property
    def n_nok_total(self) -> int:
        return sum(self.n_nok.values())

    def key(self) -> tuple:
        """Everything but wall time, for comparing runs."""
        return (self.scenario, self.seed, self.episode, self.total_reward, self.n_ok,
                tuple(sorted(self.n_nok.items())), tuple(self.step_rewards), self.deadlocked,
                self.deadlocked_at, tuple(sorted(self.station_ok.items())), self.parts_created)


class LineEnv:
    """reset/step wrapper around a scenario's line."""

    def __init__(self, spec: ScenarioSpec, log_events: bool = False, scrap_weight: Optional[float] = None) -> None:
        self.spec = spec
        self.log_events = log_events
        self.scrap_weight = scrap_weight
        self.scenario: Optional[Scenario] = None
        self.config: Optional[EpisodeConfig] = None

    @property
    def line(self):
        return self.scenario.line

    def reset(self, seed: int = 0) -> Observation:
        self.scenario = self.spec.build(seed, log_events=self.log_events)
        self.config = EpisodeConfig(self.scenario.T_sim, self.scenario.T_step, seed)
        weight = self.scenario.scrap_weight if self.scrap_weight is None else self.scrap_weight
        self.ledger = RewardLedger(self.scenario.cost_model, weight)
        self.space = space_descriptors(self.line)
        self.steps = 0
        self.deadlocked_at: Optional[float] = None
        self.line.start()
        self.ledger.history.append(0.0)
        return snapshot(self.line)

    @property
    def done(self) -> bool:
        return self.steps >= self.config.n_steps

    def step(self, cmd: Optional[dict] = None, observe: bool = True):
        if self.scenario is None:
            raise EpisodeDone("call reset() before step()")
        if self.done:
            raise EpisodeDone("episode is finished; call reset()")
        line = self.line
        if cmd:
            apply(line, cmd)
        self.steps += 1
        t_next = self.steps * self.config.T_step
        if self.steps == self.config.n_steps:
            t_next = self.config.T_sim
        engine = line.engine
        engine.at(t_next, "agent", AGENT_BOUNDARY, payload={"step": self.steps})
        engine.run_until(t_next)
        previous = self.ledger.history[-1]
        value = self.ledger.record(line)
        reward = value - previous
        if self.deadlocked_at is None and detect_deadlock(line):
            self.deadlocked_at = line.clock
        info = {
            "time": line.clock,
            "value": value,
            "n_ok": line.n_ok,
            "n_nok": line.n_nok_by_station(),
            "parts_created": line.parts_created,
            "deadlocked": self.deadlocked_at is not None,
        }
        obs = snapshot(line) if observe else None
        return obs, reward, self.done, info


def run_episode(env: LineEnv, agent: Callable, seed: int = 0, episode: int = 0,
                on_step: Optional[Callable[[int, Observation, float], None]] = None) -> EpisodeResult:
    """Roll out one episode; ``on_step(step, obs, reward)`` sees every transition."""
    started = time.perf_counter()
    obs = env.reset(seed)
    if hasattr(agent, "reset"):
        agent.reset()
    every_step = getattr(agent, "every_step", True)
    observe = every_step or on_step is not None
    cmd = agent(obs, env.space)
    rewards = []
    while not env.done:
        obs, reward, _, info = env.step(cmd, observe=observe)
        rewards.append(reward)
        if on_step is not None:
            on_step(env.steps, obs, reward)
        cmd = agent(obs, env.space) if every_step and not env.done else None
    line = env.line
    return EpisodeResult(
        scenario=env.scenario.name,
        seed=seed,
        episode=episode,
        total_reward=env.ledger.history[-1],
        n_ok=line.n_ok,
        n_nok=line.n_nok_by_station(),
        step_rewards=rewards,
        deadlocked=env.deadlocked_at is not None,
        deadlocked_at=env.deadlocked_at,
        wall_time=time.perf_counter() - started,
        station_ok={sid: s.n_ok for sid, s in line.stations.items()},
        parts_created=line.parts_created,
    )


def episode_seed(seed: int, episode: int) -> int:
    """Scenario seed of the ``episode``-th rollout under base ``seed``."""
    return seed * 10_000 + episode


def _run_one(job) -> EpisodeResult:
    spec, factory, seed, episode = job
    agent = factory(episode_seed(seed, episode))
    result = run_episode(LineEnv(spec), agent, seed=episode_seed(seed, episode), episode=episode)
    result.seed = seed
    return result


def vector_run(spec: ScenarioSpec, agent_factory: AgentFactory, n_envs: int = 1,
               n_episodes: int = 1, seeds: Sequence[int] = (0,)) -> list[EpisodeResult]:
    """Run ``n_episodes`` per seed on up to ``n_envs`` processes; results sorted by (seed, episode).

    ``agent_factory`` must be picklable when ``n_envs > 1``.
    """
    if n_envs < 1:
        raise ValueError("n_envs must be >= 1")
    jobs = [(spec, agent_factory, s, e) for s in seeds for e in range(n_episodes)]
    if n_envs == 1:
        results = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_envs) as pool:
            results = list(pool.map(_run_one, jobs))
    return sorted(results, key=lambda r: (r.seed, r.episode))


@dataclass
class CurriculumSchedule:
    weight: float
    factor: float = 1.5
    cap: float = 1.0
    threshold: float = 100.0
    patience: int = 5
    streak: int = 0

    def __post_init__(self) -> None:
        if self.factor < 1:
            raise ValueError("factor must be >= 1")
        self.weight = min(self.weight, self.cap)

    @classmethod
    def for_k(cls, k: int, factor: float = 1.5, **kwargs) -> "CurriculumSchedule":
        return cls(weight=0.018 / k, factor=factor, cap=1.0 / k, **kwargs)


def curriculum_tick(schedule: CurriculumSchedule, reward: float) -> float:
    """Count evaluations above threshold; after ``patience`` in a row raise the weight."""
    if reward > schedule.threshold:
        schedule.streak += 1
        if schedule.streak >= schedule.patience:
            schedule.weight = min(schedule.weight * schedule.factor, schedule.cap)
            schedule.streak = 0
    else:
        schedule.streak = 0
    return schedule.weight


@dataclass
class Summary:
    mean: float
    std: float
    best: float

    def __str__(self) -> str:
        return f"{self.mean:.1f} ± {self.std:.1f} ({self.best:.1f})"


def evaluate(spec: ScenarioSpec, agent_factory: AgentFactory, episodes: int = 5, repeats: int = 5,
             seed: int = 0, n_envs: int = 1) -> tuple[Summary, list[float]]:
    """Mean reward of ``episodes`` rollouts, repeated ``repeats`` times, as mean ± std (max)."""
    means = []
    for r in range(repeats):
        results = vector_run(spec, agent_factory, n_envs, episodes, seeds=[seed + r])
        means.append(sum(x.total_reward for x in results) / len(results))
    std = statistics.stdev(means) if len(means) > 1 else 0.0
    return Summary(statistics.fmean(means), std, max(means)), means


def summarize(values: Sequence[float]) -> Summary:
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return Summary(statistics.fmean(values), std, max(values))
