"""Discrete-event simulation of production flow lines with an agent interface."""

from .baselines import (
    CLHeuristicAgent,
    GreedySwitchAgent,
    NoOpAgent,
    PartitionAgent,
    RandomAgent,
    RollingMeanAgent,
    RoundRobinSwitchAgent,
    StaticAgent,
    cl_heuristic_agent,
    enumerate_monotone_partitions,
    expected_max_parts_wt,
    grid_search_cl,
    optimal_part_distribution,
    optimal_waiting_time,
    optimal_wt_agent,
    solve_worker_assignment,
)
from .des import Distribution, Engine, RandomStream, SchedulingError
from .env import (
    CurriculumSchedule,
    EpisodeConfig,
    EpisodeResult,
    LineEnv,
    curriculum_tick,
    evaluate,
    run_episode,
    vector_run,
)
from .layout import build_layout, to_layout
from .line import AssignmentError, LayoutError, Line, detect_deadlock
from .observe import (
    ActionRangeError,
    NotActionableError,
    Observation,
    StateDescriptor,
    UnknownStateError,
    apply,
    snapshot,
    space_descriptors,
)
from .scenarios import (
    JumpProfile,
    ScenarioSpec,
    jump_factor,
    jumped_processing_time,
    make_cl,
    make_pd,
    make_wa,
    make_wt,
    make_wtj,
)
from .scoring import CostModel, RewardLedger, aggregate_value, oee, step_reward

__version__ = "0.1.0"
