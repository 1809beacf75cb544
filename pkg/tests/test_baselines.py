import itertools
import math
import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowline.baselines import (
    AGENT_NAMES,
    CLHeuristicAgent,
    FixedRouteAgent,
    GreedySwitchAgent,
    NoOpAgent,
    RandomAgent,
    RollingMeanAgent,
    RoundRobinSwitchAgent,
    assignment_objective,
    cl_heuristic_agent,
    compositions,
    enumerate_monotone_partitions,
    expected_excess,
    expected_max_parts_wt,
    grid_search_cl,
    make_agent,
    optimal_part_distribution,
    optimal_waiting_time,
    optimal_wt_agent,
    solve_worker_assignment,
)
from flowline.des import Distribution
from flowline.env import LineEnv, run_episode
from flowline.observe import Observation, space_descriptors, snapshot
from flowline.scenarios import make_cl, make_pd, make_wt


def test_optimal_waiting_time_benchmark():
    assert optimal_waiting_time(Distribution(20, 2), Distribution(1), Distribution(5, 0.5)) == 18.5


def test_optimal_waiting_time_symmetry():
    d = Distribution(7, 1)
    assert optimal_waiting_time(d, Distribution(0), d) == 0


def test_expected_excess_matches_monte_carlo():
    rng = random.Random(4)
    a, s_a, b, s_b = 6.0, 0.5, 5.5, 2.0
    draws = [max(a + rng.expovariate(1 / s_a), b + rng.expovariate(1 / s_b)) for _ in range(200_000)]
    assert expected_excess(a, s_a, b, s_b) == pytest.approx(statistics.fmean(draws), abs=0.02)
    assert expected_excess(b, s_b, a, s_a) == expected_excess(a, s_a, b, s_b)
    assert expected_excess(3, 0, 1, 0) == 3


def test_expected_max_parts_without_overheads():
    value = expected_max_parts_wt(T_SC=Distribution(0), T_SM=Distribution(0), traversal_SC=0,
                                  traversal_SM=0, traversal_AS=0, T_S=Distribution(0),
                                  T_g=Distribution(0))
    assert value == pytest.approx(4000 / 22)
    zero_g = expected_max_parts_wt(T_A=Distribution(22, 2), T_SC=Distribution(0), T_SM=Distribution(0),
                                   traversal_SC=0, traversal_SM=0, traversal_AS=0, T_S=Distribution(0),
                                   T_g=Distribution(1))
    # T_g still appears once in the tail
    assert zero_g == pytest.approx((4000 - 1) / 26)


def test_expected_max_parts_wt_default_and_short_horizon():
    assert expected_max_parts_wt() == pytest.approx(166.26, abs=0.01)
    assert expected_max_parts_wt(T_sim=5) == 0.0


def test_part_distribution_shares():
    shares, total = optimal_part_distribution([20, 30, 40], [0.1] * 3)
    assert shares == pytest.approx([0.4615, 0.3077, 0.2308], abs=1e-4)
    assert sum(shares) == pytest.approx(1.0)
    assert total == pytest.approx(sum(4000 / (1.1 * t) for t in (20, 30, 40)))
    general, _ = optimal_part_distribution([20, 30, 40], [0.1] * 3, closed_form=False)
    assert general == pytest.approx(shares)
    assert optimal_part_distribution([25], [0.3])[0] == [1.0]


def test_part_distribution_unequal_noise_needs_general_ratio():
    with pytest.raises(ValueError, match="closed_form=False"):
        optimal_part_distribution([20, 30], [0.1, 0.2])
    shares, _ = optimal_part_distribution([20, 30], [0.1, 0.2], closed_form=False)
    assert sum(shares) == pytest.approx(1.0)


@pytest.mark.parametrize("k, expected", [(3, (2, 3, 4)), (4, (2, 3, 3, 4)), (5, (2, 2, 3, 4, 4))])
def test_solver_benchmark_solutions(k, expected):
    T = [16 + 4 * i for i in range(1, k + 1)]
    partition, _ = solve_worker_assignment(T, [0.1] * k, 3 * k, 0.3)
    assert partition == expected


def test_objective_direct_value():
    value = assignment_objective((2, 3, 4), [20, 24, 28], [0, 0, 0], 0.3)
    assert value == pytest.approx(20 * math.exp(-0.6), abs=1e-9)
    assert value == pytest.approx(10.976, abs=1e-3)


def test_compositions_are_complete_and_lexicographic():
    got = list(compositions(4, 3))
    brute = sorted(p for p in itertools.product(range(5), repeat=3) if sum(p) == 4)
    assert got == brute
    assert list(compositions(0, 0)) == [()]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1, 50), min_size=1, max_size=4), st.integers(0, 8), st.floats(0.05, 1))
def test_solver_is_optimal_and_scale_invariant(T, N, c):
    S = [0.1] * len(T)
    partition, value = solve_worker_assignment(T, S, N, c)
    assert sum(partition) == N
    for other in compositions(N, len(T)):
        assert value <= assignment_objective(other, T, S, c) + 1e-12
    scaled, scaled_value = solve_worker_assignment([3 * t for t in T], S, N, c)
    assert scaled_value == pytest.approx(3 * value)
    assert assignment_objective(scaled, T, S, c) == pytest.approx(value)


def test_monotone_partitions():
    assert set(enumerate_monotone_partitions(3, 3)) == {(0, 0, 3), (0, 1, 2), (1, 1, 1)}
    oracle = [p for p in compositions(9, 3) if list(p) == sorted(p)]
    got = enumerate_monotone_partitions(9, 3)
    assert got == oracle
    assert all(sum(p) == 9 for p in got)


def fake_obs(values):
    names = tuple(values)
    import numpy as np
    return Observation(np.array([float(values[n]) for n in names]), names, 0.0)


def test_greedy_ties_pick_lowest_index():
    space = space_descriptors(make_pd(3).build(0).line)
    obs = snapshot(make_pd(3).build(0).line)
    cmd = GreedySwitchAgent()(obs, space)
    assert cmd["Switch_in"]["index_buffer_out"] == 0


def test_round_robin_alternates():
    agent = RoundRobinSwitchAgent()
    space = space_descriptors(make_pd(3).build(0).line)
    base = dict(snapshot(make_pd(3).build(0).line).as_dict())
    seen = []
    for moved in range(6):
        base["Switch_in.n_ok"] = moved
        seen.append(agent(fake_obs(base), space)["Switch_in"]["index_buffer_out"])
    assert seen == [0, 1, 2, 0, 1, 2]


def test_round_robin_gives_fewer_parts_than_greedy_on_pd():
    spec = make_pd(3, )
    for seed in range(3):
        rr = run_episode(LineEnv(spec), RoundRobinSwitchAgent(), seed=seed)
        greedy = run_episode(LineEnv(spec), GreedySwitchAgent(), seed=seed)
        assert rr.n_ok < greedy.n_ok


def test_rolling_mean_constant_processing_hits_static_optimum():
    spec = make_wt(assembly=Distribution(20, 0))
    env = LineEnv(spec)
    obs = env.reset(0)
    agent = RollingMeanAgent(1)
    while not obs["A.processing_time_valid"]:
        obs, *_ = env.step(agent(obs, env.space))
    cmd = agent(obs, env.space)
    assert cmd["S_C"]["waiting_time"] == pytest.approx(20 + 2 - 5.5)
    with pytest.raises(ValueError):
        RollingMeanAgent(0)


def test_rolling_mean_before_first_observation_uses_static():
    env = LineEnv(make_wt())
    obs = env.reset(0)
    assert RollingMeanAgent(5)(obs, env.space) == {"S_C": {"waiting_time": 18.5}}


def test_random_agent_emits_valid_commands_and_is_seeded():
    env = LineEnv(make_cl(3))
    obs = env.reset(0)
    a, b = RandomAgent(3), RandomAgent(3)
    for _ in range(20):
        cmd = a(obs, env.space)
        assert cmd == b(obs, env.space)
        obs, *_ = env.step(cmd)


def test_first_assembly_policy_deadlocks_cl():
    result = run_episode(LineEnv(make_cl(3)), FixedRouteAgent("Switch", 0), seed=0)
    assert result.deadlocked
    step = int(result.deadlocked_at)
    assert all(r == 0.0 for r in result.step_rewards[step:])


def test_cl_heuristic_prefers_later_near_ties():
    env = LineEnv(make_cl(3))
    obs = env.reset(0)
    values = obs.as_dict()
    outs = env.space.switches["Switch"]["out"]
    for b, fill in zip(outs, (0.0, 0.5, 1.0)):
        values[f"{b}.fill"] = fill
    agent = CLHeuristicAgent(2.0, (3, 3, 3))
    cmd = agent(fake_obs(values), env.space)
    assert cmd["Switch"]["index_buffer_out"] == 1
    assert "S_comp" in cmd
    again = agent(fake_obs(values), env.space)
    assert set(again) == {"Switch"}
    for b in outs:
        values[f"{b}.fill"] = 1.0
    assert agent(fake_obs(values), env.space)["Switch"]["index_buffer_out"] == 0


def test_cl_heuristic_beats_zero_on_one_episode():
    result = run_episode(LineEnv(make_cl(3)), cl_heuristic_agent(), seed=1)
    assert not result.deadlocked
    assert result.total_reward > 0


def test_grid_search_singleton_and_determinism():
    spec = make_cl(3, )
    spec.T_sim = 600.0
    best, mean, table = grid_search_cl(spec, [2.0], [(3, 3, 3)], seeds=[0])
    assert best == (2.0, (3, 3, 3))
    assert table == [((2.0, (3, 3, 3)), mean)]
    again = grid_search_cl(spec, [2.0], [(3, 3, 3)], seeds=[0])
    assert again[1] == mean
    with pytest.raises(ValueError):
        grid_search_cl(spec, [], [(3, 3, 3)])


def test_agent_registry():
    for name in AGENT_NAMES:
        assert make_agent(name, make_cl(3)) is not None
    assert isinstance(make_agent("none"), NoOpAgent)
    assert optimal_wt_agent().command == {"S_C": {"waiting_time": 18.5}}
    with pytest.raises(ValueError):
        make_agent("clever")
