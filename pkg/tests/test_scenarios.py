import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from flowline.des import Distribution, RandomStream
from flowline.scenarios import (
    LENGTH_RANGE,
    TRIGGER_RANGE,
    JumpProfile,
    ScenarioError,
    ScenarioSpec,
    jump_factor,
    jumped_processing_time,
    make_cl,
    make_pd,
    make_wa,
    make_wt,
    make_wtj,
    pd_minima,
    sample_jump,
    wa_minima,
)


def test_wt_parameters():
    line = make_wt().build(0).line
    a = line.stations["A"]
    assert a.processing == Distribution(20, 2)
    assert line.stations["S_C"].processing == Distribution(5, 0.5)
    assert line.stations["S_M"].processing == Distribution(5, 0.5)
    caps = {b.id: b.capacity for b in line.buffers.values()}
    assert caps == {"Buffer_S_M_to_A": 3, "Buffer_S_C_to_A": 2, "Buffer_A_to_Sink": 3}


def test_index_convention_starts_at_one():
    assert pd_minima(3) == [20.0, 30.0, 40.0]
    assert wa_minima(3) == [20.0, 24.0, 28.0]


def test_names():
    assert make_wt().name == "WT"
    assert make_wtj(0.6).name == "WTJ_0.6"
    assert make_pd(4).name == "PD_4"
    assert make_wa(3).name == "WA_3,9"
    assert make_cl(5).name == "CL_5"


def test_invalid_parameters_raise():
    with pytest.raises(ScenarioError):
        make_pd(1)
    with pytest.raises(ScenarioError):
        make_wtj(1.0)
    with pytest.raises(ScenarioError):
        make_wtj(0.5)
    with pytest.raises(ScenarioError):
        ScenarioSpec("XY")
    with pytest.raises(ScenarioError):
        make_wa(3, N=-1)


def test_jump_factor_example():
    assert jump_factor(1800, 0.75, 20, 2, 2) == pytest.approx(2.5)


def test_jump_factor_tends_to_one_as_R_goes_to_one():
    assert jump_factor(1800, 1 - 1e-9, 20, 2, 2) == pytest.approx(1.0, abs=1e-6)


def test_jump_window_too_short_raises():
    with pytest.raises(ScenarioError):
        jump_factor(900, 0.75, 20, 2, 2)


@settings(max_examples=100)
@given(st.floats(0.55, 0.95), st.floats(*LENGTH_RANGE))
def test_jump_factor_gives_R_times_normal_count(R, T_jump):
    T, S, E, T_sim = 20.0, 2.0, 2.0, 4000.0
    assume(T_jump > (1 - R) * T_sim + 1)
    f = jump_factor(T_jump, R, T, S, E, T_sim)
    cycle = T + S + E
    jumped = f * T + S + E
    count = (T_sim - T_jump) / cycle + T_jump / jumped
    assert count == pytest.approx(R * T_sim / cycle, rel=1e-9)
    assert f > 1


def test_sampled_jump_ranges_and_determinism():
    for seed in range(50):
        profile = sample_jump(RandomStream(seed, "scenario"), 0.75, 20, 2, 2)
        assert TRIGGER_RANGE[0] <= profile.trigger <= TRIGGER_RANGE[1]
        assert LENGTH_RANGE[0] <= profile.length <= LENGTH_RANGE[1]
    a = make_wtj().layout(3)
    b = make_wtj().layout(3)
    assert a == b
    assert make_wtj().layout(4)[1] != a[1]


def test_sampled_length_is_feasible_for_low_R():
    for seed in range(50):
        profile = sample_jump(RandomStream(seed, "scenario"), 0.52, 20, 2, 2)
        assert profile.length > 0.48 * 4000
        assert profile.factor > 1
    make_wtj(0.51).build(0)


def test_jumped_processing_time_window():
    profile = JumpProfile(1000.0, 1800.0, 2.5)
    base = Distribution(20, 2)
    assert jumped_processing_time(profile, 999.0, base) == base
    assert jumped_processing_time(profile, 1500.0, base) == Distribution(50, 2)
    assert jumped_processing_time(profile, 2801.0, base) == base
    assert jumped_processing_time(None, 1500.0, base) == base


def test_cost_model_per_scenario():
    assert make_wt().build(0).cost_model.T_C == pytest.approx(24.0)
    pd = make_pd(3).build(0).cost_model
    assert pd.T_C == pytest.approx(1 / (1 / 20.1 + 1 / 30.1 + 1 / 40.1))
    cl = make_cl(3).build(0)
    assert cl.scrap_weight == pytest.approx(1 / 3)
    assert set(cl.cost_model.station_costs) == {"S_main", "A1", "A2", "A3"}


def test_wa_layout_pool():
    line = make_wa(4).build(0).line
    pool = line.pools["Pool"]
    assert len(pool.workers) == 12
    assert list(pool.stations) == ["P1", "P2", "P3", "P4"]
    assert pool.performance_coefficient == 0.3


def test_cl_layout_structure():
    line = make_cl(3).build(0).line
    switch = line.stations["Switch"]
    assert len(switch.out_buffers) == 3
    assert all(b.capacity == 2 for b in line.buffers.values())
    assert list(line.pools["Pool"].stations) == ["A1", "A2", "A3"]


def test_builds_are_deterministic():
    for spec in (make_wt(), make_wtj(), make_pd(3), make_wa(3), make_cl(3)):
        a = spec.build(11).line
        b = spec.build(11).line
        a.run_until(300)
        b.run_until(300)
        assert [s.n_ok for s in a.stations.values()] == [s.n_ok for s in b.stations.values()]
