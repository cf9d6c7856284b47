"""Tests for the wildfire cellular automaton."""

import math

import numpy as np
import pytest

from utils.errors import ValidationError
from wildfire.automaton import (
    BURNED_DOWN, BURNING, UNBURNED, FireState, advance, compute_time_step,
    extract_state_vector, resume, simulate, state_from_vector, step_fire,
)
from wildfire.experiment import forecast_error, simulate_member
from wildfire.wind import FireConfig, SpreadRates, WindDraws, build_wind_field, member_rates, spread_rates


def uniform_rates(shape, rate: float) -> SpreadRates:
    full = np.full(shape, rate)
    return SpreadRates(r_max=full, rho=np.ones(shape), eccentricity=np.zeros(shape),
                       rates=np.full((8,) + shape, rate))


@pytest.fixture
def windless_config():
    """41 x 41 cells with the ignition in the centre cell."""
    return FireConfig(length_x=410.0, length_y=410.0, ignition_x=205.0, ignition_y=205.0,
                      base_wind=0.0, perturbation=0.0, sim_time=20000.0, forecast_time=40000.0,
                      sensor_lines=(200.0,))


@pytest.fixture
def small_fire():
    """Reduced domain with the default wind model."""
    return FireConfig(length_x=600.0, length_y=400.0, ignition_x=150.0, ignition_y=200.0,
                      sim_time=1200.0, forecast_time=2400.0, sensor_lines=(150.0, 200.0, 250.0),
                      n_simulations=10, n_train=8, seed=3)


class TestComputeTimeStep:
    def test_head_fire_rate_example(self):
        rates = uniform_rates((3, 3), 0.255)
        dt, steps = compute_time_step(rates, 10.0, 3600.0)
        assert steps == 92
        assert dt == pytest.approx(3600.0 / 92)
        assert dt <= 10.0 / 0.255

    def test_exact_multiple(self):
        dt, steps = compute_time_step(uniform_rates((2, 2), 0.005), 10.0, 20000.0)
        assert (dt, steps) == (2000.0, 10)

    def test_steps_reach_horizon(self):
        for rate in (0.0071, 0.13, 0.255, 0.4):
            dt, steps = compute_time_step(uniform_rates((2, 2), rate), 10.0, 3600.0)
            assert dt * steps == pytest.approx(3600.0, rel=1e-12)
            assert dt * rate <= 10.0 * (1 + 1e-12)

    def test_zero_rate(self):
        with pytest.raises(ValidationError):
            compute_time_step(uniform_rates((2, 2), 0.0), 10.0, 3600.0)


class TestStepFire:
    def test_unburned_grid_is_fixed_point(self):
        shape = (5, 5)
        state = FireState(np.zeros(shape, dtype=np.int8), np.full(shape, np.nan),
                          np.zeros((8,) + shape), 0.0)
        nxt = step_fire(state, uniform_rates(shape, 0.1), 10.0, 10.0)
        np.testing.assert_array_equal(nxt.status, UNBURNED)
        assert not nxt.distance.any()

    def test_straight_neighbours_ignite_on_step_52(self):
        config = FireConfig(length_x=110.0, length_y=110.0, ignition_x=55.0, ignition_y=55.0,
                            base_wind=0.0, perturbation=0.0, sensor_lines=(50.0,))
        rates = uniform_rates(config.shape, 0.005)
        dt = 3600.0 / 92
        assert math.ceil(10.0 / (0.005 * dt)) == 52
        state = FireState.ignite(config)
        row, col = config.ignition_cell
        for step in range(1, 53):
            state = step_fire(state, rates, dt, config.cell_length)
            neighbours = [state.status[row + dr, col + dc] for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0))]
            if step < 52:
                assert all(s == UNBURNED for s in neighbours)
        assert all(s == BURNING for s in neighbours)
        assert state.status[row + 1, col + 1] == UNBURNED
        assert state.ignition_time[row, col + 1] == pytest.approx(52 * dt)
        # spillover carried in the triggering direction only
        assert state.distance[0, row, col + 1] == pytest.approx(52 * 0.005 * dt - 10.0)
        assert state.distance[2, row, col + 1] == 0.0

    def test_burn_down_after_surrounded(self):
        shape = (3, 3)
        status = np.full(shape, BURNING, dtype=np.int8)
        state = FireState(status, np.zeros(shape), np.zeros((8,) + shape), 0.0)
        nxt = step_fire(state, uniform_rates(shape, 0.001), 1.0, 10.0)
        np.testing.assert_array_equal(nxt.status, BURNED_DOWN)

    def test_burned_down_cells_do_not_spread(self):
        shape = (1, 3)
        status = np.array([[BURNED_DOWN, UNBURNED, UNBURNED]], dtype=np.int8)
        distance = np.zeros((8,) + shape)
        distance[0, 0, 0] = 100.0
        state = FireState(status, np.array([[0.0, np.nan, np.nan]]), distance, 0.0)
        nxt = step_fire(state, uniform_rates(shape, 1.0), 5.0, 10.0)
        np.testing.assert_array_equal(nxt.status, status)

    def test_forced_and_eligible_ignitions(self):
        shape = (1, 3)
        status = np.array([[BURNING, UNBURNED, UNBURNED]], dtype=np.int8)
        distance = np.zeros((8,) + shape)
        distance[0, 0, 0] = 9.0
        state = FireState(status, np.array([[0.0, np.nan, np.nan]]), distance, 0.0)
        rates = uniform_rates(shape, 1.0)

        blocked = step_fire(state, rates, 2.0, 10.0, eligible=np.zeros(shape, dtype=bool))
        assert blocked.status[0, 1] == UNBURNED

        forced = np.array([[False, False, True]])
        nxt = step_fire(state, rates, 2.0, 10.0, forced=forced, eligible=np.zeros(shape, dtype=bool))
        assert nxt.status[0, 2] == BURNING and nxt.status[0, 1] == UNBURNED
        assert not nxt.distance[:, 0, 2].any()

        both = step_fire(state, rates, 2.0, 10.0, forced=np.array([[False, True, False]]))
        assert both.distance[0, 0, 1] == pytest.approx(1.0)

    def test_windless_isotropy(self, windless_config):
        rates = uniform_rates(windless_config.shape, 0.005)
        dt, _ = compute_time_step(rates, 10.0, 3600.0)
        state = FireState.ignite(windless_config)
        for _ in range(8):
            state = advance(state, rates, dt, 40, windless_config.cell_length)
            for view in (state.status, state.ignition_time, extract_state_vector(state).reshape(41, 41)):
                for transformed in (view.T, view[::-1, :], view[:, ::-1], np.rot90(view)):
                    np.testing.assert_array_equal(transformed, view)
        assert state.burned_area > 9

    def test_burned_area_non_decreasing(self, small_fire):
        _, rates = member_rates(small_fire, 0)
        dt, steps = compute_time_step(rates, small_fire.cell_length, small_fire.sim_time)
        state = FireState.ignite(small_fire)
        areas = [state.burned_area]
        for _ in range(steps):
            previous = state
            state = step_fire(state, rates, dt, small_fire.cell_length)
            areas.append(state.burned_area)
            # burned_down only ever follows burning
            assert not np.any((state.status == BURNED_DOWN) & (previous.status == UNBURNED))
            assert (state.distance >= 0).all()
            increment = state.distance - previous.distance
            grew = previous.status == BURNING
            assert np.all(increment[:, grew] <= small_fire.cell_length * (1 + 1e-12))
        assert areas == sorted(areas)


class TestStateVector:
    def test_all_unburned(self, small_fire):
        shape = small_fire.shape
        state = FireState(np.zeros(shape, dtype=np.int8), np.full(shape, np.nan),
                          np.zeros((8,) + shape), 100.0)
        assert not extract_state_vector(state).any()

    def test_ignition_point_and_half(self, small_fire):
        state = FireState.ignite(small_fire)
        state.time = 1000.0
        state.status[0, 0] = BURNING
        state.ignition_time[0, 0] = 500.0
        s = extract_state_vector(state).reshape(small_fire.shape)
        row, col = small_fire.ignition_cell
        assert s[row, col] == 1.0
        assert s[0, 0] == 0.5

    def test_row_major(self, small_fire):
        state = FireState.ignite(small_fire)
        state.time = 10.0
        row, col = small_fire.ignition_cell
        s = extract_state_vector(state)
        assert s[row * small_fire.nx + col] == 1.0

    def test_requires_positive_time(self, small_fire):
        with pytest.raises(ValidationError):
            extract_state_vector(FireState.ignite(small_fire), 0.0)

    def test_values_in_unit_interval_and_monotone(self, small_fire):
        _, rates = member_rates(small_fire, 1)
        state = simulate(small_fire, rates)
        s1 = extract_state_vector(state, 1200.0)
        s2 = extract_state_vector(state, 1800.0)
        assert np.all((s1 >= 0) & (s1 <= 1))
        ignited = state.ignited.reshape(-1)
        assert np.all(s2[ignited] >= s1[ignited])


class TestRestart:
    def test_exact_vector_rebuilds_state(self, small_fire):
        for member in range(10):
            _, rates = member_rates(small_fire, member)
            one_hour = simulate(small_fire, rates)
            rebuilt = state_from_vector(extract_state_vector(one_hour), small_fire.sim_time,
                                        rates, small_fire.cell_length)
            np.testing.assert_array_equal(rebuilt.status, one_hour.status)
            np.testing.assert_array_equal(rebuilt.ignition_time, one_hour.ignition_time)
            np.testing.assert_array_equal(rebuilt.distance, one_hour.distance)
            assert rebuilt.time == one_hour.time

    def test_exact_vector_forecast_round_trip(self, small_fire):
        for index in range(10):
            member = simulate_member(small_fire, index, forecast=True)
            assert forecast_error(small_fire, member, member.vector_1h) == 0.0

    def test_last_step_ignitions_recovered(self, small_fire):
        recovered = 0
        for member in range(10):
            _, rates = member_rates(small_fire, member)
            one_hour = simulate(small_fire, rates)
            s = extract_state_vector(one_hour).reshape(small_fire.shape)
            last = one_hour.ignited & (s == 0)
            rebuilt = state_from_vector(s, small_fire.sim_time, rates, small_fire.cell_length)
            assert (rebuilt.status[last] == BURNING).all()
            recovered += int(last.sum())
        assert recovered > 0

    def test_spillover_restored(self, small_fire):
        _, rates = member_rates(small_fire, 4)
        one_hour = simulate(small_fire, rates)
        rebuilt = state_from_vector(extract_state_vector(one_hour), small_fire.sim_time,
                                    rates, small_fire.cell_length)
        # distances are not capped at the neighbour distance
        assert rebuilt.distance.max() == one_hour.distance.max() > small_fire.cell_length

    def test_resume_matches_single_long_run(self, small_fire):
        _, rates = member_rates(small_fire, 2)
        dt, steps = compute_time_step(rates, small_fire.cell_length, small_fire.sim_time)
        one_hour = simulate(small_fire, rates)
        resumed = resume(one_hour, rates, small_fire.sim_time, small_fire.cell_length)
        straight = advance(FireState.ignite(small_fire), rates, dt, 2 * steps, small_fire.cell_length)
        np.testing.assert_array_equal(resumed.status, straight.status)
        np.testing.assert_allclose(resumed.ignition_time, straight.ignition_time, rtol=1e-12)

    def test_noisy_vector_ignites_on_step_grid(self, small_fire):
        _, rates = member_rates(small_fire, 4)
        dt, _ = compute_time_step(rates, small_fire.cell_length, small_fire.sim_time)
        s = extract_state_vector(simulate(small_fire, rates))
        noisy = np.clip(s + np.where(s > 0, 0.2 * dt / small_fire.sim_time, 0.0), 0.0, 1.0)
        rebuilt = state_from_vector(noisy, small_fire.sim_time, rates, small_fire.cell_length)
        positive = s.reshape(small_fire.shape) > 0
        np.testing.assert_allclose(rebuilt.ignition_time[positive] / dt,
                                   np.rint(rebuilt.ignition_time[positive] / dt), atol=1e-9)
        assert rebuilt.ignited[positive].all()

    def test_state_from_vector_length_check(self, small_fire):
        _, rates = member_rates(small_fire, 0)
        with pytest.raises(ValidationError):
            state_from_vector(np.zeros(5), 100.0, rates, small_fire.cell_length)

    def test_simulation_deterministic(self, small_fire):
        a = simulate(small_fire, member_rates(small_fire, 6)[1])
        b = simulate(small_fire, member_rates(small_fire, 6)[1])
        assert extract_state_vector(a).tobytes() == extract_state_vector(b).tobytes()
        np.testing.assert_array_equal(a.status, b.status)


def test_wind_field_feeds_rates(small_fire):
    wind = build_wind_field(small_fire, WindDraws.sample(small_fire.seed, 0))
    assert spread_rates(wind).rates.shape == (8,) + small_fire.shape
