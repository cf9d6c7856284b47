"""Tests for fire configuration, wind fields and spread rates."""

import math

import numpy as np
import pytest

from utils.errors import ValidationError
from wildfire.wind import (
    DIRECTION_OFFSETS, FireConfig, WindDraws, build_wind_field, spread_rates,
    stream_function, wind_velocity,
)


class TestFireConfig:
    def test_default_grid(self):
        config = FireConfig()
        assert (config.nx, config.ny) == (200, 150)
        assert config.n_cells == 30000
        assert config.ignition_cell == (49, 38)

    def test_cell_must_divide_domain(self):
        with pytest.raises(ValidationError):
            FireConfig(cell_length=7.0)

    def test_ignition_inside(self):
        with pytest.raises(ValidationError):
            FireConfig(ignition_x=2500.0)

    def test_direction_offsets(self):
        assert DIRECTION_OFFSETS[0] == (0, 1)
        assert DIRECTION_OFFSETS[2] == (1, 0)
        assert DIRECTION_OFFSETS[5] == (-1, -1)


class TestWindField:
    def test_unperturbed(self):
        config = FireConfig(perturbation=0.0)
        wind = build_wind_field(config, WindDraws(1.3, -0.7, 0.2, 2.0))
        np.testing.assert_array_equal(wind.vx, 2.5)
        np.testing.assert_array_equal(wind.vy, 0.0)
        np.testing.assert_array_equal(wind.angle, 0.0)

    def test_zero_amplitudes(self):
        wind = build_wind_field(FireConfig(), WindDraws(0.0, 0.0, 1.0, 4.0))
        np.testing.assert_array_equal(wind.vx, 2.5)
        np.testing.assert_array_equal(wind.vy, 0.0)

    def test_matches_stream_function_gradient(self):
        config = FireConfig()
        draws = WindDraws.sample(3, 11)
        rng = np.random.default_rng(0)
        x = rng.uniform(0, config.length_x, 50)
        y = rng.uniform(0, config.length_y, 50)
        h = 0.01
        dpsi_dy = (stream_function(config, draws, x, y + h) - stream_function(config, draws, x, y - h)) / (2 * h)
        dpsi_dx = (stream_function(config, draws, x + h, y) - stream_function(config, draws, x - h, y)) / (2 * h)
        vx, vy = wind_velocity(config, draws, x, y)
        np.testing.assert_allclose(dpsi_dy, vx, rtol=1e-4, atol=1e-6)
        np.testing.assert_allclose(-dpsi_dx, vy, rtol=1e-4, atol=1e-6)

    def test_divergence_free(self):
        config = FireConfig()
        draws = WindDraws.sample(5, 0)
        x, y = np.meshgrid(np.linspace(100, 1900, 40), np.linspace(100, 1400, 30))
        h = 1e-3
        div = ((wind_velocity(config, draws, x + h, y)[0] - wind_velocity(config, draws, x - h, y)[0])
               + (wind_velocity(config, draws, x, y + h)[1] - wind_velocity(config, draws, x, y - h)[1])) / (2 * h)
        assert np.abs(div).max() < 1e-8

    def test_draws_deterministic(self):
        assert WindDraws.sample(9, 4) == WindDraws.sample(9, 4)
        assert WindDraws.sample(9, 4) != WindDraws.sample(9, 5)


class TestSpreadRates:
    def test_windless(self):
        config = FireConfig(base_wind=0.0, perturbation=0.0)
        rates = spread_rates(build_wind_field(config, WindDraws(0.0, 0.0, 0.0, 0.0)))
        np.testing.assert_array_equal(rates.r_max, 0.005)
        np.testing.assert_array_equal(rates.rho, 1.0)
        np.testing.assert_array_equal(rates.eccentricity, 0.0)
        np.testing.assert_array_equal(rates.rates, 0.005)

    def test_base_wind_values(self):
        config = FireConfig(perturbation=0.0)
        rates = spread_rates(build_wind_field(config, WindDraws(0.0, 0.0, 0.0, 0.0)))
        assert rates.r_max[0, 0] == pytest.approx(0.255)
        assert rates.rho[0, 0] == pytest.approx(2.398)
        assert rates.eccentricity[0, 0] == pytest.approx(0.9089, abs=1e-4)
        # head fire along the wind, back fire against it
        assert rates.rates[0, 0, 0] == rates.r_max[0, 0]
        ecc = rates.eccentricity[0, 0]
        assert rates.rates[4, 0, 0] == pytest.approx(0.255 * (1 - ecc) / (1 + ecc))
        assert rates.max_rate == pytest.approx(0.255)

    def test_eccentricity_range(self):
        rates = spread_rates(build_wind_field(FireConfig(), WindDraws.sample(1, 1)))
        assert np.all((rates.eccentricity >= 0) & (rates.eccentricity < 1))
        assert np.all(rates.rates > 0)
        assert np.all(rates.rates <= rates.r_max * (1 + 1e-12))

    def test_angle_uses_atan2(self):
        draws = WindDraws(1.0, 0.0, 0.5, 0.0)
        wind = build_wind_field(FireConfig(), draws)
        np.testing.assert_allclose(wind.angle, np.arctan2(wind.vy, wind.vx))
        assert math.isclose(float(wind.speed[3, 7]), math.hypot(wind.vx[3, 7], wind.vy[3, 7]))
