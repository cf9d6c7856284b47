"""Domain configuration, divergence-free wind fields and elliptical spread rates.

The wind is the gradient of a perturbed stream function

    psi(x, y) = v0 y + eps [A Lx/nu cos(2 pi nu x / Lx + phi1)
                            + B Ly/nu sin(2 pi nu y / Ly + phi2)]

with (vx, vy) = (d psi/dy, -d psi/dx) evaluated at every cell centre. Cells are
stored row-major with the row index running along y.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from utils.errors import ValidationError
from utils.random_streams import STREAM_WIND, box_muller, substream, uniform_angles

logger = logging.getLogger("cdeim.wildfire.wind")

# Spread directions theta_k = k*pi/4, counter-clockwise from +x.
N_DIRECTIONS = 8
DIRECTION_ANGLES = np.arange(N_DIRECTIONS) * (math.pi / 4.0)
# (row, column) offset of the neighbour reached in direction k
DIRECTION_OFFSETS = tuple(
    (int(round(math.sin(theta))), int(round(math.cos(theta)))) for theta in DIRECTION_ANGLES
)

# 10% rule of thumb plus a diffusion floor, and the length-to-width fit
RATE_WIND_FACTOR = 0.1
RATE_FLOOR = 5e-3
RATIO_WIND_FACTOR = 0.5592


def neighbour_distance(k: int, cell_length: float) -> float:
    """Distance between cell centres in direction k."""
    return cell_length * (math.sqrt(2.0) if k % 2 else 1.0)


def _is_multiple(length: float, cell: float) -> bool:
    ratio = length / cell
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, ratio)


@dataclass(frozen=True)
class FireConfig:
    """Geometry, wind parameters and ensemble sizes of the fire benchmark."""
    length_x: float = 2000.0
    length_y: float = 1500.0
    cell_length: float = 10.0
    ignition_x: float = 380.0
    ignition_y: float = 490.0
    base_wind: float = 2.5
    perturbation: float = 0.1
    frequency: float = 5.0
    sim_time: float = 3600.0
    forecast_time: float = 7200.0
    seed: int = 0
    n_simulations: int = 250
    n_train: int = 200
    sensor_lines: tuple[float, ...] = (400.0, 500.0, 600.0)
    restricted: bool = True

    def __post_init__(self):
        if not (self.cell_length > 0 and self.length_x > 0 and self.length_y > 0):
            raise ValidationError("domain lengths and cell length must be positive")
        if not (_is_multiple(self.length_x, self.cell_length)
                and _is_multiple(self.length_y, self.cell_length)):
            raise ValidationError(
                f"cell length {self.cell_length} must divide the domain {self.length_x} x {self.length_y}")
        if not (0 <= self.ignition_x < self.length_x and 0 <= self.ignition_y < self.length_y):
            raise ValidationError(f"ignition ({self.ignition_x}, {self.ignition_y}) lies outside the domain")
        if not 0 < self.sim_time < self.forecast_time:
            raise ValidationError("need 0 < sim_time < forecast_time")
        if not 0 < self.n_train < self.n_simulations:
            raise ValidationError(
                f"n_train must lie in (0, n_simulations={self.n_simulations}), got {self.n_train}")
        for y in self.sensor_lines:
            if not 0 <= y < self.length_y:
                raise ValidationError(f"sensor line y={y} lies outside the domain")

    @property
    def nx(self) -> int:
        return int(round(self.length_x / self.cell_length))

    @property
    def ny(self) -> int:
        return int(round(self.length_y / self.cell_length))

    @property
    def shape(self) -> tuple[int, int]:
        return self.ny, self.nx

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_test(self) -> int:
        return self.n_simulations - self.n_train

    @property
    def ignition_cell(self) -> tuple[int, int]:
        """(row, column) of the cell containing the ignition point."""
        return int(self.ignition_y // self.cell_length), int(self.ignition_x // self.cell_length)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinates along x (columns) and y (rows)."""
        x = (np.arange(self.nx) + 0.5) * self.cell_length
        y = (np.arange(self.ny) + 0.5) * self.cell_length
        return x, y

    def to_dict(self) -> dict:
        return {
            "length_x": self.length_x,
            "length_y": self.length_y,
            "cell_length": self.cell_length,
            "ignition_x": self.ignition_x,
            "ignition_y": self.ignition_y,
            "base_wind": self.base_wind,
            "perturbation": self.perturbation,
            "frequency": self.frequency,
            "sim_time": self.sim_time,
            "forecast_time": self.forecast_time,
            "seed": self.seed,
            "n_simulations": self.n_simulations,
            "n_train": self.n_train,
            "sensor_lines": list(self.sensor_lines),
            "restricted": self.restricted,
        }


@dataclass(frozen=True)
class WindDraws:
    """Random amplitudes A, B ~ N(0, 1) and phases phi1, phi2 ~ U[0, 2 pi)."""
    a: float
    b: float
    phi1: float
    phi2: float

    @classmethod
    def sample(cls, seed: int, member: int) -> "WindDraws":
        gen = substream(seed, STREAM_WIND, member)
        a, b = box_muller(gen, 2)
        phi1, phi2 = uniform_angles(gen, 2)
        return cls(float(a), float(b), float(phi1), float(phi2))


@dataclass
class WindField:
    """Per-cell velocity components and wind angle, shape (ny, nx)."""
    vx: np.ndarray
    vy: np.ndarray
    draws: WindDraws

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.vx, self.vy)

    @property
    def angle(self) -> np.ndarray:
        return np.arctan2(self.vy, self.vx)


def stream_function(config: FireConfig, draws: WindDraws, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nu = config.frequency
    eps = config.perturbation
    return config.base_wind * y + eps * (
        draws.a * config.length_x / nu * np.cos(2 * math.pi * nu * x / config.length_x + draws.phi1)
        + draws.b * config.length_y / nu * np.sin(2 * math.pi * nu * y / config.length_y + draws.phi2)
    )


def wind_velocity(config: FireConfig, draws: WindDraws, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient (d psi/dy, -d psi/dx) at arbitrary points."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nu = config.frequency
    eps = config.perturbation
    vx = config.base_wind + 2 * math.pi * eps * draws.b * np.cos(
        2 * math.pi * nu * y / config.length_y + draws.phi2)
    vy = 2 * math.pi * eps * draws.a * np.sin(2 * math.pi * nu * x / config.length_x + draws.phi1)
    return vx + np.zeros_like(x), vy + np.zeros_like(y)


def build_wind_field(config: FireConfig, draws: WindDraws) -> WindField:
    """Static wind at every cell centre for one simulation."""
    x, y = config.cell_centers()
    xx, yy = np.meshgrid(x, y)
    vx, vy = wind_velocity(config, draws, xx, yy)
    return WindField(vx=vx, vy=vy, draws=draws)


@dataclass
class SpreadRates:
    """Maximum rate, length-to-width ratio, eccentricity and R(theta_k) per cell."""
    r_max: np.ndarray
    rho: np.ndarray
    eccentricity: np.ndarray
    # shape (8, ny, nx)
    rates: np.ndarray

    @property
    def max_rate(self) -> float:
        return float(self.rates.max())


def spread_rates(wind: WindField) -> SpreadRates:
    """Elliptical spread template R = R_max (1 - E) / (1 - E cos(theta - theta_v))."""
    speed = wind.speed
    if not np.all(np.isfinite(speed)):
        raise ValidationError("wind field contains non-finite velocities")
    r_max = RATE_WIND_FACTOR * speed + RATE_FLOOR
    rho = 1.0 + RATIO_WIND_FACTOR * speed
    ecc = np.sqrt(1.0 - (1.0 / rho) ** 2)
    angle = wind.angle
    rates = np.empty((N_DIRECTIONS,) + speed.shape)
    for k, theta in enumerate(DIRECTION_ANGLES):
        rates[k] = r_max * ((1.0 - ecc) / (1.0 - ecc * np.cos(theta - angle)))
    return SpreadRates(r_max=r_max, rho=rho, eccentricity=ecc, rates=rates)


def member_rates(config: FireConfig, member: int) -> tuple[WindDraws, SpreadRates]:
    """Regenerate the wind draws and spread rates of ensemble member `member`."""
    draws = WindDraws.sample(config.seed, member)
    return draws, spread_rates(build_wind_field(config, draws))
