"""Synchronous wildfire cellular automaton on a square-cell grid.

Burning cells accumulate spread distance in eight directions. Once the
distance in direction k reaches the neighbour's centre, an unburned
neighbour ignites and inherits the excess as its own distance in k. A
burning cell burns down once all eight neighbours have ignited, cells
outside the domain counting as ignited. All rules read the pre-step state.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from utils.errors import ValidationError
from wildfire.wind import DIRECTION_OFFSETS, N_DIRECTIONS, FireConfig, SpreadRates, neighbour_distance

logger = logging.getLogger("cdeim.wildfire.automaton")

UNBURNED = 0
BURNING = 1
BURNED_DOWN = 2


@dataclass
class FireState:
    """Cell statuses, ignition times (nan if unignited), distances (8, ny, nx) and time."""
    status: np.ndarray
    ignition_time: np.ndarray
    distance: np.ndarray
    time: float

    @classmethod
    def ignite(cls, config: FireConfig) -> "FireState":
        shape = config.shape
        state = cls(
            status=np.full(shape, UNBURNED, dtype=np.int8),
            ignition_time=np.full(shape, np.nan),
            distance=np.zeros((N_DIRECTIONS,) + shape),
            time=0.0,
        )
        row, col = config.ignition_cell
        state.status[row, col] = BURNING
        state.ignition_time[row, col] = 0.0
        return state

    def copy(self) -> "FireState":
        return FireState(self.status.copy(), self.ignition_time.copy(), self.distance.copy(), self.time)

    @property
    def ignited(self) -> np.ndarray:
        return self.status != UNBURNED

    @property
    def burned_area(self) -> int:
        """Number of ignited cells."""
        return int(np.count_nonzero(self.ignited))


def compute_time_step(rates: SpreadRates, cell_length: float, horizon: float) -> tuple[float, int]:
    """Largest dt <= cell_length / max R that divides horizon; returns (dt, steps)."""
    if horizon <= 0:
        raise ValidationError(f"time horizon must be positive, got {horizon}")
    max_rate = rates.max_rate
    if not max_rate > 0:
        raise ValidationError("maximum spread rate is zero; the fire cannot advance")
    dt_max = cell_length / max_rate
    steps = math.ceil(horizon / dt_max)
    if steps > 1 and horizon / (steps - 1) <= dt_max:
        steps -= 1
    return horizon / steps, steps


def _shift(arr: np.ndarray, dr: int, dc: int, fill) -> np.ndarray:
    """out[i, j] = arr[i - dr, j - dc], `fill` where that lies off the grid."""
    ny, nx = arr.shape
    out = np.full(arr.shape, fill, dtype=arr.dtype)
    out[max(dr, 0):ny + min(dr, 0), max(dc, 0):nx + min(dc, 0)] = \
        arr[max(-dr, 0):ny - max(dr, 0), max(-dc, 0):nx - max(dc, 0)]
    return out


def step_fire(state: FireState, rates: SpreadRates, dt: float, cell_length: float,
              t_end: float | None = None, forced: np.ndarray | None = None,
              eligible: np.ndarray | None = None) -> FireState:
    """Advance one time step; t_end defaults to state.time + dt.

    Without `forced`/`eligible` every unburned cell reached by a burning
    neighbour ignites. A replay passes `forced`, cells that ignite this step
    whether reached or not, and `eligible`, the only cells the spread rule may
    ignite. Forced cells inherit spillover from the directions that reached them.
    """
    t_end = state.time + dt if t_end is None else t_end
    status0 = state.status
    burning = status0 == BURNING
    ignited0 = status0 != UNBURNED

    distance = state.distance.copy()
    distance[:, burning] += rates.rates[:, burning] * dt

    spill = np.zeros_like(distance)
    triggered = np.zeros(status0.shape, dtype=bool)
    for k, (dr, dc) in enumerate(DIRECTION_OFFSETS):
        reach = neighbour_distance(k, cell_length)
        fires = burning & (distance[k] >= reach)
        hit = _shift(fires, dr, dc, False) & ~ignited0
        if hit.any():
            spill[k][hit] = _shift(distance[k] - reach, dr, dc, 0.0)[hit]
            triggered |= hit
    if eligible is not None:
        triggered &= eligible
    if forced is not None:
        triggered |= forced & ~ignited0

    status = status0.copy()
    ignition_time = state.ignition_time.copy()
    status[triggered] = BURNING
    ignition_time[triggered] = t_end
    distance[:, triggered] = spill[:, triggered]

    surrounded = np.ones(status0.shape, dtype=bool)
    for dr, dc in DIRECTION_OFFSETS:
        surrounded &= _shift(ignited0, dr, dc, True)
    status[burning & surrounded] = BURNED_DOWN

    return FireState(status, ignition_time, distance, t_end)


def advance(state: FireState, rates: SpreadRates, dt: float, steps: int,
            cell_length: float) -> FireState:
    """Run `steps` steps from state; step k ends at exactly state.time + (k+1) dt."""
    t0 = state.time
    for k in range(steps):
        state = step_fire(state, rates, dt, cell_length, t_end=t0 + (k + 1) * dt)
    return state


def resume(state: FireState, rates: SpreadRates, horizon: float, cell_length: float) -> FireState:
    """Continue a state for `horizon` seconds with a freshly computed time step."""
    dt, steps = compute_time_step(rates, cell_length, horizon)
    return advance(state.copy(), rates, dt, steps, cell_length)


def extract_state_vector(state: FireState, t: float | None = None) -> np.ndarray:
    """Row-major s = (t - t_I) / t for ignited cells, 0 elsewhere."""
    t = state.time if t is None else t
    if not t > 0:
        raise ValidationError(f"state vector needs t > 0, got {t}")
    s = np.zeros(state.status.shape)
    ign = state.ignited
    s[ign] = (t - state.ignition_time[ign]) / t
    return np.clip(s, 0.0, 1.0).reshape(-1)


def state_from_vector(s, t: float, rates: SpreadRates, cell_length: float) -> FireState:
    """Rebuild a restartable state from a (thresholded) state vector at time t.

    Ignition times invert s = (t - t_I) / t and are rounded to the time step
    grid of a run from ignition to t. The automaton is then replayed on that
    grid: cells with s > 0 ignite at their recovered step, inheriting spillover
    from whichever neighbours reached them, and distances accumulate step by
    step. Cells ignited on the final step have s = 0; the spread rule recovers
    them. For an exact vector the rebuilt state equals the original one.
    """
    if not t > 0:
        raise ValidationError(f"restart time must be positive, got {t}")
    shape = rates.r_max.shape
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    if s.size != shape[0] * shape[1]:
        raise ValidationError(f"state vector of length {s.size} does not match grid {shape}")
    s = s.reshape(shape)

    dt, steps = compute_time_step(rates, cell_length, t)
    positive = s > 0
    ignition_step = np.full(shape, -1, dtype=np.int64)
    t_ign = np.clip(t * (1.0 - s[positive]), 0.0, t)
    ignition_step[positive] = np.clip(np.rint(t_ign / dt), 0, steps).astype(np.int64)

    start = ignition_step == 0
    state = FireState(
        status=np.where(start, BURNING, UNBURNED).astype(np.int8),
        ignition_time=np.where(start, 0.0, np.nan),
        distance=np.zeros((N_DIRECTIONS,) + shape),
        time=0.0,
    )
    nowhere = np.zeros(shape, dtype=bool)
    for n in range(1, steps + 1):
        eligible = ~positive if n == steps else nowhere
        state = step_fire(state, rates, dt, cell_length, t_end=n * dt,
                          forced=ignition_step == n, eligible=eligible)
    return state


def simulate(config: FireConfig, rates: SpreadRates, horizon: float | None = None) -> FireState:
    """Run from ignition at t = 0 to `horizon` (default config.sim_time)."""
    horizon = config.sim_time if horizon is None else horizon
    dt, steps = compute_time_step(rates, config.cell_length, horizon)
    logger.debug("simulate: dt=%.4f s, %d steps to t=%.0f s", dt, steps, horizon)
    return advance(FireState.ignite(config), rates, dt, steps, config.cell_length)
