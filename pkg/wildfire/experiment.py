"""Fire ensembles, sensor scenarios, reconstruction and two-hour forecasts."""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from benchmarks.harness import CaseResult, failed_case, parallel_map, reconstruct_case
from reconstruction.basis import (
    AccessMask, BasisBundle, SnapshotMatrix, assemble_bundle, compute_pod_basis,
    cpqr_select, restricted_cpqr_select,
)
from reconstruction.metrics import MetricReport, relative_l2
from reconstruction.penalty import BoundsSpec
from reconstruction.solver import PenaltyParams, threshold_reconstruction
from utils.errors import ValidationError
from utils.random_streams import STREAM_SENSORS, substream
from wildfire.automaton import (
    BURNING, compute_time_step, extract_state_vector, resume, simulate, state_from_vector,
)
from wildfire.wind import FireConfig, WindDraws, member_rates

logger = logging.getLogger("cdeim.wildfire.experiment")

FIRE_BOUNDS = BoundsSpec(0.0, 1.0)
SCENARIOS = ("restricted_cpqr_lines", "random_burning")
# fire runs start the penalty ladder one decade higher
FIRE_SOLVER_DEFAULTS = PenaltyParams(lambda_init=1e-6)


@dataclass
class MemberRun:
    """One simulated ensemble member: one-hour vector, optional two-hour truth."""
    index: int
    draws: WindDraws
    dt: float
    steps: int
    burned_area: int
    vector_1h: np.ndarray
    burning_1h: np.ndarray
    vector_2h: np.ndarray | None = None

    def metadata(self) -> dict:
        return {
            "member": self.index,
            "a": self.draws.a,
            "b": self.draws.b,
            "phi1": self.draws.phi1,
            "phi2": self.draws.phi2,
            "dt": self.dt,
            "steps": self.steps,
            "burned_area": self.burned_area,
        }


@dataclass
class FireEnsemble:
    config: FireConfig
    members: list[MemberRun]

    @property
    def train(self) -> SnapshotMatrix:
        return SnapshotMatrix(np.column_stack([m.vector_1h for m in self.members[:self.config.n_train]]))

    @property
    def test_members(self) -> list[MemberRun]:
        return self.members[self.config.n_train:]

    def snapshots(self, two_hour: bool = False) -> np.ndarray:
        """N x n_sims matrix of state vectors; two-hour columns exist for test members only."""
        if two_hour:
            return np.column_stack([m.vector_2h for m in self.test_members])
        return np.column_stack([m.vector_1h for m in self.members])

    def metadata_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([m.metadata() for m in self.members])
        frame.insert(1, "seed", self.config.seed)
        frame["split"] = ["train" if m.index < self.config.n_train else "test" for m in self.members]
        return frame


def simulate_member(config: FireConfig, index: int, forecast: bool = False) -> MemberRun:
    """Simulate member `index` to sim_time, and on to forecast_time if asked."""
    draws, rates = member_rates(config, index)
    dt, steps = compute_time_step(rates, config.cell_length, config.sim_time)
    state = simulate(config, rates)
    run = MemberRun(
        index=index, draws=draws, dt=dt, steps=steps, burned_area=state.burned_area,
        vector_1h=extract_state_vector(state), burning_1h=(state.status == BURNING).reshape(-1),
    )
    if forecast:
        later = resume(state, rates, config.forecast_time - config.sim_time, config.cell_length)
        run.vector_2h = extract_state_vector(later)
    return run


def generate_ensemble(config: FireConfig, threads: int = 1) -> FireEnsemble:
    """All members to sim_time; test members also to forecast_time."""
    logger.info("Simulating %d fires on a %d x %d grid", config.n_simulations, config.nx, config.ny)
    members = parallel_map(
        lambda i: simulate_member(config, i, forecast=i >= config.n_train),
        range(config.n_simulations), threads, desc="fire ensemble",
    )
    return FireEnsemble(config, members)


def line_mask(config: FireConfig) -> AccessMask:
    """Cells whose row contains one of the sensor lines y = const."""
    mask = np.zeros(config.shape, dtype=bool)
    for y in config.sensor_lines:
        mask[int(y // config.cell_length), :] = True
    return AccessMask(mask.reshape(-1))


def random_burning_sensors(config: FireConfig, burning: np.ndarray, r: int, case: int) -> np.ndarray:
    """r distinct cells drawn from those burning in this test case."""
    candidates = np.flatnonzero(burning)
    if candidates.size < r:
        raise ValidationError(f"only {candidates.size} burning cells for r={r} sensors")
    gen = substream(config.seed, STREAM_SENSORS | (r << 8), case)
    return gen.choice(candidates, size=r, replace=False)


def forecast_error(config: FireConfig, member: MemberRun, u_rec: np.ndarray) -> float:
    """Relative error at forecast_time of the CA restarted from a reconstruction."""
    _, rates = member_rates(config, member.index)
    # one time step less rounding slack; s of a cell ignited at t - dt stays above it
    floor = member.dt / config.sim_time * (1.0 - 1e-9)
    s = threshold_reconstruction(u_rec, FIRE_BOUNDS, floor_epsilon=floor)
    restart = state_from_vector(s, config.sim_time, rates, config.cell_length)
    predicted = resume(restart, rates, config.forecast_time - config.sim_time, config.cell_length)
    return relative_l2(member.vector_2h, extract_state_vector(predicted))


def _fixed_bundle(config: FireConfig, phi: np.ndarray, r: int) -> BasisBundle:
    if config.restricted:
        sensors = restricted_cpqr_select(phi, line_mask(config), r)
    else:
        sensors = cpqr_select(phi, r)
    return assemble_bundle(phi, sensors)


def run_fire_experiment(config: FireConfig, scenario: str, sensor_counts: list[int],
                        params: PenaltyParams = FIRE_SOLVER_DEFAULTS, threads: int = 1,
                        forecast: bool = True, ensemble: FireEnsemble | None = None) -> MetricReport:
    """Reconstruct every test member's one-hour state and optionally forecast to two hours."""
    if scenario not in SCENARIOS:
        raise ValidationError(f"unknown sensor scenario {scenario!r}, expected one of {SCENARIOS}")
    ensemble = ensemble or generate_ensemble(config, threads)
    train = ensemble.train
    tests = ensemble.test_members
    records = []

    for r in sensor_counts:
        phi = compute_pod_basis(train, r)
        shared = _fixed_bundle(config, phi, r) if scenario == "restricted_cpqr_lines" else None

        def run_case(case: int, phi=phi, shared=shared, r=r) -> CaseResult:
            member = tests[case]
            if shared is None:
                try:
                    bundle = assemble_bundle(phi, random_burning_sensors(config, member.burning_1h, r, case))
                except ValidationError as exc:
                    logger.warning("case %d: %s", case, exc)
                    return failed_case(r, case, "insufficient_sensors")
            else:
                bundle = shared
            result = reconstruct_case(bundle, member.vector_1h, FIRE_BOUNDS, params, r, case)
            if forecast:
                for rec in result.records:
                    if rec.status == "ok":
                        rec.forecast_error = forecast_error(config, member, result.reconstructions[rec.method])
            return result

        label = "forecast" if forecast else "recon"
        for result in parallel_map(run_case, range(len(tests)), threads, desc=f"fire {label} r={r}"):
            records.extend(result.records)
        logger.info("r=%d (%s): %d test cases done", r, scenario, len(tests))

    return MetricReport(records)
