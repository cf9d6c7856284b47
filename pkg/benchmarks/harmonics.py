"""Random-harmonics benchmark: bounded smooth functions on [0, 2*pi].

Each function is g_j(x) = sum_k a_kj cos(k x + phi_kj), normalized by its
maximum absolute value on the grid so that every column lies in [-1, 1].
Sensors are confined to [eta, 2*pi - eta] unless `restricted` is off.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from benchmarks.harness import CaseResult, parallel_map, reconstruct_case
from reconstruction.basis import (
    AccessMask, SnapshotMatrix, accessible_interval, assemble_bundle,
    compute_pod_basis, restricted_cpqr_select,
)
from reconstruction.metrics import MetricReport, ensemble_stats, relative_l2
from reconstruction.penalty import BoundsSpec
from reconstruction.solver import PenaltyParams, deim_solve, solve_at_lambda
from utils.errors import CDeimError, ValidationError
from utils.random_streams import STREAM_HARMONICS, box_muller, substream, uniform_angles

logger = logging.getLogger("cdeim.benchmarks.harmonics")

HARMONIC_BOUNDS = BoundsSpec(-1.0, 1.0)


@dataclass(frozen=True)
class HarmonicsConfig:
    """Ensemble size, grid and sensor-domain margin of the benchmark."""
    n_functions: int = 1000
    n_train: int = 800
    grid_points: int = 1000
    n_terms: int = 20
    eta: float = 0.1 * math.pi
    seed: int = 0
    # True: a_kj ~ N(0, 1/k) with 1/k the variance; False: 1/k is the standard deviation
    amplitude_variance: bool = True
    restricted: bool = True

    def __post_init__(self):
        if not 0 < self.n_train < self.n_functions:
            raise ValidationError(
                f"n_train must lie in (0, n_functions={self.n_functions}), got {self.n_train}")
        if self.grid_points < 2:
            raise ValidationError(f"grid_points must be at least 2, got {self.grid_points}")
        if self.n_terms < 1:
            raise ValidationError(f"n_terms must be positive, got {self.n_terms}")
        if not 0 <= self.eta < math.pi:
            raise ValidationError(f"eta must lie in [0, pi), got {self.eta}")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.grid_points)

    @property
    def n_test(self) -> int:
        return self.n_functions - self.n_train

    def access_mask(self) -> AccessMask:
        if not self.restricted:
            return AccessMask.everywhere(self.grid_points)
        return accessible_interval(self.grid, self.eta, 2.0 * math.pi - self.eta)

    def to_dict(self) -> dict:
        return {
            "n_functions": self.n_functions,
            "n_train": self.n_train,
            "grid_points": self.grid_points,
            "n_terms": self.n_terms,
            "eta": self.eta,
            "seed": self.seed,
            "amplitude_variance": self.amplitude_variance,
            "restricted": self.restricted,
        }


def harmonic_function(config: HarmonicsConfig, j: int) -> np.ndarray:
    """Column j of the ensemble, drawn from its own substream."""
    gen = substream(config.seed, STREAM_HARMONICS, j)
    k = np.arange(1, config.n_terms + 1, dtype=np.float64)
    scale = np.sqrt(1.0 / k) if config.amplitude_variance else 1.0 / k
    amplitudes = box_muller(gen, config.n_terms) * scale
    phases = uniform_angles(gen, config.n_terms)

    g = np.cos(np.outer(config.grid, k) + phases) @ amplitudes
    return g / np.max(np.abs(g))


def generate_harmonics(config: HarmonicsConfig) -> tuple[SnapshotMatrix, SnapshotMatrix]:
    """Train and test snapshot matrices, one normalized function per column."""
    data = np.empty((config.grid_points, config.n_functions))
    for j in range(config.n_functions):
        data[:, j] = harmonic_function(config, j)
    logger.info("Generated %d harmonic functions on %d grid points (seed %d)",
                config.n_functions, config.grid_points, config.seed)
    return SnapshotMatrix(data).split(config.n_train)


def _harmonics_bundle(config: HarmonicsConfig, train: SnapshotMatrix, r: int):
    phi = compute_pod_basis(train, r)
    sensors = restricted_cpqr_select(phi, config.access_mask(), r)
    return assemble_bundle(phi, sensors)


def run_harmonics_experiment(config: HarmonicsConfig, sensor_counts: list[int],
                             params: PenaltyParams = PenaltyParams(), threads: int = 1,
                             data: tuple[SnapshotMatrix, SnapshotMatrix] | None = None) -> MetricReport:
    """DEIM, thresholded DEIM and C-DEIM on every test function for each r (m = r)."""
    train, test = data if data is not None else generate_harmonics(config)
    records = []
    for r in sensor_counts:
        bundle = _harmonics_bundle(config, train, r)
        logger.info("r=%d: sensors placed, sigma_min(Theta)=%.3e", r, bundle.sigma_min)

        def run_case(case: int, bundle=bundle, r=r) -> CaseResult:
            return reconstruct_case(bundle, test.data[:, case], HARMONIC_BOUNDS, params, r, case)

        for result in parallel_map(run_case, range(test.n_snapshots), threads, desc=f"harmonics r={r}"):
            records.extend(result.records)

    report = MetricReport(records)
    failed = sum(1 for rec in records if rec.status != "ok")
    if failed:
        logger.warning("%d case/method pairs failed and are excluded from the means", failed)
    return report


@dataclass
class _SweepCase:
    residuals: list[float] = field(default_factory=list)
    errors: list[float] = field(default_factory=list)


def run_lambda_sweep(config: HarmonicsConfig, r: int, lambdas: list[float],
                     params: PenaltyParams = PenaltyParams(), threads: int = 1,
                     data: tuple[SnapshotMatrix, SnapshotMatrix] | None = None) -> pd.DataFrame:
    """Mean relative residual and error of fixed-lambda solves over the test set.

    Lambdas are visited in increasing order per case, each solve warm-started
    from the previous one, as along the C-DEIM ladder.
    """
    lambdas = sorted(float(lam) for lam in lambdas)
    if not lambdas or lambdas[0] < 0:
        raise ValidationError("lambda sweep needs at least one nonnegative value")
    train, test = data if data is not None else generate_harmonics(config)
    bundle = _harmonics_bundle(config, train, r)

    def run_case(case: int) -> _SweepCase:
        u_true = test.data[:, case]
        y = u_true[bundle.sensor_indices]
        alpha = deim_solve(bundle, y)
        out = _SweepCase()
        for lam in lambdas:
            try:
                outcome = solve_at_lambda(bundle, y, HARMONIC_BOUNDS, lam, params, alpha_init=alpha)
            except CDeimError as exc:
                logger.warning("sweep case %d lambda=%.3e failed: %s", case, lam, exc)
                out.residuals.append(math.nan)
                out.errors.append(math.nan)
                continue
            alpha = outcome.alpha
            out.residuals.append(outcome.obs_residual / np.linalg.norm(y))
            out.errors.append(relative_l2(u_true, outcome.reconstruction))
        return out

    cases = parallel_map(run_case, range(test.n_snapshots), threads, desc=f"lambda sweep r={r}")
    rows = []
    for i, lam in enumerate(lambdas):
        residuals = [c.residuals[i] for c in cases if not math.isnan(c.residuals[i])]
        errors = [c.errors[i] for c in cases if not math.isnan(c.errors[i])]
        row = {"r": r, "lambda": lam, "n_failed": len(cases) - len(errors)}
        row["mean_residual"], row["residual_ci95"] = ensemble_stats(residuals) if residuals else (math.nan, math.nan)
        row["mean_error"], row["error_ci95"] = ensemble_stats(errors) if errors else (math.nan, math.nan)
        rows.append(row)
    return pd.DataFrame(rows, columns=["r", "lambda", "n_failed", "mean_residual",
                                       "residual_ci95", "mean_error", "error_ci95"])
