"""POD basis construction and QR-pivoted sensor placement.

The basis Phi holds the leading left singular vectors of the raw (uncentered)
snapshot matrix. Sensors come from column-pivoted Householder QR of Phi^T;
the restricted variant zeroes the rows of inaccessible grid points first so
that pivots keep their global grid index.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from utils.errors import ValidationError
from utils.validators import validate_indices, validate_matrix, validate_positive_int

logger = logging.getLogger("cdeim.reconstruction.basis")

# Singular values below RANK_RTOL * sigma_max count as zero.
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SnapshotMatrix:
    """N x n_s training data, one snapshot per column."""
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", validate_matrix(self.data, "snapshots"))

    @property
    def grid_size(self) -> int:
        return self.data.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]

    def split(self, n_train: int) -> tuple["SnapshotMatrix", "SnapshotMatrix"]:
        """First n_train columns for training, the rest for testing."""
        if not 0 < n_train < self.n_snapshots:
            raise ValidationError(f"n_train must lie in (0, {self.n_snapshots}), got {n_train}")
        return SnapshotMatrix(self.data[:, :n_train]), SnapshotMatrix(self.data[:, n_train:])


@dataclass(frozen=True)
class AccessMask:
    """Candidate sensor locations: True where a sensor may be placed."""
    accessible: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.accessible, dtype=bool).reshape(-1)
        object.__setattr__(self, "accessible", mask)

    @classmethod
    def everywhere(cls, n: int) -> "AccessMask":
        return cls(np.ones(n, dtype=bool))

    @property
    def count(self) -> int:
        return int(self.accessible.sum())


@dataclass
class BasisBundle:
    """Basis Phi, sensor indices (the selection C) and sampled basis Theta = C Phi."""
    phi: np.ndarray
    sensor_indices: np.ndarray
    theta: np.ndarray
    singular_values: np.ndarray = field(repr=False)
    sigma_min: float = 0.0
    full_rank: bool = True

    @property
    def grid_size(self) -> int:
        return self.phi.shape[0]

    @property
    def n_modes(self) -> int:
        return self.phi.shape[1]

    @property
    def n_sensors(self) -> int:
        return self.theta.shape[0]


def _numerical_rank(s: np.ndarray) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > RANK_RTOL * s[0]))


def _fix_signs(phi: np.ndarray) -> np.ndarray:
    """Flip each column so its entry of largest magnitude is positive."""
    rows = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[rows, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    return phi * signs


def compute_pod_basis(snapshots: SnapshotMatrix, m: int) -> np.ndarray:
    """Return the m leading left singular vectors of the snapshot matrix."""
    m = validate_positive_int(m, "m")
    n, n_s = snapshots.data.shape
    if m > min(n, n_s):
        raise ValidationError(f"m={m} exceeds min(N, n_s)={min(n, n_s)}")

    u, s, _ = la.svd(snapshots.data, full_matrices=False)
    rank = _numerical_rank(s)
    if m > rank:
        raise ValidationError(f"m={m} exceeds the numerical rank {rank} of the snapshot matrix")

    energy = np.cumsum(s ** 2) / np.sum(s ** 2)
    logger.debug("POD: N=%d n_s=%d m=%d, captured energy %.6f", n, n_s, m, energy[m - 1])
    return _fix_signs(np.ascontiguousarray(u[:, :m]))


def snapshot_singular_values(snapshots: SnapshotMatrix) -> np.ndarray:
    """Singular values of the snapshot matrix, descending."""
    return la.svdvals(snapshots.data)


def _pivot_order(matrix_t: np.ndarray) -> np.ndarray:
    """Column pivot order of Householder QR with max-residual-norm pivoting."""
    _, piv = la.qr(matrix_t, mode="r", pivoting=True)
    return np.asarray(piv, dtype=np.int64)


def cpqr_select(phi: np.ndarray, r: int) -> np.ndarray:
    """Pick r sensors as the first r pivots of CPQR applied to Phi^T."""
    phi = validate_matrix(phi, "phi")
    r = validate_positive_int(r, "r")
    n, m = phi.shape
    if r > n:
        raise ValidationError(f"cannot place r={r} sensors on a grid of N={n} points")
    if r > m:
        logger.warning("r=%d exceeds m=%d: pivots past the basis rank are not rank-revealing", r, m)
    return _pivot_order(phi.T)[:r].copy()


def restricted_cpqr_select(phi: np.ndarray, mask: AccessMask, r: int) -> np.ndarray:
    """CPQR on Phi with inaccessible rows zeroed; every pick is accessible."""
    phi = validate_matrix(phi, "phi")
    r = validate_positive_int(r, "r")
    n, m = phi.shape
    if mask.accessible.size != n:
        raise ValidationError(f"mask length {mask.accessible.size} does not match N={n}")
    if mask.count < r:
        raise ValidationError(f"only {mask.count} accessible grid points for r={r} sensors")

    masked = phi * mask.accessible[:, None]
    order = _pivot_order(masked.T)
    # Past the rank of the masked basis the pivot order among zero columns is arbitrary.
    selected = order[mask.accessible[order]][:r].copy()

    s = la.svdvals(phi[selected])
    if _numerical_rank(s) < min(r, m):
        logger.warning("restricted CPQR: sampled basis is rank deficient (rank %d < %d)",
                       _numerical_rank(s), min(r, m))
    return selected


def assemble_bundle(phi: np.ndarray, sensor_indices) -> BasisBundle:
    """Build Theta = C Phi by row selection and record its singular values."""
    phi = validate_matrix(phi, "phi")
    idx = validate_indices(sensor_indices, phi.shape[0])
    theta = phi[idx]
    s = la.svdvals(theta) if idx.size else np.zeros(0)
    rank = _numerical_rank(s)
    sigma_min = float(s[rank - 1]) if rank else 0.0
    full_rank = rank == min(theta.shape)
    if not full_rank:
        logger.warning("sampled basis has rank %d < %d", rank, min(theta.shape))
    logger.debug("bundle: N=%d m=%d r=%d sigma_min=%.3e", phi.shape[0], phi.shape[1], idx.size, sigma_min)
    return BasisBundle(phi=phi, sensor_indices=idx, theta=theta, singular_values=s,
                       sigma_min=sigma_min, full_rank=full_rank)


def accessible_interval(grid: np.ndarray, lower: float, upper: float) -> AccessMask:
    """Mask of grid coordinates inside [lower, upper]."""
    grid = np.asarray(grid, dtype=np.float64)
    return AccessMask((grid >= lower) & (grid <= upper))
