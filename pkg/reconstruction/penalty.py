"""Range-constraint penalties and the total penalty over a reconstruction.

A penalty p acts componentwise on u = Phi @ alpha. Any admissible p must be
nonnegative, convex and C^2 with Lipschitz p'', vanish on [u_min, u_max],
decrease below u_min and increase above u_max. Only the piecewise cubic is
shipped; other penalties subclass `RangePenalty`.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from utils.errors import ValidationError


@dataclass(frozen=True)
class BoundsSpec:
    """Admissible range [u_min, u_max] of the reconstructed field."""
    u_min: float
    u_max: float

    def __post_init__(self):
        if not (math.isfinite(self.u_min) and math.isfinite(self.u_max)):
            raise ValidationError(f"bounds must be finite, got [{self.u_min}, {self.u_max}]")
        if not self.u_min < self.u_max:
            raise ValidationError(f"bounds require u_min < u_max, got [{self.u_min}, {self.u_max}]")

    def contains(self, u: np.ndarray) -> np.ndarray:
        return (u >= self.u_min) & (u <= self.u_max)


@dataclass
class PenaltyEval:
    """Total penalty P(alpha), its gradient and the diagonal D of p''(u)."""
    value: float
    gradient: np.ndarray
    hess_diag: np.ndarray
    reconstruction: np.ndarray


class RangePenalty(ABC):
    """Abstract base for admissible componentwise penalties."""

    name: str = "base"
    # Lipschitz constant of p''
    lipschitz: float = 1.0

    @abstractmethod
    def evaluate(self, u: np.ndarray, bounds: BoundsSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (p(u), p'(u), p''(u)) elementwise."""
        ...

    @abstractmethod
    def deviation_bound(self, delta: float) -> float:
        """Largest single-entry violation compatible with P < delta."""
        ...


class CubicPenalty(RangePenalty):
    """p(u) = -(u-u_min)^3/6 below, 0 inside, (u-u_max)^3/6 above the range."""

    name = "cubic"
    lipschitz = 1.0

    def evaluate(self, u, bounds):
        u = np.asarray(u, dtype=np.float64)
        value = np.zeros_like(u)
        d1 = np.zeros_like(u)
        d2 = np.zeros_like(u)

        below = u < bounds.u_min
        e = u[below] - bounds.u_min
        value[below] = -(e ** 3) / 6.0
        d1[below] = -(e ** 2) / 2.0
        d2[below] = -e

        above = u > bounds.u_max
        e = u[above] - bounds.u_max
        value[above] = (e ** 3) / 6.0
        d1[above] = (e ** 2) / 2.0
        d2[above] = e
        return value, d1, d2

    def deviation_bound(self, delta: float) -> float:
        return (6.0 * delta) ** (1.0 / 3.0)


CUBIC = CubicPenalty()


def p_cubic(u: float, bounds: BoundsSpec) -> tuple[float, float, float]:
    """Scalar piecewise cubic penalty with its first and second derivatives."""
    if not math.isfinite(u):
        raise ValidationError(f"penalty argument must be finite, got {u}")
    value, d1, d2 = CUBIC.evaluate(np.array([u]), bounds)
    return float(value[0]), float(d1[0]), float(d2[0])


def total_penalty(alpha, phi: np.ndarray, bounds: BoundsSpec,
                  penalty: RangePenalty = CUBIC) -> PenaltyEval:
    """Evaluate P(alpha) = sum_i p([Phi alpha]_i) with gradient Phi^T p'(Phi alpha)."""
    alpha = np.asarray(alpha, dtype=np.float64).reshape(-1)
    if phi.ndim != 2 or phi.shape[1] != alpha.size:
        raise ValidationError(
            f"dimension mismatch: phi {phi.shape} vs alpha of length {alpha.size}")
    u = phi @ alpha
    value, d1, d2 = penalty.evaluate(u, bounds)
    return PenaltyEval(
        value=float(value.sum()),
        gradient=phi.T @ d1,
        hess_diag=d2,
        reconstruction=u,
    )


def bound_violation(u: np.ndarray, bounds: BoundsSpec) -> float:
    """Maximum distance of any entry of u outside [u_min, u_max]."""
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        return 0.0
    return float(max(0.0, np.max(bounds.u_min - u), np.max(u - bounds.u_max)))
