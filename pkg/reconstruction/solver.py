"""DEIM and constrained DEIM solvers.

C-DEIM minimizes f(alpha) = 1/2 |Theta alpha - y|^2 + lam * P(alpha). The
penalty parameter is grown geometrically from lambda_init until P < delta,
then refined by midpoint bisection; each fixed-lambda problem is solved by
pure Newton iterations warm-started from the previous iterate.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from reconstruction.basis import BasisBundle
from reconstruction.penalty import (
    CUBIC, BoundsSpec, RangePenalty, bound_violation, total_penalty,
)
from utils.errors import ConvergenceError, InfeasibleError, NumericalError, ValidationError
from utils.validators import validate_vector

logger = logging.getLogger("cdeim.reconstruction.solver")

PINV_RTOL = 1e-12
TIKHONOV_SCALE = 1e-12


@dataclass(frozen=True)
class PenaltyParams:
    """Tolerances and schedule of the penalty continuation."""
    lambda_init: float = 1e-7
    gamma: float = 10.0
    delta: float = 1e-7
    tau: float = 1e-10
    tau_lambda: float = 0.1
    max_newton_iters: int = 100
    lambda_cap: float = 1e12

    def __post_init__(self):
        for name in ("lambda_init", "delta", "tau", "tau_lambda", "lambda_cap"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive and finite, got {value}")
        if not self.gamma > 1:
            raise ValidationError(f"gamma must exceed 1, got {self.gamma}")
        if int(self.max_newton_iters) != self.max_newton_iters or self.max_newton_iters < 1:
            raise ValidationError(f"max_newton_iters must be a positive integer, got {self.max_newton_iters}")
        if not self.lambda_init < self.lambda_cap:
            raise ValidationError("lambda_init must be below lambda_cap")

    def to_dict(self) -> dict:
        return {
            "lambda_init": self.lambda_init,
            "gamma": self.gamma,
            "delta": self.delta,
            "tau": self.tau,
            "tau_lambda": self.tau_lambda,
            "max_newton_iters": self.max_newton_iters,
            "lambda_cap": self.lambda_cap,
        }


@dataclass
class NewtonResult:
    alpha: np.ndarray
    iterations: int


@dataclass
class LadderStep:
    """One solve along the continuation: phase is growth, bisection or final."""
    lam: float
    penalty: float
    phase: str


@dataclass
class SolveOutcome:
    """C-DEIM result with the diagnostics used by reports and property checks."""
    alpha: np.ndarray
    reconstruction: np.ndarray
    lambda_opt: float
    penalty_value: float
    obs_residual: float
    residual_bound: float
    newton_iterations_total: int
    bisection_steps: int
    bound_violation_max: float
    history: list[LadderStep] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "lambda_opt": self.lambda_opt,
            "penalty_value": self.penalty_value,
            "obs_residual": self.obs_residual,
            "residual_bound": self.residual_bound,
            "newton_iterations_total": self.newton_iterations_total,
            "bisection_steps": self.bisection_steps,
            "bound_violation_max": self.bound_violation_max,
        }


class PenalizedCost:
    """f_lambda and its derivatives with Theta^T Theta and Theta^T y cached."""

    def __init__(self, bundle: BasisBundle, y: np.ndarray, bounds: BoundsSpec,
                 penalty: RangePenalty = CUBIC):
        self.bundle = bundle
        self.y = validate_vector(y, "y", bundle.n_sensors)
        self.bounds = bounds
        self.penalty = penalty
        self.gram = bundle.theta.T @ bundle.theta
        self.rhs = bundle.theta.T @ self.y

    def evaluate(self, alpha: np.ndarray, lam: float):
        """Return (f, grad, hess, penalty_eval) at alpha."""
        phi = self.bundle.phi
        pen = total_penalty(alpha, phi, self.bounds, self.penalty)
        residual = self.bundle.theta @ alpha - self.y
        f = 0.5 * float(residual @ residual) + lam * pen.value
        grad = self.gram @ alpha - self.rhs + lam * pen.gradient

        hess = self.gram.copy()
        active = pen.hess_diag > 0
        if lam > 0 and active.any():
            phi_a = phi[active]
            hess += lam * (phi_a.T @ (pen.hess_diag[active, None] * phi_a))
        return f, grad, hess, pen


def deim_solve(bundle: BasisBundle, y) -> np.ndarray:
    """Minimum-norm least-squares coefficients alpha = Theta^+ y."""
    y = validate_vector(y, "y", bundle.n_sensors)
    pinv, rank = la.pinv(bundle.theta, atol=0.0, rtol=PINV_RTOL, return_rank=True)
    if rank < min(bundle.theta.shape):
        logger.warning("DEIM: sampled basis rank %d < %d, pseudo-inverse truncated",
                       rank, min(bundle.theta.shape))
    return pinv @ y


def cost_and_derivatives(alpha, lam: float, bundle: BasisBundle, y, bounds: BoundsSpec,
                         penalty: RangePenalty = CUBIC):
    """Penalized cost f, gradient and Hessian Theta^T Theta + lam Phi^T D Phi."""
    if lam < 0:
        raise ValidationError(f"penalty parameter must be nonnegative, got {lam}")
    alpha = validate_vector(alpha, "alpha", bundle.n_modes)
    f, grad, hess, _ = PenalizedCost(bundle, y, bounds, penalty).evaluate(alpha, lam)
    return f, grad, hess


def _newton_step(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Solve hess @ step = grad by Cholesky, shifting by mu*I on failure."""
    try:
        factor = la.cho_factor(hess, lower=True, check_finite=False)
        return la.cho_solve(factor, grad, check_finite=False)
    except la.LinAlgError:
        pass
    m = hess.shape[0]
    mu = TIKHONOV_SCALE * float(np.trace(hess)) / m
    if not mu > 0:
        raise NumericalError("Hessian is singular and has no positive trace to regularize with")
    logger.warning("Newton: Cholesky failed, retrying with Tikhonov shift %.3e", mu)
    try:
        factor = la.cho_factor(hess + mu * np.eye(m), lower=True, check_finite=False)
        return la.cho_solve(factor, grad, check_finite=False)
    except la.LinAlgError as exc:
        raise NumericalError(f"Hessian singular after Tikhonov shift {mu:.3e}") from exc


def _newton(cost: PenalizedCost, lam: float, alpha_init: np.ndarray,
            params: PenaltyParams) -> NewtonResult:
    alpha = np.array(alpha_init, dtype=np.float64)
    for k in range(1, params.max_newton_iters + 1):
        _, grad, hess, _ = cost.evaluate(alpha, lam)
        step = _newton_step(hess, grad)
        alpha_next = alpha - step
        if np.linalg.norm(step) <= params.tau:
            return NewtonResult(alpha_next, k)
        alpha = alpha_next
    raise ConvergenceError(
        f"Newton did not converge in {params.max_newton_iters} iterations at lambda={lam:.3e}",
        alpha=alpha, iterations=params.max_newton_iters,
    )


def newton_solve(lam: float, alpha_init, bundle: BasisBundle, y, bounds: BoundsSpec,
                 params: PenaltyParams, penalty: RangePenalty = CUBIC) -> NewtonResult:
    """Minimize f_lambda by pure Newton iterations from alpha_init."""
    if lam < 0:
        raise ValidationError(f"penalty parameter must be nonnegative, got {lam}")
    if lam == 0 and not bundle.full_rank:
        raise ValidationError("lambda = 0 requires a full-rank sampled basis")
    alpha_init = validate_vector(alpha_init, "alpha_init", bundle.n_modes)
    return _newton(PenalizedCost(bundle, y, bounds, penalty), lam, alpha_init, params)


def _outcome(cost: PenalizedCost, alpha: np.ndarray, lam: float, newton_total: int,
             bisection_steps: int, history: list[LadderStep]) -> SolveOutcome:
    bundle = cost.bundle
    pen = total_penalty(alpha, bundle.phi, cost.bounds, cost.penalty)
    obs_residual = float(np.linalg.norm(bundle.theta @ alpha - cost.y))
    if lam == 0:
        residual_bound = 0.0
    elif bundle.sigma_min > 0:
        residual_bound = lam / bundle.sigma_min * float(np.linalg.norm(pen.gradient))
    else:
        residual_bound = math.inf
    return SolveOutcome(
        alpha=alpha,
        reconstruction=pen.reconstruction,
        lambda_opt=lam,
        penalty_value=pen.value,
        obs_residual=obs_residual,
        residual_bound=residual_bound,
        newton_iterations_total=newton_total,
        bisection_steps=bisection_steps,
        bound_violation_max=bound_violation(pen.reconstruction, cost.bounds),
        history=history,
    )


def cdeim_solve(bundle: BasisBundle, y, bounds: BoundsSpec, params: PenaltyParams = PenaltyParams(),
                penalty: RangePenalty = CUBIC) -> SolveOutcome:
    """Constrained reconstruction with the smallest penalty parameter meeting P < delta."""
    cost = PenalizedCost(bundle, y, bounds, penalty)
    alpha = deim_solve(bundle, cost.y)
    p = total_penalty(alpha, bundle.phi, bounds, penalty).value
    history = [LadderStep(0.0, p, "deim")]
    if p < params.delta:
        return _outcome(cost, alpha, 0.0, 0, 0, history)

    newton_total = 0

    def solve(lam: float, start: np.ndarray, phase: str):
        nonlocal newton_total
        result = _newton(cost, lam, start, params)
        newton_total += result.iterations
        value = total_penalty(result.alpha, bundle.phi, bounds, penalty).value
        history.append(LadderStep(lam, value, phase))
        logger.debug("%s: lambda=%.4e P=%.4e (%d Newton its)", phase, lam, value, result.iterations)
        return result.alpha, value

    lam = params.lambda_init
    while p >= params.delta:
        lam *= params.gamma
        if lam > params.lambda_cap:
            raise InfeasibleError(
                f"penalty parameter exceeded cap {params.lambda_cap:.1e} with P={p:.3e} >= delta; "
                "the constraint set is likely empty for this basis",
                lam=lam, penalty=p,
            )
        alpha, p = solve(lam, alpha, "growth")

    lower, upper = lam / params.gamma, lam
    steps = 0
    while upper - lower > params.tau_lambda:
        mid = 0.5 * (lower + upper)
        alpha, p = solve(mid, alpha, "bisection")
        if p >= params.delta:
            lower = mid
        else:
            upper = mid
        steps += 1

    alpha, _ = solve(upper, alpha, "final")
    return _outcome(cost, alpha, upper, newton_total, steps, history)


def solve_at_lambda(bundle: BasisBundle, y, bounds: BoundsSpec, lam: float,
                    params: PenaltyParams = PenaltyParams(), alpha_init=None,
                    penalty: RangePenalty = CUBIC) -> SolveOutcome:
    """Single Newton solve at a fixed penalty parameter (DEIM start unless given)."""
    cost = PenalizedCost(bundle, y, bounds, penalty)
    start = deim_solve(bundle, cost.y) if alpha_init is None else validate_vector(
        alpha_init, "alpha_init", bundle.n_modes)
    if lam == 0:
        return _outcome(cost, start, 0.0, 0, 0, [])
    result = _newton(cost, lam, start, params)
    return _outcome(cost, result.alpha, lam, result.iterations, 0, [])


def threshold_reconstruction(u, bounds: BoundsSpec, floor_epsilon: float = 0.0) -> np.ndarray:
    """Clamp to [u_min, u_max]; entries within floor_epsilon above u_min snap to u_min."""
    if floor_epsilon < 0:
        raise ValidationError(f"floor_epsilon must be nonnegative, got {floor_epsilon}")
    out = np.clip(np.asarray(u, dtype=np.float64), bounds.u_min, bounds.u_max)
    if floor_epsilon > 0:
        out[(out > bounds.u_min) & (out < bounds.u_min + floor_epsilon)] = bounds.u_min
    return out
