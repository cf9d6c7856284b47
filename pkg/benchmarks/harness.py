"""Per-case reconstruction and parallel fan-out shared by the benchmarks."""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, TypeVar

import numpy as np
from tqdm import tqdm

from reconstruction.basis import BasisBundle
from reconstruction.metrics import CaseRecord, relative_l2
from reconstruction.penalty import BoundsSpec, bound_violation
from reconstruction.solver import PenaltyParams, cdeim_solve, deim_solve, threshold_reconstruction
from utils.errors import CDeimError

logger = logging.getLogger("cdeim.benchmarks.harness")

METHODS = ("deim", "deim_thresholded", "cdeim")

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class CaseResult:
    """Metric records and reconstructions of one test case, keyed by method."""
    records: list[CaseRecord]
    reconstructions: dict[str, np.ndarray] = field(default_factory=dict)


def _relative_residual(u_rec: np.ndarray, bundle: BasisBundle, y: np.ndarray) -> float:
    norm = np.linalg.norm(y)
    if norm == 0:
        return float("nan")
    return float(np.linalg.norm(u_rec[bundle.sensor_indices] - y) / norm)


def reconstruct_case(bundle: BasisBundle, u_true: np.ndarray, bounds: BoundsSpec,
                     params: PenaltyParams, r: int, case: int) -> CaseResult:
    """Reconstruct one truth vector from its sensor samples with every method."""
    y = u_true[bundle.sensor_indices]
    result = CaseResult(records=[])

    u_deim = bundle.phi @ deim_solve(bundle, y)
    u_thr = threshold_reconstruction(u_deim, bounds)
    for method, u_rec in (("deim", u_deim), ("deim_thresholded", u_thr)):
        result.records.append(CaseRecord(
            r=r, method=method, case=case,
            relative_error=relative_l2(u_true, u_rec),
            relative_residual=_relative_residual(u_rec, bundle, y),
            lambda_opt=0.0,
            bound_violation=bound_violation(u_rec, bounds),
        ))
        result.reconstructions[method] = u_rec

    try:
        outcome = cdeim_solve(bundle, y, bounds, params)
    except CDeimError as exc:
        logger.warning("case %d (r=%d): C-DEIM failed: %s", case, r, exc)
        result.records.append(CaseRecord(r=r, method="cdeim", case=case, status=exc.category))
        return result

    result.records.append(CaseRecord(
        r=r, method="cdeim", case=case,
        relative_error=relative_l2(u_true, outcome.reconstruction),
        relative_residual=_relative_residual(outcome.reconstruction, bundle, y),
        lambda_opt=outcome.lambda_opt,
        bound_violation=outcome.bound_violation_max,
    ))
    result.reconstructions["cdeim"] = outcome.reconstruction
    return result


def failed_case(r: int, case: int, status: str) -> CaseResult:
    """Records marking every method of a case as failed."""
    return CaseResult(records=[CaseRecord(r=r, method=m, case=case, status=status) for m in METHODS])


def _show_progress() -> bool:
    """Progress bars only on an interactive stderr whose console level is INFO or lower."""
    if not sys.stderr.isatty():
        return False
    # RotatingFileHandler subclasses StreamHandler, hence the exact type check
    consoles = [h for h in logging.getLogger("cdeim").handlers if type(h) is logging.StreamHandler]
    return any(h.level <= logging.INFO for h in consoles)


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1,
                 desc: str = "", total: int | None = None) -> list[R]:
    """Map func over items, results in input order regardless of thread count."""
    items = list(items)
    bar = tqdm(total=total or len(items), desc=desc, leave=False, disable=not _show_progress())
    try:
        if threads <= 1:
            out = []
            for item in items:
                out.append(func(item))
                bar.update(1)
            return out
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = []
            for res in pool.map(func, items):
                out.append(res)
                bar.update(1)
            return out
    finally:
        bar.close()
