"""Reconstruction error metrics and ensemble summaries."""

import math
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from utils.errors import ValidationError

Z_95 = 1.96

SUMMARY_COLUMNS = [
    "r", "method", "n_cases", "n_failed",
    "mean_error", "error_ci95", "mean_residual", "residual_ci95",
]


def relative_l2(u_true, u_rec) -> float:
    """|u_rec - u_true| / |u_true|."""
    u_true = np.asarray(u_true, dtype=np.float64)
    u_rec = np.asarray(u_rec, dtype=np.float64)
    norm = np.linalg.norm(u_true)
    if norm == 0:
        raise ValidationError("relative L2 error undefined for a zero-norm truth")
    return float(np.linalg.norm(u_rec - u_true) / norm)


def relative_obs_residual(theta, alpha, y) -> float:
    """|Theta alpha - y| / |y|."""
    y = np.asarray(y, dtype=np.float64)
    norm = np.linalg.norm(y)
    if norm == 0:
        raise ValidationError("relative observation residual undefined for zero observations")
    return float(np.linalg.norm(np.asarray(theta) @ np.asarray(alpha) - y) / norm)


def ensemble_stats(values) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width 1.96 * sd / sqrt(n)."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("ensemble statistics need at least one value")
    mean = float(arr.mean())
    if arr.size == 1:
        return mean, 0.0
    sd = float(arr.std(ddof=1))
    return mean, Z_95 * sd / math.sqrt(arr.size)


@dataclass
class CaseRecord:
    """Metrics for one test case reconstructed by one method."""
    r: int
    method: str
    case: int
    relative_error: float = math.nan
    relative_residual: float = math.nan
    lambda_opt: float = math.nan
    bound_violation: float = math.nan
    forecast_error: float = math.nan
    status: str = "ok"


@dataclass
class MetricReport:
    """Per-case records plus per-(r, method) ensemble summaries."""
    records: list[CaseRecord]

    def cases_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(rec) for rec in self.records], columns=list(CaseRecord.__dataclass_fields__))

    def summary_frame(self) -> pd.DataFrame:
        rows = []
        frame = self.cases_frame()
        if frame.empty:
            return pd.DataFrame(columns=SUMMARY_COLUMNS)
        for (r, method), group in frame.groupby(["r", "method"], sort=False):
            good = group[group["status"] == "ok"]
            row = {"r": int(r), "method": method, "n_cases": len(group),
                   "n_failed": int(len(group) - len(good))}
            for col, mean_key, ci_key in (
                ("relative_error", "mean_error", "error_ci95"),
                ("relative_residual", "mean_residual", "residual_ci95"),
                ("forecast_error", "mean_forecast_error", "forecast_ci95"),
            ):
                values = good[col].dropna()
                if len(values):
                    row[mean_key], row[ci_key] = ensemble_stats(values)
                elif col != "forecast_error":
                    row[mean_key], row[ci_key] = math.nan, math.nan
            rows.append(row)
        summary = pd.DataFrame(rows)
        ordered = SUMMARY_COLUMNS + [c for c in summary.columns if c not in SUMMARY_COLUMNS]
        return summary[ordered]

    def mean(self, r: int, method: str, column: str = "mean_error") -> float:
        summary = self.summary_frame()
        row = summary[(summary["r"] == r) & (summary["method"] == method)]
        if row.empty:
            raise KeyError(f"no summary for r={r}, method={method}")
        return float(row.iloc[0][column])
