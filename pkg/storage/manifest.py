"""Run directories: JSON manifest plus metric CSVs."""

import json
import logging
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

from reconstruction.metrics import MetricReport

logger = logging.getLogger("cdeim.storage.manifest")

MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary.csv"
CASES_NAME = "cases.csv"
TOOLKIT_VERSION = "1.0.0"
FLOAT_FORMAT = "%.10g"


def library_versions() -> dict:
    return {
        "cdeim": TOOLKIT_VERSION,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def write_manifest(out_dir, command: str, argv: list[str], seed: int | None,
                   parameters: dict, wall_seconds: float, outputs: list[str] | None = None) -> Path:
    """Record everything needed to rerun `command` and reproduce its outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "parameters": _jsonable(parameters),
        "versions": library_versions(),
        "started_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_seconds": round(float(wall_seconds), 3),
        "outputs": sorted(outputs or []),
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("Manifest written to %s", path)
    return path


def read_manifest(run_dir) -> dict:
    path = Path(run_dir) / MANIFEST_NAME
    return json.loads(path.read_text(encoding="utf-8"))


def write_frame(frame: pd.DataFrame, path) -> Path:
    """CSV with a fixed float format so reruns produce identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_report(report: MetricReport, out_dir) -> list[str]:
    """summary.csv (one row per r and method) and cases.csv (one row per case)."""
    out_dir = Path(out_dir)
    write_frame(report.summary_frame(), out_dir / SUMMARY_NAME)
    write_frame(report.cases_frame(), out_dir / CASES_NAME)
    return [SUMMARY_NAME, CASES_NAME]


def read_summary(run_dir) -> pd.DataFrame:
    return pd.read_csv(Path(run_dir) / SUMMARY_NAME)
