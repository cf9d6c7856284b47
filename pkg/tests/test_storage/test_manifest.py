"""Tests for run manifests and metric CSVs."""

import numpy as np
import pandas as pd

from reconstruction.metrics import CaseRecord, MetricReport
from storage.manifest import (
    CASES_NAME, SUMMARY_NAME, read_manifest, read_summary, write_frame, write_manifest,
    write_report,
)


def test_manifest_contents(tmp_path):
    write_manifest(tmp_path, "harmonics", ["harmonics", "--seed", "3"], 3,
                   {"r": np.array([5, 10]), "eta": np.float64(0.25), "out": tmp_path},
                   wall_seconds=1.23456, outputs=["summary.csv", "cases.csv"])
    manifest = read_manifest(tmp_path)
    assert manifest["command"] == "harmonics"
    assert manifest["seed"] == 3
    assert manifest["parameters"]["r"] == [5, 10]
    assert manifest["parameters"]["out"] == str(tmp_path)
    assert manifest["wall_seconds"] == 1.235
    assert manifest["outputs"] == ["cases.csv", "summary.csv"]
    assert {"numpy", "scipy", "pandas", "python"} <= set(manifest["versions"])


def test_report_files(tmp_path):
    report = MetricReport([
        CaseRecord(r=5, method="deim", case=0, relative_error=0.1, relative_residual=0.0),
        CaseRecord(r=5, method="cdeim", case=0, relative_error=0.05, relative_residual=0.01,
                   lambda_opt=1e-3),
    ])
    assert write_report(report, tmp_path) == [SUMMARY_NAME, CASES_NAME]
    summary = read_summary(tmp_path)
    assert summary["method"].tolist() == ["deim", "cdeim"]
    assert len(pd.read_csv(tmp_path / CASES_NAME)) == 2


def test_frames_are_byte_stable(tmp_path):
    frame = pd.DataFrame({"x": [1 / 3, 2 / 3], "name": ["a", "b"]})
    first = write_frame(frame, tmp_path / "a.csv").read_bytes()
    second = write_frame(frame.copy(), tmp_path / "b.csv").read_bytes()
    assert first == second
    assert first.decode().splitlines()[1] == "0.3333333333,a"
