"""Shared input validation utilities.

All array boundaries should validate through these helpers so that invalid data
(NaN, mismatched shapes, duplicate sensors) never silently poisons a solve.
"""

import numpy as np

from utils.errors import ValidationError


def validate_matrix(raw, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject empty or non-finite input."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be non-empty, got shape {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise ValidationError(f"{name} has a non-finite entry at ({row}, {col})")
    return arr


def validate_vector(raw, name: str = "vector", length: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float64 array, optionally checking its length."""
    arr = np.asarray(raw, dtype=np.float64).reshape(-1)
    if length is not None and arr.size != length:
        raise ValidationError(f"{name} must have length {length}, got {arr.size}")
    bad = ~np.isfinite(arr)
    if bad.any():
        raise ValidationError(f"{name} has a non-finite entry at index {int(np.argmax(bad))}")
    return arr


def validate_positive_int(value, name: str) -> int:
    try:
        v = int(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be an integer, got {value!r}") from exc
    if v < 1 or v != value:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return v


def validate_indices(indices, upper: int, name: str = "sensor_indices") -> np.ndarray:
    """Validate distinct integer indices in [0, upper)."""
    idx = np.asarray(indices)
    if idx.ndim != 1:
        raise ValidationError(f"{name} must be a flat list")
    if idx.size and not np.issubdtype(idx.dtype, np.integer):
        if not np.all(np.equal(np.mod(idx, 1), 0)):
            raise ValidationError(f"{name} must contain integers")
    idx = idx.astype(np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= upper):
        raise ValidationError(f"{name} must lie in [0, {upper}), got range [{idx.min()}, {idx.max()}]")
    uniq, counts = np.unique(idx, return_counts=True)
    if (counts > 1).any():
        raise ValidationError(f"{name} contains duplicates: {uniq[counts > 1].tolist()}")
    return idx
