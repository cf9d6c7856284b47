"""Matrix and sensor-index files.

Binary matrices use the 14-byte CDMX header, all little-endian:

    bytes 0-3    magic b"CDMX"
    bytes 4-5    u16 format version
    bytes 6-9    u32 rows
    bytes 10-13  u32 cols

followed by rows * cols float64 values in column-major order. Paths ending in
``.csv`` hold one matrix row per line with 17 significant digits instead.
Sensor index lists are plain text, one zero-based index per line.
"""

import logging
import struct
from pathlib import Path

import numpy as np

from utils.errors import MatrixFormatError
from utils.validators import validate_indices

logger = logging.getLogger("cdeim.storage.matrix_file")

MAGIC = b"CDMX"
VERSION = 1
_HEADER = struct.Struct("<4sHII")
HEADER_SIZE = _HEADER.size
CSV_FORMAT = "%.17g"
_MAX_DIM = 0xFFFFFFFF


def _is_csv(path: Path) -> bool:
    return path.suffix.lower() == ".csv"


def _check_finite(matrix: np.ndarray, path: Path):
    bad = ~np.isfinite(matrix)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise MatrixFormatError(f"{path}: non-finite entry at ({row}, {col})")


def encode_matrix(matrix) -> bytes:
    """CDMX bytes of a 2-D float matrix (1-D input becomes a column)."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise MatrixFormatError(f"only 2-D matrices can be written, got shape {arr.shape}")
    rows, cols = arr.shape
    if rows > _MAX_DIM or cols > _MAX_DIM:
        raise MatrixFormatError(f"matrix shape {arr.shape} exceeds the header's u32 dimensions")
    payload = np.asarray(arr, dtype="<f8").tobytes(order="F")
    return _HEADER.pack(MAGIC, VERSION, rows, cols) + payload


def decode_matrix(blob: bytes, source: str = "<bytes>") -> np.ndarray:
    if len(blob) < HEADER_SIZE:
        raise MatrixFormatError(
            f"{source}: truncated header, expected {HEADER_SIZE} bytes, got {len(blob)}")
    magic, version, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise MatrixFormatError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise MatrixFormatError(f"{source}: unsupported format version {version}")
    expected = HEADER_SIZE + 8 * rows * cols
    if len(blob) != expected:
        raise MatrixFormatError(
            f"{source}: expected {expected} bytes for a {rows} x {cols} matrix, got {len(blob)}")
    values = np.frombuffer(blob, dtype="<f8", offset=HEADER_SIZE, count=rows * cols)
    return values.reshape((rows, cols), order="F").astype(np.float64)


def read_matrix(path) -> np.ndarray:
    """Load a CDMX or CSV matrix; raises MatrixFormatError on malformed content."""
    path = Path(path)
    if _is_csv(path):
        try:
            matrix = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise MatrixFormatError(f"{path}: {exc}") from exc
    else:
        matrix = decode_matrix(path.read_bytes(), str(path))
    _check_finite(matrix, path)
    logger.debug("read %s: %d x %d", path, *matrix.shape)
    return matrix


def write_matrix(matrix, path) -> Path:
    """Write a matrix as CDMX, or as CSV when the path ends in .csv."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    _check_finite(arr, path)
    if _is_csv(path):
        np.savetxt(path, arr, delimiter=",", fmt=CSV_FORMAT)
    else:
        path.write_bytes(encode_matrix(arr))
    logger.debug("wrote %s: %d x %d", path, *arr.shape)
    return path


def read_sensor_indices(path, upper: int | None = None) -> np.ndarray:
    """One zero-based index per line; blank lines and '#' comments are skipped."""
    path = Path(path)
    values = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            values.append(int(text))
        except ValueError as exc:
            raise MatrixFormatError(f"{path}:{lineno}: not an integer index: {text!r}") from exc
    idx = np.asarray(values, dtype=np.int64)
    if upper is not None:
        idx = validate_indices(idx, upper)
    return idx


def write_sensor_indices(indices, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{int(i)}\n" for i in indices), encoding="utf-8")
    return path
