"""Utility helpers: list parsing and timing."""

import logging
import time
from contextlib import contextmanager

from utils.errors import ValidationError

logger = logging.getLogger("cdeim.helpers")


def parse_int_list(raw: str) -> list[int]:
    """Parse "5,10,15" or "5-35:5" into a list of positive integers."""
    if raw is None or not str(raw).strip():
        raise ValidationError("empty integer list")
    text = str(raw).strip()
    try:
        if "-" in text and ":" in text:
            span, step = text.split(":")
            lo, hi = span.split("-")
            values = list(range(int(lo), int(hi) + 1, int(step)))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"invalid integer list {raw!r}") from exc
    if not values or any(v < 1 for v in values):
        raise ValidationError(f"integer list must contain positive values, got {raw!r}")
    return values


def parse_float_list(raw: str) -> list[float]:
    try:
        return [float(v) for v in str(raw).split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"invalid float list {raw!r}") from exc


@contextmanager
def stopwatch():
    """Yield a dict whose "seconds" entry is filled in on exit."""
    box = {"seconds": 0.0}
    start = time.perf_counter()
    try:
        yield box
    finally:
        box["seconds"] = time.perf_counter() - start
