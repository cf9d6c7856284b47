"""Console output helpers with ASCII fallbacks for Unicode symbols."""

import os
import sys

from tabulate import tabulate


def _supports_unicode() -> bool:
    """Check if the current terminal supports Unicode output."""
    if os.name == "nt":
        try:
            "✓✗".encode(sys.stdout.encoding or "ascii")
            return True
        except (UnicodeEncodeError, LookupError):
            return False
    return True


USE_UNICODE = _supports_unicode()

CHECK = "✓" if USE_UNICODE else "[+]"
CROSS = "✗" if USE_UNICODE else "[-]"


def ok(msg: str) -> str:
    return f"{CHECK} {msg}"


def fail(msg: str) -> str:
    return f"{CROSS} {msg}"


def header(title: str, width: int = 60) -> str:
    return f"\n{'=' * width}\n{title}\n{'=' * width}"


def separator(width: int = 60) -> str:
    return "-" * width


def table(frame, floatfmt: str = ".4g") -> str:
    """Render a DataFrame as a plain-text table."""
    return tabulate(frame, headers="keys", tablefmt="simple", floatfmt=floatfmt, showindex=False)
