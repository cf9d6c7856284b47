"""Logging configuration with console + rotating file handlers."""

import logging
import logging.handlers
import sys
from pathlib import Path

from colorama import Fore, Style, init as colorama_init


class ColoredFormatter(logging.Formatter):
    """Console formatter with color-coded log levels."""

    COLORS = {
        logging.DEBUG: Fore.CYAN,
        logging.INFO: Fore.GREEN,
        logging.WARNING: Fore.YELLOW,
        logging.ERROR: Fore.RED,
        logging.CRITICAL: Fore.RED + Style.BRIGHT,
    }

    def format(self, record):
        color = self.COLORS.get(record.levelno, "")
        original = record.levelname
        record.levelname = f"{color}{original}{Style.RESET_ALL}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


def setup_logging(log_dir: Path, level: str = "INFO") -> logging.Logger:
    """Configure the `cdeim` logger with a console (stderr) and a rotating file handler."""
    colorama_init()

    root_logger = logging.getLogger("cdeim")
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()

    # stdout carries command output, so diagnostics go to stderr
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(getattr(logging, level.upper(), logging.INFO))
    console.setFormatter(ColoredFormatter("%(levelname)s %(name)s: %(message)s"))
    root_logger.addHandler(console)

    log_dir.mkdir(parents=True, exist_ok=True)
    file_handler = logging.handlers.RotatingFileHandler(
        log_dir / "cdeim.log", maxBytes=5 * 1024 * 1024, backupCount=5, encoding="utf-8"
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(
        "%(asctime)s %(levelname)s %(name)s [%(filename)s:%(lineno)d] %(message)s"
    ))
    root_logger.addHandler(file_handler)

    return root_logger
