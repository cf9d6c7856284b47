"""Application settings loaded from the environment and an optional .env file."""

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv


def _project_root() -> Path:
    return Path(__file__).resolve().parent.parent


@dataclass
class Settings:
    """Central configuration for the C-DEIM toolkit."""

    # Paths
    project_root: Path = field(default_factory=_project_root)
    output_dir: Path = field(default=None)
    log_dir: Path = field(default=None)

    # Logging
    log_level: str = "INFO"

    # Parallel fan-out for experiments
    threads: int = 1

    def __post_init__(self):
        if self.output_dir is None:
            self.output_dir = self.project_root / "data" / "runs"
        if self.log_dir is None:
            self.log_dir = self.project_root / "data" / "logs"
        self.log_dir.mkdir(parents=True, exist_ok=True)


_settings: Settings | None = None


def invalidate_settings():
    """Clear the cached settings singleton so it reloads on next access."""
    global _settings
    _settings = None


def get_settings() -> Settings:
    """Load settings from .env and the process environment."""
    global _settings
    if _settings is not None:
        return _settings

    root = _project_root()
    load_dotenv(root / ".env")

    _settings = Settings(
        output_dir=Path(os.getenv("CDEIM_OUTPUT_DIR", root / "data" / "runs")),
        log_dir=Path(os.getenv("LOG_DIR", root / "data" / "logs")),
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        threads=max(1, int(os.getenv("CDEIM_THREADS", "1"))),
    )
    return _settings
