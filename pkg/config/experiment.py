"""Experiment configuration files and parameter resolution.

Files are INI-style ``key = value`` with sections [run], [solver],
[harmonics] and [fire]. Each parameter resolves as CLI flag, then file
value, then dataclass default.
"""

import configparser
import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

from benchmarks.harmonics import HarmonicsConfig
from reconstruction.solver import PenaltyParams
from utils.errors import ValidationError
from wildfire.wind import FireConfig

logger = logging.getLogger("cdeim.config.experiment")

SECTIONS = ("run", "solver", "harmonics", "fire")
RUN_KEYS = ("seed", "threads", "output_dir")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def load_config_file(path) -> dict[str, dict[str, str]]:
    """Raw string values per section; unknown sections are rejected."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
        raise ValidationError(f"{path}: unknown section(s) {unknown}, expected {list(SECTIONS)}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def _coerce(raw: str, default, key: str):
    text = str(raw).strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ValidationError(f"invalid value for {key}: {raw!r}") from exc
    return text


def build_section(cls, file_values: dict | None = None, overrides: dict | None = None, base=None):
    """Instantiate a parameter dataclass: defaults < file values < non-None overrides."""
    defaults = base if base is not None else cls()
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in (file_values or {}).items():
        if key not in names:
            raise ValidationError(f"unknown {cls.__name__} parameter {key!r}")
        kwargs[key] = _coerce(raw, getattr(defaults, key), key)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in names:
            raise ValidationError(f"unknown {cls.__name__} parameter {key!r}")
        kwargs[key] = value
    return dataclasses.replace(defaults, **kwargs)


@dataclass
class ExperimentConfig:
    """Resolved parameters of one CLI run."""
    command: str
    seed: int = 0
    threads: int = 1
    output_dir: Path | None = None
    solver: PenaltyParams = field(default_factory=PenaltyParams)
    harmonics: HarmonicsConfig | None = None
    fire: FireConfig | None = None
    inputs: dict[str, Path] = field(default_factory=dict)

    def __post_init__(self):
        missing = [f"{name}={path}" for name, path in self.inputs.items() if not Path(path).exists()]
        if missing:
            raise FileNotFoundError(f"input path(s) not found: {', '.join(missing)}")
        if self.threads < 1:
            raise ValidationError(f"threads must be at least 1, got {self.threads}")

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "seed": self.seed,
            "threads": self.threads,
            "output_dir": str(self.output_dir) if self.output_dir else None,
            "solver": self.solver.to_dict(),
            "inputs": {k: str(v) for k, v in self.inputs.items()},
        }
        if self.harmonics is not None:
            out["harmonics"] = self.harmonics.to_dict()
        if self.fire is not None:
            out["fire"] = self.fire.to_dict()
        return out


def resolve_config(command: str, config_path=None, run: dict | None = None,
                   solver: dict | None = None, harmonics: dict | None = None,
                   fire: dict | None = None, inputs: dict | None = None,
                   solver_base: PenaltyParams | None = None,
                   default_threads: int = 1, default_output: Path | None = None) -> ExperimentConfig:
    """Merge a config file with CLI overrides into an ExperimentConfig."""
    sections = load_config_file(config_path) if config_path else {}
    run = {k: v for k, v in (run or {}).items() if v is not None}
    file_run = sections.get("run", {})
    for key in file_run:
        if key not in RUN_KEYS:
            raise ValidationError(f"unknown run parameter {key!r}")

    try:
        explicit_seed = run["seed"] if "seed" in run else (
            int(file_run["seed"]) if "seed" in file_run else None)
        threads = run.get("threads", int(file_run["threads"]) if "threads" in file_run else default_threads)
    except ValueError as exc:
        raise ValidationError(f"invalid [run] value: {exc}") from exc
    output_dir = run.get("output_dir", file_run.get("output_dir", default_output))

    # an explicit run seed overrides the per-section seeds
    seeded = {} if explicit_seed is None else {"seed": explicit_seed}
    harmonics_cfg = fire_cfg = None
    if harmonics is not None:
        harmonics_cfg = build_section(HarmonicsConfig, sections.get("harmonics"), {**harmonics, **seeded})
    if fire is not None:
        fire_cfg = build_section(FireConfig, sections.get("fire"), {**fire, **seeded})
    section = harmonics_cfg or fire_cfg
    seed = explicit_seed if explicit_seed is not None else (section.seed if section else 0)

    config = ExperimentConfig(
        command=command,
        seed=int(seed),
        threads=int(threads),
        output_dir=Path(output_dir) if output_dir else None,
        solver=build_section(PenaltyParams, sections.get("solver"), solver, base=solver_base),
        harmonics=harmonics_cfg,
        fire=fire_cfg,
        inputs={k: Path(v) for k, v in (inputs or {}).items() if v is not None},
    )
    logger.debug("resolved config: %s", config.to_dict())
    return config
