"""Tests for config-file loading and parameter precedence."""

from pathlib import Path

import pytest

from benchmarks.harmonics import HarmonicsConfig
from config.experiment import build_section, load_config_file, resolve_config
from config.settings import get_settings
from reconstruction.solver import PenaltyParams
from utils.errors import ValidationError
from wildfire.experiment import FIRE_SOLVER_DEFAULTS


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[run]\n"
        "seed = 11\n"
        "threads = 2\n"
        "\n"
        "[solver]\n"
        "gamma = 5   # coarser ladder\n"
        "delta = 1e-6\n"
        "\n"
        "[harmonics]\n"
        "n_functions = 120\n"
        "n_train = 100\n"
        "restricted = no\n"
        "\n"
        "[fire]\n"
        "sensor_lines = 300, 700\n"
    )
    return path


class TestLoadConfigFile:
    def test_sections(self, config_file):
        sections = load_config_file(config_file)
        assert sections["solver"]["gamma"] == "5"
        assert sections["harmonics"]["restricted"] == "no"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config_file(tmp_path / "absent.ini")

    def test_unknown_section(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[plotting]\ncolor = red\n")
        with pytest.raises(ValidationError, match="plotting"):
            load_config_file(path)


class TestBuildSection:
    def test_precedence(self):
        params = build_section(PenaltyParams, {"gamma": "5", "tau": "1e-8"}, {"gamma": 3.0, "tau": None})
        assert params.gamma == 3.0
        assert params.tau == 1e-8
        assert params.delta == PenaltyParams().delta

    def test_base_defaults(self):
        params = build_section(PenaltyParams, {}, {}, base=FIRE_SOLVER_DEFAULTS)
        assert params.lambda_init == 1e-6

    def test_unknown_key(self):
        with pytest.raises(ValidationError, match="colour"):
            build_section(PenaltyParams, {"colour": "1"})

    def test_bad_value(self):
        with pytest.raises(ValidationError, match="max_newton_iters"):
            build_section(PenaltyParams, {"max_newton_iters": "many"})

    def test_bool_values(self):
        cfg = build_section(HarmonicsConfig, {"restricted": "off", "amplitude_variance": "true"})
        assert cfg.restricted is False and cfg.amplitude_variance is True


class TestResolveConfig:
    def test_file_values_apply(self, config_file):
        cfg = resolve_config("harmonics", config_file, harmonics={})
        assert cfg.seed == 11
        assert cfg.threads == 2
        assert cfg.solver.gamma == 5.0
        assert cfg.harmonics.n_functions == 120
        assert cfg.harmonics.seed == 11
        assert cfg.harmonics.restricted is False

    def test_flags_beat_file(self, config_file):
        cfg = resolve_config("harmonics", config_file, run={"seed": 4, "threads": None},
                             solver={"gamma": 2.0}, harmonics={"n_train": 90})
        assert cfg.seed == 4
        assert cfg.harmonics.seed == 4
        assert cfg.threads == 2
        assert cfg.solver.gamma == 2.0
        assert cfg.harmonics.n_train == 90

    def test_defaults_without_file(self):
        cfg = resolve_config("pod", default_threads=3)
        assert cfg.seed == 0
        assert cfg.threads == 3
        assert cfg.solver == PenaltyParams()
        assert cfg.harmonics is None and cfg.fire is None

    def test_fire_section(self, config_file):
        cfg = resolve_config("fire-sim", config_file, fire={"n_simulations": 20, "n_train": 15},
                             solver_base=FIRE_SOLVER_DEFAULTS)
        assert cfg.fire.sensor_lines == (300.0, 700.0)
        assert cfg.fire.seed == 11
        assert cfg.solver.lambda_init == 1e-6
        assert cfg.solver.gamma == 5.0

    def test_section_seed_used_without_run_seed(self, tmp_path):
        path = tmp_path / "seeded.ini"
        path.write_text("[harmonics]\nseed = 21\n")
        cfg = resolve_config("harmonics", path, harmonics={})
        assert cfg.seed == 21

    def test_missing_input(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="snapshots"):
            resolve_config("pod", inputs={"snapshots": tmp_path / "none.cdmx"})

    def test_unknown_run_key(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[run]\nverbose = 1\n")
        with pytest.raises(ValidationError):
            resolve_config("pod", path)

    def test_to_dict_is_plain(self, config_file, tmp_path):
        snapshots = tmp_path / "snap.cdmx"
        snapshots.write_bytes(b"")
        cfg = resolve_config("pod", config_file, inputs={"snapshots": snapshots})
        out = cfg.to_dict()
        assert out["inputs"]["snapshots"] == str(snapshots)
        assert "harmonics" not in out


def test_settings_follow_environment(tmp_path):
    settings = get_settings()
    assert settings.output_dir == Path(tmp_path) / "runs"
    assert settings.log_dir.is_dir()
    assert settings.log_level == "WARNING"
