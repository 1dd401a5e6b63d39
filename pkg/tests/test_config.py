"""
Tests for settings and run configuration (config.py, dependencies/options.py)
"""

import pytest

from app.config import load_settings
from app.dependencies.options import read_config_file, resolve_config
from app.errors import ConfigError
from app.models.schemas import DistConfig, ScalingConfig, SweepConfig


class TestSettings:
    """ENTLAB_* environment variables."""

    def test_defaults(self):
        settings = load_settings({})
        assert settings.dense_cap == 14
        assert settings.solver_tol == pytest.approx(1e-10)
        assert settings.threads >= 1

    def test_overrides(self):
        settings = load_settings({"ENTLAB_THREADS": "3", "ENTLAB_LOG_LEVEL": "debug"})
        assert settings.threads == 3
        assert settings.log_level == "DEBUG"

    def test_invalid_value_names_variable(self):
        with pytest.raises(ConfigError) as info:
            load_settings({"ENTLAB_DENSE_CAP": "many"})
        assert "ENTLAB_DENSE_CAP" in info.value.detail
        assert info.value.exit_code == 2


class TestRunConfig:
    """Defaults < config file < flags."""

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("n=8\ng-step=0.05\neps=0.01\n", encoding="utf-8")
        config = resolve_config(SweepConfig, str(path), {"n": 10, "eps": None})
        assert config.n == 10
        assert config.g_step == pytest.approx(0.05)
        assert config.eps == pytest.approx(0.01)

    def test_file_keys_normalized(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("max-iter=50\n", encoding="utf-8")
        assert read_config_file(str(path)) == {"max_iter": "50"}

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as info:
            resolve_config(SweepConfig, None, {"n": 8, "colour": "red"})
        assert "colour" in info.value.detail

    def test_g_out_of_range(self):
        with pytest.raises(ConfigError):
            resolve_config(DistConfig, None, {"n": 8, "g": 1.5})

    def test_empty_grid(self):
        with pytest.raises(ConfigError):
            resolve_config(SweepConfig, None, {"n": 8, "g_min": 0.8, "g_max": 0.2})

    def test_dist_needs_size_without_state_file(self):
        with pytest.raises(ConfigError):
            resolve_config(DistConfig, None, {"state": "ghz"})

    @pytest.mark.parametrize("text, expected", [("7-11", [7, 8, 9, 10, 11]), ("9,7", [7, 9])])
    def test_size_list_parsing(self, text, expected):
        assert resolve_config(ScalingConfig, None, {"n_list": text}).n_list == expected
