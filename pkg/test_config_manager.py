"""
Tests for the layered YAML configuration
"""

import math

import pytest
import yaml

from config_manager import ConfigManager, deep_merge
from src.core.errors import ConfigurationError, ScheduleError
from src.core.noisechan import ClosedForm, MonteCarlo, Quadrature


def test_defaults_load_from_bundled_file(monkeypatch):
    monkeypatch.delenv("ENTANGLER_OUTPUT_DIR", raising=False)
    manager = ConfigManager()
    assert manager.settings.analyzer.name == "noisy-exchange-entangler"
    assert manager.settings.averaging.quadrature_nodes == 61
    assert manager.settings.numerics.guard_band == pytest.approx(1e-3)
    assert manager.get_defaults() == {}


def test_missing_default_file_falls_back_to_builtin(tmp_path):
    manager = ConfigManager(config_path=tmp_path / "absent.yaml")
    assert manager.settings.sweep.chunk_size == 256


def test_user_file_overrides_one_key(tmp_path):
    user = tmp_path / "user.yaml"
    user.write_text(yaml.safe_dump({"averaging": {"samples": 500}}), encoding="utf-8")
    manager = ConfigManager(user_config=user)
    assert manager.settings.averaging.samples == 500
    assert manager.settings.averaging.seed == 42


@pytest.mark.parametrize("content", ["- just\n- a list\n", "averaging: [unclosed\n"])
def test_malformed_user_file(tmp_path, content):
    user = tmp_path / "user.yaml"
    user.write_text(content, encoding="utf-8")
    with pytest.raises(ConfigurationError):
        ConfigManager(user_config=user)


def test_output_directory_environment_override(monkeypatch, tmp_path):
    monkeypatch.setenv("ENTANGLER_OUTPUT_DIR", str(tmp_path / "elsewhere"))
    assert ConfigManager().output_directory == tmp_path / "elsewhere"


def test_averaging_methods():
    manager = ConfigManager()
    assert manager.averaging_method() == ClosedForm()
    assert manager.averaging_method("quadrature", nodes=31) == Quadrature(31, 64)
    assert manager.averaging_method("monte-carlo", samples=10, seed=0) == MonteCarlo(10, 0)
    assert manager.averaging_method("monte-carlo").seed == 42
    with pytest.raises(ConfigurationError):
        manager.averaging_method("guess")


def test_refocus_schedule():
    manager = ConfigManager()
    s = manager.refocus_schedule()
    assert s.j_tau1 == pytest.approx(0.75 * math.pi)
    assert manager.refocus_schedule(0.9 * math.pi).j_tau2 == pytest.approx(0.8 * math.pi)
    with pytest.raises(ScheduleError):
        manager.refocus_schedule(math.pi)


def test_deep_merge_keeps_untouched_sections():
    base = {"a": {"x": 1, "y": 2}, "b": 3}
    merged = deep_merge(base, {"a": {"y": 5}})
    assert merged == {"a": {"x": 1, "y": 5}, "b": 3}
    assert base["a"]["y"] == 2
