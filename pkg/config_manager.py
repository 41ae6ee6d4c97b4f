"""
Config Manager for the noisy exchange entangler
"""
import copy
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.core.errors import ConfigurationError
from src.core.hamiltonians import RefocusSchedule
from src.core.noisechan import AveragingMethod, ClosedForm, MonteCarlo, Quadrature

DEFAULT_CONFIG_PATH = Path(__file__).parent / "config" / "entangler_config.yaml"
OUTPUT_DIR_ENV = "ENTANGLER_OUTPUT_DIR"

METHOD_NAMES = ("closed-form", "quadrature", "monte-carlo")


class AnalyzerSettings(BaseModel):
    name: str = "noisy-exchange-entangler"
    version: str = "1.0.0"


class NumericsSettings(BaseModel):
    verdict_tolerance: float = Field(1e-9, gt=0)
    boundary_tolerance: float = Field(1e-6, gt=0)
    guard_band: float = Field(1e-3, ge=0)
    weight_tolerance: float = Field(2e-3, gt=0)


class AveragingSettings(BaseModel):
    method: str = "closed-form"
    quadrature_nodes: int = 61
    laguerre_nodes: int = 64
    samples: int = Field(100000, ge=1)
    seed: int = Field(42, ge=0)

    @field_validator("method")
    @classmethod
    def _known_method(cls, value: str) -> str:
        if value not in METHOD_NAMES:
            raise ValueError(f"method must be one of {METHOD_NAMES}, got {value!r}")
        return value


class RefocusSettings(BaseModel):
    j_tau1_over_pi: float = 0.75
    j_tau2_over_pi: float = 0.5
    pulse_angle_over_pi: float = 1.0
    noise: str = "pulse"
    duration_share: float = Field(0.5, ge=0.0, le=1.0)

    @field_validator("noise")
    @classmethod
    def _known_noise(cls, value: str) -> str:
        if value not in ("pulse", "duration"):
            raise ValueError(f"refocus noise must be 'pulse' or 'duration', got {value!r}")
        return value


class SweepSettings(BaseModel):
    workers: int = Field(1, ge=1)
    chunk_size: int = Field(256, ge=1)
    max_points: int = Field(10_000_000, ge=1)


class OutputSettings(BaseModel):
    directory: str = "./output"
    format: str = "csv"


class LoggingSettings(BaseModel):
    level: str = "INFO"
    file: Optional[str] = "./logs/entangler.log"
    max_size: str = "10 MB"
    backup_count: int = 5


class EntanglerSettings(BaseModel):
    analyzer: AnalyzerSettings = Field(default_factory=AnalyzerSettings)
    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    averaging: AveragingSettings = Field(default_factory=AveragingSettings)
    refocus: RefocusSettings = Field(default_factory=RefocusSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    # CLI flag defaults from a user config file, keyed by flag name
    defaults: Dict[str, Any] = Field(default_factory=dict)


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Error parsing config file {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must hold a mapping, got {type(data).__name__}")
    return data


class ConfigManager:
    """Loads YAML defaults, an optional user file and the environment override"""

    def __init__(self, config_path: Union[str, Path, None] = None, user_config: Union[str, Path, None] = None):
        load_dotenv()

        self.config_path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
        if self.config_path.exists():
            raw = _read_yaml(self.config_path)
        else:
            logger.warning(f"Config file not found: {self.config_path}, using built-in defaults")
            raw = {}

        if user_config is not None:
            user_path = Path(user_config)
            if not user_path.exists():
                raise ConfigurationError(f"User config file not found: {user_path}")
            raw = deep_merge(raw, _read_yaml(user_path))

        try:
            self.settings = EntanglerSettings.model_validate(raw)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid configuration: {e}") from e

        override = os.getenv(OUTPUT_DIR_ENV)
        if override:
            self.settings.output.directory = override

    @property
    def output_directory(self) -> Path:
        return Path(self.settings.output.directory)

    def get_defaults(self) -> Dict[str, Any]:
        """CLI flag defaults from the user config file"""
        return dict(self.settings.defaults)

    def refocus_schedule(self, j_tau1: Optional[float] = None) -> RefocusSchedule:
        r = self.settings.refocus
        pulse = r.pulse_angle_over_pi * math.pi
        if j_tau1 is not None:
            return RefocusSchedule.through(j_tau1, pulse)
        return RefocusSchedule(r.j_tau1_over_pi * math.pi, r.j_tau2_over_pi * math.pi, pulse)

    def averaging_method(self, name: Optional[str] = None, nodes: Optional[int] = None,
                         laguerre_nodes: Optional[int] = None, samples: Optional[int] = None,
                         seed: Optional[int] = None) -> AveragingMethod:
        a = self.settings.averaging
        name = name or a.method
        if name == "closed-form":
            return ClosedForm()
        if name == "quadrature":
            return Quadrature(nodes or a.quadrature_nodes, laguerre_nodes or a.laguerre_nodes)
        if name == "monte-carlo":
            return MonteCarlo(samples or a.samples, a.seed if seed is None else seed)
        raise ConfigurationError(f"unknown averaging method {name!r}; expected one of {METHOD_NAMES}")
