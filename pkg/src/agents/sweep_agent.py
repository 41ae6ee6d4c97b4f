"""
Sweep Agent - evaluates scenario grids for phase-diagram tables
"""

import asyncio
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, field_validator, model_validator

from ..core.errors import ConfigurationError
from ..core.noisechan import MonteCarlo
from ..core.scenarios import ScenarioConfig, ScenarioId, run_scenarios

SWEEP_COLUMNS = [
    "scenario",
    "lambda",
    "omega_or_capital_lambda",
    "zbar",
    "phi",
    "predicate_margin",
    "predicate_class",
    "min_pt_eigenvalue",
    "negativity",
    "initial_entropy_bits",
    "method",
]

MAX_AXES = 3
DEFAULT_MAX_POINTS = 10_000_000

# Grid axis name -> ScenarioConfig field
AXIS_FIELDS = {
    "lambda": "prep_width",
    "omega": "interaction_width",
    "capital_lambda": "interaction_width",
    "zbar": "mean_theta_minus",
    "theta_minus": "mean_theta_minus",
    "phi": "phi",
}


class AxisSpec(BaseModel):
    """One sweep axis, ``name=start:stop:step`` with an inclusive stop"""

    name: str
    start: float
    stop: float
    step: float

    @field_validator("name")
    @classmethod
    def _known_axis(cls, value: str) -> str:
        value = value.strip().lower().replace("-", "_")
        if value not in AXIS_FIELDS:
            raise ValueError(f"unknown axis {value!r}; expected one of {sorted(AXIS_FIELDS)}")
        return value

    @model_validator(mode="after")
    def _check_range(self):
        for v in (self.start, self.stop, self.step):
            if not math.isfinite(v):
                raise ValueError(f"axis {self.name} bounds must be finite")
        if self.step <= 0:
            raise ValueError(f"axis {self.name}: step must be > 0, got {self.step}")
        if self.start > self.stop:
            raise ValueError(f"axis {self.name}: start {self.start} exceeds stop {self.stop}")
        return self

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        try:
            name, bounds = text.split("=", 1)
            parts = bounds.split(":")
            if len(parts) == 1:
                start = stop = float(parts[0])
                step = 1.0
            elif len(parts) == 3:
                start, stop, step = (float(p) for p in parts)
            else:
                raise ValueError("expected start:stop:step")
            return cls(name=name, start=start, stop=stop, step=step)
        except ValueError as e:
            raise ConfigurationError(f"bad grid spec {text!r}: {e}") from e

    @property
    def field(self) -> str:
        return AXIS_FIELDS[self.name]

    @property
    def count(self) -> int:
        return int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1

    def values(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)


class SweepGrid(BaseModel):
    scenario: ScenarioId
    axes: List[AxisSpec]
    max_points: int = Field(DEFAULT_MAX_POINTS, ge=1)

    @model_validator(mode="after")
    def _check_axes(self):
        if not 1 <= len(self.axes) <= MAX_AXES:
            raise ValueError(f"a sweep takes 1 to {MAX_AXES} axes, got {len(self.axes)}")
        fields = [a.field for a in self.axes]
        if len(set(fields)) != len(fields):
            raise ValueError("each parameter may appear on one axis only")
        sid = self.scenario
        for a in self.axes:
            if a.name == "omega" and sid.is_untunable:
                raise ValueError(f"{sid.value} sweeps capital_lambda, not omega")
            if a.name == "capital_lambda" and not sid.is_untunable:
                raise ValueError(f"{sid.value} sweeps omega, not capital_lambda")
            if a.field == "mean_theta_minus" and sid is not ScenarioId.XYZ_TUNABLE:
                raise ValueError(f"axis {a.name} applies to xyz-tunable only")
            if a.field == "phi" and sid not in (ScenarioId.XYZ_TUNABLE, ScenarioId.XY_FAMILY):
                raise ValueError("axis phi applies to xyz-tunable and xy-family only")
        if self.total_points > self.max_points:
            raise ValueError(f"grid has {self.total_points} points, above the guard of {self.max_points}")
        return self

    @classmethod
    def from_specs(cls, scenario: ScenarioId, specs: Sequence[str],
                   max_points: int = DEFAULT_MAX_POINTS) -> "SweepGrid":
        axes = [AxisSpec.parse(s) for s in specs]
        try:
            return cls(scenario=scenario, axes=axes, max_points=max_points)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

    @property
    def total_points(self) -> int:
        return math.prod(a.count for a in self.axes)

    def configs(self, base: ScenarioConfig) -> List[ScenarioConfig]:
        """One config per grid point; the first axis varies slowest"""
        out = []
        method = base.method
        for index, combo in enumerate(itertools.product(*(a.values() for a in self.axes))):
            update: Dict[str, Any] = {a.field: float(v) for a, v in zip(self.axes, combo)}
            if isinstance(method, MonteCarlo):
                update["method"] = method.for_task(index)
            fields = dict(base)
            fields.update(update)
            out.append(ScenarioConfig.build(**fields))
        return out


def sweep_row(result) -> Dict[str, Any]:
    c = result.config
    sid = c.id
    zbar = c.theta_minus if sid is ScenarioId.XYZ_TUNABLE else math.nan
    phi = c.phi_value if sid in (ScenarioId.XYZ_TUNABLE, ScenarioId.XY_FAMILY) else math.nan
    return {
        "scenario": sid.value,
        "lambda": c.prep_width,
        "omega_or_capital_lambda": c.interaction_width,
        "zbar": zbar,
        "phi": phi,
        "predicate_margin": result.predicate.margin,
        "predicate_class": result.predicate.classification.value,
        "min_pt_eigenvalue": result.verdict.min_pt_eigenvalue,
        "negativity": result.verdict.negativity,
        "initial_entropy_bits": result.initial_entropy,
        "method": result.method,
    }


def _evaluate_chunk(configs: List[ScenarioConfig]) -> Tuple[List[Dict[str, Any]], Dict[str, float]]:
    results = run_scenarios(configs)
    timings: Dict[str, float] = {}
    for r in results:
        for stage, seconds in r.timings.items():
            timings[stage] = timings.get(stage, 0.0) + seconds
    return [sweep_row(r) for r in results], timings


class SweepAgent:
    """Agent responsible for evaluating sweep grids in a work pool"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        config = config or {}
        self.workers = int(config.get("workers", 1))
        self.chunk_size = int(config.get("chunk_size", 256))
        self.max_points = int(config.get("max_points", DEFAULT_MAX_POINTS))
        self.logger = logger.bind(agent="SweepAgent")

    async def run_sweep(self, base: ScenarioConfig, grid: SweepGrid,
                        workers: Optional[int] = None) -> Dict[str, Any]:
        """
        Evaluate every grid point

        Rows come back in grid order whatever the completion order of the
        chunks; the worker count never changes the values.
        """
        workers = max(1, int(workers or self.workers))
        start = time.perf_counter()
        configs = grid.configs(base)
        chunks = [configs[i:i + self.chunk_size] for i in range(0, len(configs), self.chunk_size)]
        self.logger.info(f"Sweeping {len(configs)} points of {grid.scenario.value} "
                         f"in {len(chunks)} chunks on {workers} worker(s)")

        loop = asyncio.get_running_loop()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = await asyncio.gather(*(loop.run_in_executor(pool, _evaluate_chunk, c) for c in chunks))
        else:
            parts = [_evaluate_chunk(c) for c in chunks]

        rows: List[Dict[str, Any]] = []
        timings: Dict[str, float] = {}
        for chunk_rows, chunk_timings in parts:
            rows.extend(chunk_rows)
            for stage, seconds in chunk_timings.items():
                timings[stage] = timings.get(stage, 0.0) + seconds
        elapsed = time.perf_counter() - start
        timings["sweep_wall"] = elapsed
        self.logger.info(f"Sweep finished in {elapsed:.2f}s")
        return {
            "rows": rows,
            "timings": timings,
            "points": len(rows),
            "workers": workers,
        }
