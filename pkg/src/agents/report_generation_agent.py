"""
Report Generation Agent - writes sweep tables, run manifests and text reports
"""

import platform
from datetime import datetime
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from jinja2 import Template
from loguru import logger
from pydantic import BaseModel, Field

from ..core.errors import ConfigurationError
from .sweep_agent import SWEEP_COLUMNS

DEPENDENCIES = ["numpy", "pandas", "pydantic", "pyyaml", "python-dotenv", "jinja2", "loguru"]


def dependency_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in DEPENDENCIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


class RunManifest(BaseModel):
    """Everything needed to reproduce one output file"""

    command: str
    version: str
    config: Dict[str, Any]
    seed: Optional[int] = None
    started_at: str
    wall_clock_seconds: float
    timings: Dict[str, float] = Field(default_factory=dict)
    workers: int = 1
    points: int = 0
    dependencies: Dict[str, str] = Field(default_factory=dependency_versions)


VERDICT_TEMPLATE = """\
Scenario:            {{ scenario }}
Interaction model:   {{ model }}
Parameters:          {% for k, v in parameters.items() %}{{ k }}={{ "%.6g"|format(v) }}{% if not loop.last %}, {% endif %}{% endfor %}
Averaging:           {{ method }}{% if seed is not none %} (seed {{ seed }}){% endif %}

Verdict:             {{ verdict }}
Min PT eigenvalue:   {{ "%.12g"|format(min_pt_eigenvalue) }}
Negativity:          {{ "%.12g"|format(negativity) }}
Predicate:           {{ predicate_class }} (margin {{ "%.12g"|format(predicate_margin) }})
Initial entropy:     {{ "%.6f"|format(initial_entropy_bits) }} bits ({{ "%.1f"|format(100 * mixedness) }}% of maximal)
Final purity:        {{ "%.6f"|format(final_purity) }}
"""

BOUNDARY_TEMPLATE = """\
Scenario:            {{ scenario }}
Axis:                {{ axis }} in [{{ bracket[0] }}, {{ bracket[1] }}]
Fixed:               {% for k, v in fixed.items() %}{{ k }}={{ "%.6g"|format(v) }}{% if not loop.last %}, {% endif %}{% endfor %}
Averaging:           {{ method }}

Threshold:           {{ "%.7f"|format(threshold) }} after {{ iterations }} bisection steps
{% if closed_form_threshold is not none -%}
Closed form:         {{ "%.7f"|format(closed_form_threshold) }}
Deviation:           {{ "%.3e"|format(deviation) }}
{%- else -%}
Closed form:         not available
{%- endif %}
"""

VALIDATION_TEMPLATE = """\
Scenario:            {{ scenario }}
Method:              {{ method }}{% if reference_method %} (reference {{ reference_method }}){% endif %}
Points:              {{ points }} ({{ compared }} compared, {{ skipped_in_guard_band }} inside guard band {{ guard }})
Disagreements:       {{ disagreements }}{% if max_disagreement_margin is not none %} (largest margin {{ "%.3e"|format(max_disagreement_margin) }}){% endif %}
{% if max_weight_deviation is not none -%}
Weight deviation:    {{ "%.3e"|format(max_weight_deviation) }}
{% endif -%}
{% if max_method_distance is not none -%}
Method distance:     {{ "%.3e"|format(max_method_distance) }}
{% endif -%}
{% for d in examples -%}
  lambda={{ "%.6g"|format(d.prep_width) }} width={{ "%.6g"|format(d.interaction_width) }} margin={{ "%.3e"|format(d.predicate_margin) }} min_pt={{ "%.3e"|format(d.min_pt_eigenvalue) }}
{% endfor -%}
Result:              {{ "PASS" if passed else "FAIL" }}
"""


class ReportGenerationAgent:
    """Agent responsible for writing outputs and rendering reports"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        config = config or {}
        self.output_directory = Path(config.get("directory", "./output"))
        self.default_format = config.get("format", "csv")
        self.logger = logger.bind(agent="ReportGenerationAgent")
        self.setup_templates()

    def setup_templates(self):
        """Setup report templates"""
        self.templates = {
            "verdict": Template(VERDICT_TEMPLATE),
            "boundary": Template(BOUNDARY_TEMPLATE),
            "validation": Template(VALIDATION_TEMPLATE),
        }

    def render(self, kind: str, data: Dict[str, Any]) -> str:
        if kind not in self.templates:
            raise ValueError(f"Unsupported report kind: {kind}")
        return self.templates[kind].render(**data)

    def default_path(self, stem: str, fmt: Optional[str] = None) -> Path:
        return self.output_directory / f"{stem}.{fmt or self.default_format}"

    @staticmethod
    def manifest_path(output_path: Path) -> Path:
        return output_path.with_name(output_path.stem + ".manifest.json")

    def _prepare(self, path: Path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigurationError(f"cannot create output directory {path.parent}: {e}") from e
        return path

    def write_table(self, rows: List[Dict[str, Any]], path: Path, fmt: str = "csv") -> Path:
        """Sweep rows in grid order; NaN cells are written empty in CSV and null in JSON"""
        path = self._prepare(path)
        frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
        try:
            if fmt == "csv":
                frame.to_csv(path, index=False, float_format="%.12g", na_rep="")
            elif fmt == "json":
                frame.to_json(path, orient="records", indent=2, double_precision=12)
            else:
                raise ConfigurationError(f"Unsupported table format: {fmt}")
        except OSError as e:
            raise ConfigurationError(f"cannot write {path}: {e}") from e
        self.logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_json(self, model: BaseModel, path: Path) -> Path:
        path = self._prepare(path)
        try:
            path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"cannot write {path}: {e}") from e
        return path

    def write_manifest(self, manifest: RunManifest, output_path: Path) -> Path:
        path = self.write_json(manifest, self.manifest_path(Path(output_path)))
        self.logger.debug(f"Manifest written to {path}")
        return path

    @staticmethod
    def now() -> str:
        return datetime.now().isoformat(timespec="seconds")
