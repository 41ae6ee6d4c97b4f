"""
Tests for sweep grids, the sweep agent and the report writer
"""

import asyncio
import json
import math

import pytest

from src.agents.report_generation_agent import ReportGenerationAgent, RunManifest
from src.agents.sweep_agent import SWEEP_COLUMNS, AxisSpec, SweepAgent, SweepGrid
from src.core.errors import ConfigurationError
from src.core.noisechan import MonteCarlo
from src.core.scenarios import ScenarioConfig, ScenarioId


def test_axis_spec_parsing():
    axis = AxisSpec.parse("Lambda=0:1:0.25")
    assert axis.name == "lambda"
    assert axis.field == "prep_width"
    assert axis.count == 5
    assert list(axis.values()) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert AxisSpec.parse("theta-minus=0.3").count == 1


def test_axis_count_tolerates_rounding():
    assert AxisSpec.parse("omega=0:0.3:0.1").count == 4


@pytest.mark.parametrize("text", ["gamma=0:1:0.1", "lambda=0:1:0", "lambda=0:1:-1", "lambda", "lambda=0:nan:1"])
def test_axis_spec_rejects(text):
    with pytest.raises(ConfigurationError):
        AxisSpec.parse(text)


def test_grid_configs_vary_first_axis_slowest():
    grid = SweepGrid.from_specs(ScenarioId.XYZ_TUNABLE, ["lambda=0:1:1", "zbar=0:0.2:0.1"])
    base = ScenarioConfig.build(id=ScenarioId.XYZ_TUNABLE, mean_theta_minus=0.0, interaction_width=0.3)
    configs = grid.configs(base)
    assert grid.total_points == 6
    assert [(c.prep_width, c.mean_theta_minus) for c in configs][:3] == [
        (0.0, 0.0), (0.0, pytest.approx(0.1)), (0.0, pytest.approx(0.2))]
    assert all(c.interaction_width == 0.3 for c in configs)


def test_grid_gives_each_point_its_own_substream():
    grid = SweepGrid.from_specs(ScenarioId.ISING_TUNABLE, ["lambda=0:0.2:0.1"])
    base = ScenarioConfig.build(id=ScenarioId.ISING_TUNABLE, method=MonteCarlo(100, seed=4))
    assert [c.method.task_index for c in grid.configs(base)] == [0, 1, 2]


def test_grid_guard():
    with pytest.raises(ConfigurationError):
        SweepGrid.from_specs(ScenarioId.ISING_TUNABLE, ["lambda=0:1:0.1", "omega=0:1:0.1"], max_points=100)


def test_sweep_agent_rows():
    grid = SweepGrid.from_specs(ScenarioId.ISING_TUNABLE, ["lambda=0:2:1"])
    base = ScenarioConfig.build(id=ScenarioId.ISING_TUNABLE)
    result = asyncio.run(SweepAgent({"chunk_size": 2}).run_sweep(base, grid))
    assert result["points"] == 3
    assert [r["lambda"] for r in result["rows"]] == [0.0, 1.0, 2.0]
    assert [r["predicate_class"] for r in result["rows"]] == ["entangled", "entangled", "separable"]
    assert math.isnan(result["rows"][0]["zbar"])
    assert set(result["rows"][0]) == set(SWEEP_COLUMNS)
    assert result["timings"]["sweep_wall"] > 0


def test_report_agent_writes_table_and_manifest(tmp_path):
    agent = ReportGenerationAgent({"directory": str(tmp_path)})
    rows = [{c: None for c in SWEEP_COLUMNS}]
    rows[0].update(scenario="ising-tunable", method="closed-form", zbar=math.nan)
    path = agent.write_table(rows, agent.default_path("table", "json"), "json")
    assert path == tmp_path / "table.json"
    assert json.loads(path.read_text())[0]["zbar"] is None
    manifest = RunManifest(command="sweep", version="1.0.0", config={}, started_at=agent.now(),
                           wall_clock_seconds=0.1)
    written = agent.write_manifest(manifest, path)
    assert written == tmp_path / "table.manifest.json"
    assert json.loads(written.read_text())["command"] == "sweep"
    with pytest.raises(ConfigurationError):
        agent.write_table(rows, tmp_path / "table.xml", "xml")


def test_report_agent_renders_unknown_kind():
    with pytest.raises(ValueError):
        ReportGenerationAgent().render("pie-chart", {})
