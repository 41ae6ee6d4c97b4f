"""
Command service for the noisy exchange entangler
Owns the agents and dispatches CLI commands to them
"""

import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from loguru import logger
from pydantic import BaseModel

from .. import __version__
from ..agents.report_generation_agent import ReportGenerationAgent, RunManifest, dependency_versions
from ..agents.sweep_agent import SweepAgent, SweepGrid
from .entangle import mixedness_fraction
from .errors import (
    ConfigurationError,
    ContractViolation,
    EntanglerError,
    NoSignChangeError,
    UsageError,
)
from .noisechan import MonteCarlo
from .scenarios import (
    Axis,
    ScenarioConfig,
    ScenarioId,
    boundary_bisect,
    grid_points,
    run_scenario,
    sample_points,
    validate,
)

EXIT_ENTANGLED = 0
EXIT_SEPARABLE = 1
EXIT_INDETERMINATE = 2
EXIT_NO_SIGN_CHANGE = 3
EXIT_USAGE = 64
EXIT_INTERNAL = 70

COMMANDS = ("verdict", "sweep", "boundary", "validate", "version")

AXIS_NAMES = {
    "lambda": Axis.PREP_WIDTH,
    "omega": Axis.INTERACTION_WIDTH,
    "capital_lambda": Axis.INTERACTION_WIDTH,
}


@dataclass
class CommandResult:
    exit_code: int
    output: str = ""


class VerdictReport(BaseModel):
    scenario: ScenarioId
    model: str
    parameters: Dict[str, float]
    method: str
    seed: Optional[int]
    verdict: str
    min_pt_eigenvalue: float
    negativity: float
    predicate_class: str
    predicate_margin: float
    initial_entropy_bits: float
    mixedness: float
    final_purity: float


def _defaults_key(key: str) -> str:
    key = key.replace("-", "_")
    return "lam" if key == "lambda" else key


class EntanglementAnalyzer:
    """Dispatches entangler commands to the library and the agents"""

    def __init__(self, config_manager, log_level: Optional[str] = None):
        self.config_manager = config_manager
        self.settings = config_manager.settings
        self.agents: Dict[str, Any] = {}
        self._setup_logging(log_level)
        self._initialize_agents()

    def _setup_logging(self, level: Optional[str] = None):
        """Setup logging configuration"""
        log_config = self.settings.logging
        level = (level or log_config.level).upper()
        logger.remove()
        logger.add(sys.stderr, level=level,
                   format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name} - {message}")
        if log_config.file:
            log_file = Path(log_config.file)
            log_file.parent.mkdir(parents=True, exist_ok=True)
            logger.add(log_file, level=level, rotation=log_config.max_size,
                       retention=log_config.backup_count, encoding="utf-8")
        self.logger = logger.bind(agent="EntanglementAnalyzer")

    def _initialize_agents(self):
        """Initialize all agents"""
        self.agents["sweep"] = SweepAgent(self.settings.sweep.model_dump())
        self.agents["report_generation"] = ReportGenerationAgent(self.settings.output.model_dump())
        self.logger.debug("All agents initialized successfully")

    # Argument resolution

    def _merge_defaults(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """Flags override the ``defaults:`` section of the user config file"""
        merged = {_defaults_key(k): v for k, v in self.config_manager.get_defaults().items()}
        merged.update({k: v for k, v in arguments.items() if v is not None})
        return merged

    def _method(self, args: Dict[str, Any], name: Optional[str] = None):
        return self.config_manager.averaging_method(
            name or args.get("method"),
            nodes=args.get("nodes"),
            laguerre_nodes=args.get("laguerre_nodes"),
            samples=args.get("samples"),
            seed=args.get("seed"),
        )

    def _scenario(self, args: Dict[str, Any]) -> ScenarioId:
        name = args.get("scenario")
        if name is None:
            raise UsageError("--scenario is required")
        try:
            return ScenarioId(name)
        except ValueError as e:
            raise UsageError(f"unknown scenario {name!r}; expected one of {[s.value for s in ScenarioId]}") from e

    def _interaction_width(self, sid: ScenarioId, args: Dict[str, Any]) -> float:
        omega, capital = args.get("omega"), args.get("capital_lambda")
        if sid.is_untunable:
            if omega is not None:
                raise ConfigurationError(f"{sid.value} takes --capital-lambda, not --omega")
            return 0.0 if capital is None else capital
        if capital is not None:
            raise ConfigurationError(f"{sid.value} takes --omega, not --capital-lambda")
        return 0.0 if omega is None else omega

    def build_config(self, args: Dict[str, Any]) -> ScenarioConfig:
        sid = self._scenario(args)
        fields: Dict[str, Any] = {
            "id": sid,
            "prep_width": args.get("lam", 0.0),
            "interaction_width": self._interaction_width(sid, args),
            "method": self._method(args),
            "verdict_tolerance": self.settings.numerics.verdict_tolerance,
        }
        if args.get("zbar") is not None:
            fields["mean_theta_minus"] = args["zbar"]
        elif sid is ScenarioId.XYZ_TUNABLE:
            fields["mean_theta_minus"] = 0.0
        if args.get("phi") is not None:
            fields["phi"] = args["phi"]
        if args.get("xyz_sampling") is not None:
            fields["xyz_sampling"] = args["xyz_sampling"]
        refocus = self.settings.refocus
        if sid.is_untunable:
            fields["refocus"] = self.config_manager.refocus_schedule(args.get("j_tau1"))
            fields["untunable_noise"] = args.get("refocus_noise", refocus.noise)
            fields["duration_share"] = args.get("duration_share", refocus.duration_share)
        else:
            for flag in ("j_tau1", "refocus_noise", "duration_share"):
                if args.get(flag) is not None:
                    raise ConfigurationError(f"--{flag.replace('_', '-')} applies to untunable scenarios only")
        return ScenarioConfig.build(**fields)

    def _manifest(self, command: str, args: Dict[str, Any], started: float, started_at: str,
                  timings: Dict[str, float], workers: int = 1, points: int = 0,
                  seed: Optional[int] = None) -> RunManifest:
        resolved = {k: v for k, v in args.items() if k != "command"}
        return RunManifest(
            command=command,
            version=__version__,
            config={"arguments": json.loads(json.dumps(resolved, default=str)),
                    "settings": self.settings.model_dump()},
            seed=seed,
            started_at=started_at,
            wall_clock_seconds=time.perf_counter() - started,
            timings=timings,
            workers=workers,
            points=points,
        )

    # Commands

    async def _verdict(self, args: Dict[str, Any]) -> CommandResult:
        c = self.build_config(args)
        result = run_scenario(c)
        parameters = {"lambda": c.prep_width, c.id.width_name: c.interaction_width}
        if c.id is ScenarioId.XYZ_TUNABLE:
            parameters["zbar"] = c.theta_minus
        if c.id in (ScenarioId.XYZ_TUNABLE, ScenarioId.XY_FAMILY):
            parameters["phi"] = c.phi_value
        report = VerdictReport(
            scenario=c.id,
            model=result.model.value,
            parameters=parameters,
            method=result.method,
            seed=result.seed,
            verdict=result.verdict.label,
            min_pt_eigenvalue=result.verdict.min_pt_eigenvalue,
            negativity=result.verdict.negativity,
            predicate_class=result.predicate.classification.value,
            predicate_margin=result.predicate.margin,
            initial_entropy_bits=result.initial_entropy,
            mixedness=mixedness_fraction(result.initial_state),
            final_purity=result.final_state.purity(),
        )
        if result.verdict.entangled:
            code = EXIT_ENTANGLED
        elif result.verdict.indeterminate:
            code = EXIT_INDETERMINATE
        else:
            code = EXIT_SEPARABLE
        if args.get("json"):
            return CommandResult(code, report.model_dump_json(indent=2))
        data = report.model_dump()
        data["scenario"] = c.id.value
        return CommandResult(code, self.agents["report_generation"].render("verdict", data))

    async def _sweep(self, args: Dict[str, Any]) -> CommandResult:
        started, started_at = time.perf_counter(), ReportGenerationAgent.now()
        specs = args.get("grid") or []
        if not specs:
            raise UsageError("sweep needs at least one --grid name=start:stop:step")
        base = self.build_config(args)
        grid = SweepGrid.from_specs(base.id, specs, self.settings.sweep.max_points)
        fmt = args.get("format", self.settings.output.format)
        reporter = self.agents["report_generation"]
        out = Path(args["output"]) if args.get("output") else reporter.default_path(f"sweep_{base.id.value}", fmt)

        sweep = await self.agents["sweep"].run_sweep(base, grid, args.get("workers"))
        path = reporter.write_table(sweep["rows"], out, fmt)
        seed = base.method.seed if isinstance(base.method, MonteCarlo) else None
        manifest = self._manifest("sweep", args, started, started_at, sweep["timings"],
                                  sweep["workers"], sweep["points"], seed)
        reporter.write_manifest(manifest, path)
        return CommandResult(EXIT_ENTANGLED, f"Wrote {sweep['points']} rows to {path}")

    async def _boundary(self, args: Dict[str, Any]) -> CommandResult:
        started, started_at = time.perf_counter(), ReportGenerationAgent.now()
        base = self.build_config(args)
        axis_name = str(args.get("axis", "lambda")).replace("-", "_")
        if axis_name not in AXIS_NAMES:
            raise UsageError(f"unknown axis {axis_name!r}; expected one of {sorted(AXIS_NAMES)}")
        bracket = (args.get("lo", 0.0), args.get("hi", 3.0))
        report = boundary_bisect(base, AXIS_NAMES[axis_name], bracket, self.settings.numerics.boundary_tolerance)
        reporter = self.agents["report_generation"]
        if args.get("output"):
            path = reporter.write_json(report, Path(args["output"]))
            reporter.write_manifest(self._manifest("boundary", args, started, started_at, {}), path)
        if args.get("json"):
            return CommandResult(EXIT_ENTANGLED, report.model_dump_json(indent=2))
        data = report.model_dump()
        data.update(scenario=report.scenario.value, axis=report.axis.value)
        return CommandResult(EXIT_ENTANGLED, reporter.render("boundary", data))

    def _points(self, sid: ScenarioId, args: Dict[str, Any]) -> List[Tuple[float, float, Optional[float]]]:
        if args.get("point"):
            points = []
            for text in args["point"]:
                try:
                    values = [float(v) for v in text.split(",")]
                except ValueError as e:
                    raise UsageError(f"bad --point {text!r}: {e}") from e
                if len(values) not in (2, 3):
                    raise UsageError(f"--point takes lambda,width[,zbar], got {text!r}")
                points.append((values[0], values[1], values[2] if len(values) == 3 else None))
            return points
        if args.get("grid"):
            grid = SweepGrid.from_specs(sid, args["grid"], self.settings.sweep.max_points)
            by_field = {a.field: a.values() for a in grid.axes}
            return grid_points(sid, by_field.get("prep_width", [args.get("lam", 0.0)]),
                               by_field.get("interaction_width", [0.0]), args.get("zbar"))
        seed = args.get("seed", self.settings.averaging.seed)
        return sample_points(sid, int(args.get("count", 100)), seed)

    async def _validate(self, args: Dict[str, Any]) -> CommandResult:
        started, started_at = time.perf_counter(), ReportGenerationAgent.now()
        sid = self._scenario(args)
        numerics = self.settings.numerics
        extra: Dict[str, Any] = {"verdict_tolerance": numerics.verdict_tolerance}
        if args.get("xyz_sampling") is not None:
            extra["xyz_sampling"] = args["xyz_sampling"]
        if args.get("phi") is not None:
            extra["phi"] = args["phi"]
        if sid.is_untunable:
            extra["refocus"] = self.config_manager.refocus_schedule(args.get("j_tau1"))
            extra["untunable_noise"] = args.get("refocus_noise", self.settings.refocus.noise)
            extra["duration_share"] = args.get("duration_share", self.settings.refocus.duration_share)
        reference = args.get("reference_method")
        report = validate(
            sid,
            self._points(sid, args),
            method=self._method(args),
            reference_method=self._method(args, reference) if reference else None,
            guard=args.get("guard", numerics.guard_band),
            extra=extra,
        )
        passed = report.passed
        tolerance = args.get("weight_tolerance", numerics.weight_tolerance)
        if report.max_weight_deviation is not None and report.max_weight_deviation > tolerance:
            self.logger.warning(f"Weight deviation {report.max_weight_deviation:.3e} exceeds {tolerance:.1e}")
            passed = False
        reporter = self.agents["report_generation"]
        if args.get("output"):
            path = reporter.write_json(report, Path(args["output"]))
            reporter.write_manifest(self._manifest("validate", args, started, started_at, report.timings,
                                                   points=report.points), path)
        code = EXIT_ENTANGLED if passed else EXIT_SEPARABLE
        if args.get("text"):
            data = report.model_dump()
            data.update(scenario=sid.value, passed=passed)
            return CommandResult(code, reporter.render("validation", data))
        return CommandResult(code, report.model_dump_json(indent=2))

    async def _version(self, args: Dict[str, Any]) -> CommandResult:
        lines = [f"{self.settings.analyzer.name} {__version__}"]
        lines += [f"  {name} {version}" for name, version in dependency_versions().items()]
        return CommandResult(EXIT_ENTANGLED, "\n".join(lines))

    async def handle_command(self, name: str, arguments: Dict[str, Any]) -> CommandResult:
        """Run one command and map failures to exit codes"""
        try:
            self.logger.info(f"Executing command: {name} with arguments: {arguments}")
            if name not in COMMANDS:
                raise UsageError(f"Unknown command: {name}")
            args = self._merge_defaults(arguments)
            return await getattr(self, f"_{name}")(args)
        except NoSignChangeError as e:
            self.logger.error(str(e))
            return CommandResult(EXIT_NO_SIGN_CHANGE, f"No sign change: {e}")
        except (UsageError, ConfigurationError, ContractViolation) as e:
            self.logger.error(f"Error executing command {name}: {e}")
            return CommandResult(EXIT_USAGE, f"Error: {e}")
        except EntanglerError as e:
            self.logger.error(f"Error executing command {name}: {e}")
            return CommandResult(EXIT_INTERNAL, f"Error: {e}")
        except Exception as e:
            self.logger.exception(f"Unexpected failure in command {name}: {e}")
            return CommandResult(EXIT_INTERNAL, f"Internal error: {e}")
