#!/usr/bin/env python3
"""
Main entry point for the noisy exchange entangler
"""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import List, Optional

# Add src to Python path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from config_manager import ConfigManager
from src.core.entangler_service import EXIT_INTERNAL, EXIT_USAGE, EntanglementAnalyzer
from src.core.errors import EntanglerError, UsageError
from src.core.scenarios import ScenarioId

SCENARIOS = [s.value for s in ScenarioId]
METHODS = ["closed-form", "quadrature", "monte-carlo"]


class EntanglerArgumentParser(argparse.ArgumentParser):
    """Parse failures raise UsageError instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _scenario_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--scenario", choices=SCENARIOS, help="Scenario to evaluate")
    parser.add_argument("--lambda", dest="lam", type=float, help="Preparation noise width")
    width = parser.add_mutually_exclusive_group()
    width.add_argument("--omega", type=float, help="Interaction noise width (tunable scenarios)")
    width.add_argument("--capital-lambda", dest="capital_lambda", type=float,
                       help="Refocusing noise width (untunable scenarios)")
    mean = parser.add_mutually_exclusive_group()
    mean.add_argument("--zbar", type=float, help="Mean difference angle (xyz-tunable)")
    mean.add_argument("--theta-minus", dest="zbar", type=float, help="Alias of --zbar")
    parser.add_argument("--phi", type=float, help="Deterministic J_z angle (xyz-tunable, xy-family)")
    parser.add_argument("--xyz-sampling", choices=["sum-difference", "independent"],
                        help="How the xyz-tunable angles are drawn")
    parser.add_argument("--method", choices=METHODS, help="Noise averaging method")
    parser.add_argument("--nodes", type=int, help="Gauss-Hermite nodes for quadrature")
    parser.add_argument("--laguerre-nodes", type=int, help="Gauss-Laguerre nodes per half-line")
    parser.add_argument("--samples", type=int, help="Monte Carlo samples")
    parser.add_argument("--seed", type=int, help="Monte Carlo master seed")
    parser.add_argument("--refocus-noise", choices=["pulse", "duration"],
                        help="Noise source of the refocusing schedule")
    parser.add_argument("--duration-share", type=float,
                        help="Share of the duration variance on the first segment")
    parser.add_argument("--j-tau1", type=float, help="First free-evolution angle J*tau1")


def build_parser() -> argparse.ArgumentParser:
    parser = EntanglerArgumentParser(prog="entangler", description="Noisy Exchange Entangler")
    parser.add_argument("--config", type=str, help="Path to a YAML file overriding the defaults")
    parser.add_argument("--log-level", type=str, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level")
    sub = parser.add_subparsers(dest="command", parser_class=EntanglerArgumentParser)

    verdict = sub.add_parser("verdict", help="Entanglement verdict at one point")
    _scenario_flags(verdict)
    verdict.add_argument("--json", action="store_true", default=None, help="Print the report as JSON")

    sweep = sub.add_parser("sweep", help="Phase-diagram table over a parameter grid")
    _scenario_flags(sweep)
    sweep.add_argument("--grid", action="append", help="Axis spec name=start:stop:step (repeatable)")
    sweep.add_argument("--output", type=str, help="Output file")
    sweep.add_argument("--format", choices=["csv", "json"], help="Output format")
    sweep.add_argument("--workers", type=int, help="Worker processes")

    boundary = sub.add_parser("boundary", help="Entanglement threshold along one width axis")
    _scenario_flags(boundary)
    boundary.add_argument("--axis", choices=["lambda", "omega", "capital_lambda", "capital-lambda"],
                          help="Axis to bisect")
    boundary.add_argument("--lo", type=float, help="Lower end of the bracket")
    boundary.add_argument("--hi", type=float, help="Upper end of the bracket")
    boundary.add_argument("--output", type=str, help="Write the JSON report to this file")
    boundary.add_argument("--json", action="store_true", default=None, help="Print the report as JSON")

    validate = sub.add_parser("validate", help="Compare closed-form predicates with simulation")
    _scenario_flags(validate)
    validate.add_argument("--count", type=int, help="Random points to sample")
    validate.add_argument("--point", action="append", help="Point lambda,width[,zbar] (repeatable)")
    validate.add_argument("--grid", action="append", help="Axis spec name=start:stop:step (repeatable)")
    validate.add_argument("--guard", type=float, help="Skip points with |margin| below this")
    validate.add_argument("--reference-method", choices=METHODS,
                          help="Second averaging method compared by trace distance")
    validate.add_argument("--weight-tolerance", type=float,
                          help="Allowed xy-family weight deviation")
    validate.add_argument("--output", type=str, help="Write the JSON report to this file")
    validate.add_argument("--text", action="store_true", default=None, help="Print a text summary")

    sub.add_parser("version", help="Print version and dependency versions")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: verdict, sweep, boundary, validate or version")
        config_manager = ConfigManager(user_config=args.config)
    except EntanglerError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        analyzer = EntanglementAnalyzer(config_manager, log_level=args.log_level)
        arguments = {k: v for k, v in vars(args).items() if k not in ("command", "config", "log_level")}
        result = asyncio.run(analyzer.handle_command(args.command, arguments))
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return EXIT_INTERNAL

    if result.output:
        stream = sys.stdout if result.exit_code in (0, 1, 2) else sys.stderr
        print(result.output, file=stream)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
