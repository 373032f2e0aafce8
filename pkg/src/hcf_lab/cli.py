"""
Command-line front end for the HCF lab.

Wires the families, curvature and flow modules into the named experiments,
writes JSON/CSV artifacts and maps errors to exit codes: 0 on success,
1 when a criterion fails, 2 on invalid input.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .command_definitions import (
    CommandDefinition,
    create_command_definitions,
    create_global_arguments,
)
from .constants import (
    DEFAULT_SEED,
    EXIT_CRITERION_FAILURE,
    EXIT_INPUT_ERROR,
    EXIT_SUCCESS,
    FAMILY_DESCRIPTIONS,
    FAMILY_PARAMETERS,
    INTEGRATOR_METHODS,
    OUTPUT_FORMATS,
    TOL_VERDICT,
)
from .exceptions import (
    DimensionMismatchError,
    ExperimentError,
    FileFormatError,
    HcfLabError,
    IndefiniteMetricError,
    IntegrationError,
    NotALieAlgebraError,
    SingularGaugeError,
    TemplateError,
    ValidationError,
)
from .experiments import (
    ExperimentResult,
    default_config,
    exp_flow_metric,
    exp_flow_reduced,
    exp_homothety_distinction,
    exp_orbit_drift,
    exp_sln_instability,
    exp_soliton_audit,
    run_acceptance,
)
from .families import build_named_family, parse_family_spec
from .file_formats import dumps, write_json, write_system, write_trace_csv
from .flow import IntegratorConfig
from .reports import ReportRenderer
from .validators import ParameterValidator

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class LabConfig:
    """
    Run-wide settings collected from the global flags.

    Centralizes the tolerance override, seed, output location, integrator
    overrides and logging level.
    """

    def __init__(
        self,
        tol: Optional[float] = None,
        seed: int = DEFAULT_SEED,
        out: Optional[str] = None,
        integrator: Optional[str] = None,
        t_max: Optional[float] = None,
        output_format: Optional[str] = None,
        debug: bool = False
    ):
        self.tol = tol
        self.seed = seed
        self.out = Path(out) if out else None
        self.integrator = integrator
        self.t_max = t_max
        self.output_format = output_format or "json"
        self.stdout_json = output_format == "json"
        self.debug = debug

        self._validate_config()

    def _validate_config(self) -> None:
        """Validate configuration parameters."""
        if self.tol is not None:
            ParameterValidator.validate_positive_field(self.tol, "tol")
        ParameterValidator.validate_integer_field(self.seed, "seed", 0)
        if self.integrator is not None:
            ParameterValidator.validate_enum_field(self.integrator, "integrator", INTEGRATOR_METHODS)
        if self.t_max is not None:
            ParameterValidator.validate_positive_field(self.t_max, "t_max")
        ParameterValidator.validate_enum_field(self.output_format, "format", OUTPUT_FORMATS)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "LabConfig":
        return cls(
            tol=args.tol,
            seed=args.seed,
            out=args.out,
            integrator=args.integrator,
            t_max=args.t_max,
            output_format=args.format,
            debug=args.debug,
        )

    @property
    def verdict_tol(self) -> float:
        return self.tol if self.tol is not None else TOL_VERDICT

    def integrator_config(self, experiment: str) -> IntegratorConfig:
        """Experiment defaults with the --integrator/--t-max overrides applied."""
        changes: Dict[str, Any] = {}
        if self.integrator is not None:
            changes["method"] = self.integrator
        if self.t_max is not None:
            changes["t_max"] = self.t_max
        base = default_config(experiment)
        return base.replace(**changes) if changes else base

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "tol": self.tol,
            "seed": self.seed,
            "out": str(self.out) if self.out else None,
            "integrator": self.integrator,
            "t_max": self.t_max,
            "format": self.output_format,
            "debug": self.debug,
        }


def _add_arguments(parser: argparse.ArgumentParser, definitions: Sequence[Any]) -> None:
    for definition in definitions:
        parser.add_argument(*definition.flags, **definition.options)


def build_parser() -> argparse.ArgumentParser:
    """argparse parser with one subparser per command definition."""
    common = argparse.ArgumentParser(add_help=False)
    _add_arguments(common, create_global_arguments())

    parser = argparse.ArgumentParser(
        prog="hcf-lab",
        description="Numerical lab for the positive Hermitian curvature flow on complex Lie groups",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    definition: CommandDefinition
    for definition in create_command_definitions():
        sub = subparsers.add_parser(definition.name, help=definition.help, parents=[common])
        _add_arguments(sub, definition.arguments)
    return parser


def _emit(
    config: LabConfig,
    template: str,
    payload: Dict[str, Any],
    result: Optional[ExperimentResult] = None
) -> None:
    """Write artifacts under --out and print the text (or JSON) report."""
    document = {"seed": config.seed, "config": config.to_dict()}
    document.update(payload)
    if config.out is not None:
        write_json(document, config.out / "report.json")
        if result is not None and config.output_format == "csv":
            for name, trace in result.traces.items():
                write_trace_csv(
                    trace,
                    config.out / f"{name}.csv",
                    result.state_labels.get(name),
                    seed=config.seed,
                    experiment=result.name,
                )
        logger.info(f"Artifacts written to {config.out}")
    if config.stdout_json and config.out is None:
        print(dumps(document))
    else:
        print(ReportRenderer().render(template, **payload), end="")


def _families(args: argparse.Namespace, config: LabConfig) -> int:
    if args.action == "list":
        families = {
            name: {"description": FAMILY_DESCRIPTIONS[name], "params": FAMILY_PARAMETERS[name]}
            for name in FAMILY_PARAMETERS
        }
        if config.stdout_json and config.out is None:
            print(dumps({"families": families}))
        else:
            print(ReportRenderer().render("families", families=families), end="")
        return EXIT_SUCCESS

    if not args.family:
        raise ValidationError("families export needs a family spec", field_name="family")
    name, params = parse_family_spec(args.family)
    alg, g = build_named_family(name, params)
    target = (config.out or Path(".")) / f"{name}.json"
    write_system(alg, g, target, family=name, params=params, seed=config.seed)
    print(str(target))
    return EXIT_SUCCESS


def _audit(args: argparse.Namespace, config: LabConfig) -> int:
    result = exp_soliton_audit(args.source, config.verdict_tol, config.seed, args.random_metric)
    payload = dict(result.report)
    payload.setdefault("perfectness", None)
    _emit(config, "certificate", payload, result)
    return EXIT_SUCCESS


def _flow_metric(args: argparse.Namespace, config: LabConfig) -> int:
    result = exp_flow_metric(args.source, config.integrator_config("flow-metric"), config.seed)
    _emit(config, "flow", dict(result.report, title=f"Metric flow of {args.source}"), result)
    return EXIT_SUCCESS


def _flow_reduced(args: argparse.Namespace, config: LabConfig) -> int:
    try:
        state = [float(v) for v in args.state]
    except ValueError:
        raise ValidationError("Initial values must be numeric", field_name="state", field_value=args.state)
    result = exp_flow_reduced(args.system, args.n, state, config.integrator_config("flow-reduced"))
    _emit(config, "flow", dict(result.report, title=f"Reduced {args.system} flow, n = {args.n}"), result)
    return EXIT_SUCCESS


def _sln_instability(args: argparse.Namespace, config: LabConfig) -> int:
    result = exp_sln_instability(args.n, args.y0, args.z0, config.integrator_config("sln-instability"))
    _emit(config, "sln-instability", result.report, result)
    return EXIT_SUCCESS if result.passed else EXIT_CRITERION_FAILURE


def _homothety(args: argparse.Namespace, config: LabConfig) -> int:
    result = exp_homothety_distinction()
    _emit(config, "homothety", result.report, result)
    return EXIT_SUCCESS if result.passed else EXIT_CRITERION_FAILURE


def _orbit_drift(args: argparse.Namespace, config: LabConfig) -> int:
    result = exp_orbit_drift(args.a0, args.b0, config.integrator_config("orbit-drift"))
    _emit(config, "orbit-drift", result.report, result)
    return EXIT_SUCCESS if result.passed else EXIT_CRITERION_FAILURE


def _acceptance(args: argparse.Namespace, config: LabConfig) -> int:
    summary = run_acceptance(config.tol, config.seed, args.only)
    payload = summary.to_dict()
    if config.out is not None:
        write_json(payload, config.out / "acceptance.json")
    if config.stdout_json and config.out is None:
        print(dumps(payload))
    else:
        print(ReportRenderer().render("acceptance", **payload), end="")
    return EXIT_SUCCESS if summary.passed else EXIT_CRITERION_FAILURE


_HANDLERS = {
    "families": _families,
    "audit": _audit,
    "flow-metric": _flow_metric,
    "flow-reduced": _flow_reduced,
    "sln-instability": _sln_instability,
    "homothety": _homothety,
    "orbit-drift": _orbit_drift,
    "acceptance": _acceptance,
}


def _report_error(e: HcfLabError, command: str) -> None:
    logger.error(f"{type(e).__name__} in {command}: {e.message}")
    logger.debug(f"Error context: {e.to_dict()}")
    print(dumps({"error": e.to_dict()}), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and return its exit code.

    Args:
        argv: Argument list (defaults to sys.argv[1:])
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_SUCCESS if e.code == 0 else EXIT_INPUT_ERROR

    command = args.command
    try:
        config = LabConfig.from_args(args)
        if config.debug:
            logging.getLogger().setLevel(logging.DEBUG)
        logger.debug(f"Configuration: {config.to_dict()}")
        return _HANDLERS[command](args, config)

    except (ValidationError, DimensionMismatchError, FileFormatError) as e:
        _report_error(e, command)
        return EXIT_INPUT_ERROR
    except (NotALieAlgebraError, IndefiniteMetricError, SingularGaugeError) as e:
        _report_error(e, command)
        return EXIT_INPUT_ERROR
    except ExperimentError as e:
        _report_error(e, command)
        return EXIT_INPUT_ERROR
    except IntegrationError as e:
        _report_error(e, command)
        return EXIT_CRITERION_FAILURE
    except TemplateError as e:
        _report_error(e, command)
        return EXIT_CRITERION_FAILURE
    except HcfLabError as e:
        _report_error(e, command)
        return EXIT_CRITERION_FAILURE


def run() -> None:
    """
    Entry point function for the hcf-lab command.

    This function is called when the tool is started via the command line.
    """
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        sys.exit(EXIT_CRITERION_FAILURE)


if __name__ == "__main__":
    run()
