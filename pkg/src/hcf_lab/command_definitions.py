"""
Command definitions for the hcf-lab command-line front end.

Each subcommand is described once as a CommandDefinition (name, help text,
arguments). The CLI turns these into argparse subparsers, so argument
names, defaults and help strings live in one place.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from .constants import (
    DEFAULT_SEED,
    FAMILY_PARAMETERS,
    INTEGRATOR_METHODS,
    OUTPUT_FORMATS,
    REDUCED_SYSTEMS,
)
from .exceptions import ValidationError


@dataclass(frozen=True)
class ArgumentDefinition:
    """One argparse argument: flags plus keyword options."""
    flags: Sequence[str]
    options: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class CommandDefinition:
    """A subcommand with its arguments."""
    name: str
    help: str
    arguments: List[ArgumentDefinition] = field(default_factory=list)


class ArgumentBuilder:
    """
    Builder for argument definitions.

    Provides methods to create consistent argument definitions with
    help text and defaults.
    """

    @staticmethod
    def create_float_argument(
        flag: str,
        help: str,
        default: Optional[float] = None,
        required: bool = False
    ) -> ArgumentDefinition:
        options: Dict[str, Any] = {"type": float, "help": help, "default": default}
        if required:
            options["required"] = True
        return ArgumentDefinition([flag], options)

    @staticmethod
    def create_int_argument(flag: str, help: str, default: Optional[int] = None) -> ArgumentDefinition:
        return ArgumentDefinition([flag], {"type": int, "help": help, "default": default})

    @staticmethod
    def create_choice_argument(
        flag: str,
        help: str,
        choices: Sequence[str],
        default: Optional[str] = None
    ) -> ArgumentDefinition:
        return ArgumentDefinition([flag], {"choices": sorted(choices), "help": help, "default": default})

    @staticmethod
    def create_flag_argument(flag: str, help: str) -> ArgumentDefinition:
        return ArgumentDefinition([flag], {"action": "store_true", "help": help})

    @staticmethod
    def create_positional_argument(name: str, help: str, nargs: Optional[str] = None) -> ArgumentDefinition:
        options: Dict[str, Any] = {"help": help}
        if nargs:
            options["nargs"] = nargs
        return ArgumentDefinition([name], options)


def create_global_arguments() -> List[ArgumentDefinition]:
    """Flags shared by every subcommand."""
    return [
        ArgumentBuilder.create_float_argument("--tol", "Verdict/acceptance tolerance override"),
        ArgumentBuilder.create_int_argument("--seed", "Seed for random metrics and samples", DEFAULT_SEED),
        ArgumentDefinition(["--out"], {"help": "Output directory for artifacts", "default": None}),
        ArgumentBuilder.create_choice_argument("--integrator", "Runge-Kutta method", INTEGRATOR_METHODS),
        ArgumentBuilder.create_float_argument("--t-max", "Final integration time"),
        ArgumentBuilder.create_choice_argument("--format", "Artifact format; json without --out prints JSON", OUTPUT_FORMATS),
        ArgumentBuilder.create_flag_argument("--debug", "Enable debug logging"),
    ]


def create_command_definitions() -> List[CommandDefinition]:
    """
    Definitions of all subcommands.

    Returns:
        List[CommandDefinition]: One definition per subcommand
    """
    family_help = "Family spec name[:key=value,...]; names: " + ", ".join(sorted(FAMILY_PARAMETERS))
    return [
        CommandDefinition(
            "families",
            "List or export the algebra/metric families",
            [
                ArgumentBuilder.create_choice_argument("action", "list or export", ["list", "export"]),
                ArgumentBuilder.create_positional_argument("family", family_help, nargs="?"),
            ],
        ),
        CommandDefinition(
            "audit",
            "Soliton certificate of an algebra+metric file or a family",
            [
                ArgumentBuilder.create_positional_argument("source", "System JSON file or " + family_help),
                ArgumentBuilder.create_flag_argument("--random-metric", "Replace the metric by a seeded random one"),
            ],
        ),
        CommandDefinition(
            "flow-metric",
            "Integrate the metric flow dH/dt = -H P(H)",
            [
                ArgumentBuilder.create_positional_argument("source", "System JSON file or " + family_help),
            ],
        ),
        CommandDefinition(
            "flow-reduced",
            "Integrate the reduced (x, y, z) or (y, z) system",
            [
                ArgumentBuilder.create_choice_argument("system", "Reduced system", REDUCED_SYSTEMS),
                ArgumentBuilder.create_positional_argument("state", "Initial values", nargs="+"),
                ArgumentBuilder.create_int_argument("--n", "Rank parameter n of sl(n+1)", 2),
            ],
        ),
        CommandDefinition(
            "sln-instability",
            "Instability of the canonical metric on sl(n+1, C)",
            [
                ArgumentBuilder.create_int_argument("--n", "Rank parameter n >= 2", 2),
                ArgumentBuilder.create_float_argument("--y0", "Initial y in D", 0.999),
                ArgumentBuilder.create_float_argument("--z0", "Initial z in D", 0.999),
            ],
        ),
        CommandDefinition("homothety", "Homothety distinction on the perfect family", []),
        CommandDefinition(
            "orbit-drift",
            "Full metric flow near the nu_0 soliton of the perfect family",
            [
                ArgumentBuilder.create_float_argument("--a0", "Gauge parameter a0 != 0", 1.0),
                ArgumentBuilder.create_float_argument("--b0", "Gauge parameter b0", 0.01),
            ],
        ),
        CommandDefinition(
            "acceptance",
            "Run the acceptance criteria",
            [
                ArgumentDefinition(["--only"], {"type": int, "nargs": "+", "help": "Criterion numbers to run"}),
            ],
        ),
    ]


def get_command_definition(name: str) -> CommandDefinition:
    """
    Look up a subcommand definition by name.

    Raises:
        ValidationError: If no such subcommand exists
    """
    for definition in create_command_definitions():
        if definition.name == name:
            return definition
    raise ValidationError(f"Unknown command: {name}", field_name="command", field_value=name)
