"""
Command-line interface for the derandomization toolkit
"""

from typing import Optional

import typer

from app.config import settings

from .common import OutputFormat, state
from .experiment import experiment_command
from .gip import derand_sr_command, gip_command
from .primitives import extractor_test_command, ff_test_command, prg_command
from .program import evaluate_command, validate
from .simulation import hybrid_compare_command, simulate_command

cli = typer.Typer(
    name="derand",
    help="🎲 Typically-correct derandomization of randomized branching programs",
    rich_markup_mode="rich",
    no_args_is_help=True,
)


@cli.callback()
def main(
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed for commands that draw randomness"),
    output_format: Optional[OutputFormat] = typer.Option(
        None, "--format", "-f", help="json or csv (each command has its own default)"
    ),
    exact: bool = typer.Option(True, "--exact/--float", help="Exact rational or float64 probabilities"),
    cap: Optional[int] = typer.Option(None, "--cap", help="Enumeration cap (default 2^22)"),
):
    """
    Global flags apply to every sub-command.
    """
    settings.reset_overrides()
    settings.override(ARITHMETIC="exact" if exact else "float", ENUMERATION_CAP=cap)
    state.seed = seed
    state.format = output_format


cli.command(name="validate")(validate)
cli.command(name="eval")(evaluate_command)
cli.command(name="simulate")(simulate_command)
cli.command(name="hybrid-compare")(hybrid_compare_command)
cli.command(name="extractor-test")(extractor_test_command)
cli.command(name="prg")(prg_command)
cli.command(name="gip")(gip_command)
cli.command(name="derand-sr")(derand_sr_command)
cli.command(name="ff-test")(ff_test_command)
cli.command(name="experiment")(experiment_command)

__all__ = ["cli"]
