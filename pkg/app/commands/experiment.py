"""
Experiment command
"""

from pathlib import Path

import typer
from rich.table import Table

from app.commands.common import console, reporting_errors, state
from app.services.experiments import EXIT_CHECK, EXIT_OK, run_experiment
from app.utils.config_format import load_config


def experiment_command(
    config: Path = typer.Argument(..., help="Experiment config (key = value or JSON)"),
):
    """
    🧾 Run a configured experiment and write CSV, JSON and a manifest
    """
    with reporting_errors():
        cfg = load_config(config, master_seed=state.seed)

    table = Table(title=f"🧾 {cfg.kind.value}", show_header=True, header_style="bold magenta")
    table.add_column("Setting", style="cyan", no_wrap=True)
    table.add_column("Value", style="green")
    table.add_row("Instances", str(len(cfg.instances)) + (" + generated" if cfg.generate else ""))
    table.add_row("Master seed", str(cfg.master_seed))
    table.add_row("Output", str(cfg.output_dir))
    console.print(table)

    code = run_experiment(cfg)
    if code == EXIT_OK:
        console.print(f"[bold green]✅ Results written to {cfg.output_dir}[/bold green]")
    elif code == EXIT_CHECK:
        console.print(f"[bold yellow]⚠️  A checked property failed; see {cfg.output_dir}[/bold yellow]")
    else:
        console.print("[bold red]❌ Experiment did not run; see the log above[/bold red]")
    raise typer.Exit(code)
