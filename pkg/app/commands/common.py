"""
Shared CLI plumbing: the stderr console, global flag state, output emitters
and error reporting.
"""

import csv
import io
import json
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from app.errors import ConfigurationError, DerandError, InputError
from app.models.program import RandomizedBranchingProgram
from app.utils.bp_format import parse_bp

# Data goes to stdout through typer.echo; everything human-facing goes here.
console = Console(stderr=True)


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


@dataclass
class CliState:
    seed: Optional[int] = None
    format: Optional[OutputFormat] = None


state = CliState()

OVERRIDE_ALIASES = {
    "r": "r_override",
    "eps": "prg_eps",
    "block": "block_size_override",
    "threshold": "threshold_override",
    "h": "h_override",
    "nisan_block": "nisan_block_override",
}


def parse_overrides(text: Optional[str]) -> Dict[str, Any]:
    """`r=6,eps=0.1` -> SimulationConfig fields; short aliases are expanded."""
    overrides: Dict[str, Any] = {}
    if not text:
        return overrides
    for item in text.split(","):
        if "=" not in item:
            raise ConfigurationError(f"Override {item!r} is not key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        key = OVERRIDE_ALIASES.get(key, key)
        try:
            overrides[key] = int(value)
        except ValueError:
            try:
                overrides[key] = float(value)
            except ValueError:
                raise ConfigurationError(f"Override {key} needs a number, got {value!r}") from None
    return overrides


def parse_seed(text: Optional[str]) -> int:
    """Hex master seed from a flag, else the global --seed, else 0."""
    if text is None:
        return state.seed or 0
    try:
        return int(text, 16)
    except ValueError:
        raise InputError(f"Master seed must be hex, got {text!r}") from None


def read_program(path: Path) -> RandomizedBranchingProgram:
    try:
        return parse_bp(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"Cannot read {path}: {exc.strerror}") from exc


def emit_json(data: Any) -> None:
    typer.echo(json.dumps(data, indent=2, sort_keys=True))


def emit_csv(columns: List[str], rows: Iterable[Dict[str, Any]]) -> None:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    typer.echo(buffer.getvalue(), nl=False)


def wants_csv(default: OutputFormat = OutputFormat.JSON) -> bool:
    return (state.format or default) == OutputFormat.CSV


def emit_rows(columns: List[str], rows: List[Dict[str, Any]], summary: Optional[Dict[str, Any]] = None) -> None:
    """Rows as CSV unless --format json asks for {"rows": ..., "summary": ...}."""
    if wants_csv(default=OutputFormat.CSV):
        emit_csv(columns, rows)
        return
    payload: Dict[str, Any] = {"rows": rows}
    if summary is not None:
        payload["summary"] = summary
    emit_json(payload)


def parameter_table(title: str, values: Dict[str, Any]) -> Table:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Parameter", style="cyan", no_wrap=True)
    table.add_column("Value", style="green")
    for key, value in values.items():
        table.add_row(key, str(value))
    return table


@contextmanager
def reporting_errors() -> Iterator[None]:
    """Print toolkit and validation errors in red and exit with code 1."""
    try:
        yield
    except (DerandError, ValidationError) as exc:
        console.print(f"[bold red]❌ {type(exc).__name__}:[/bold red] {exc}")
        raise typer.Exit(1)


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise InputError(f"Expected comma-separated integers, got {text!r}") from None
