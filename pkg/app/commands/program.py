"""
Program commands: validate and eval
"""

from pathlib import Path
from typing import Optional

import typer

from app.commands.common import (
    console,
    emit_csv,
    emit_json,
    parameter_table,
    read_program,
    reporting_errors,
    wants_csv,
)
from app.models.program import AccessDiscipline
from app.services.branching_program import evaluate, length, queries, size
from app.utils.bits import parse_bits
from app.utils.distribution import exact_distribution


def validate(
    bp: Path = typer.Option(..., "--bp", help="Branching program file (text or JSON)"),
    discipline: Optional[AccessDiscipline] = typer.Option(
        None, "--discipline", "-d", help="Exit with code 2 unless the program satisfies this discipline"
    ),
):
    """
    ✅ Parse a program and report its shape and access disciplines
    """
    with reporting_errors():
        program = read_program(bp)
        report = {
            "valid": True,
            "n": program.n,
            "m": program.m,
            "size": size(program),
            "length": length(program),
            "queries": queries(program),
            "disciplines": {d.value: program.satisfies(d) for d in AccessDiscipline},
        }
    console.print(parameter_table(f"🔍 {bp.name}", {k: v for k, v in report.items() if k != "disciplines"}))
    for name, ok in report["disciplines"].items():
        console.print(f"   {'✅' if ok else '❌'} {name}")
    emit_json(report)
    if discipline is not None and not report["disciplines"][discipline.value]:
        console.print(f"[bold red]❌ Program does not satisfy {discipline.value}[/bold red]")
        raise typer.Exit(2)


def evaluate_command(
    bp: Path = typer.Option(..., "--bp", help="Branching program file"),
    x: str = typer.Option(..., "--x", help="Input bits, e.g. 0110"),
    y: Optional[str] = typer.Option(None, "--y", help="Coin bits; the exact law over all coins when omitted"),
    vertex: Optional[int] = typer.Option(None, "--vertex", "-v", help="Start vertex (default: the program's start)"),
):
    """
    ▶️ Evaluate a program on (x, y), or print its exact output law on x
    """
    with reporting_errors():
        program = read_program(bp)
        v0 = program.start_vertex if vertex is None else vertex
        x_bits = parse_bits(x)
        if y is not None:
            terminal = evaluate(program, v0, x_bits, parse_bits(y))
            emit_json({"vertex": terminal, "output": program.output_bits.get(terminal)})
            return
        law = exact_distribution(program, v0, x_bits)
    if wants_csv():
        emit_csv(["vertex", "probability"], [{"vertex": v, "probability": str(p)} for v, p in law.items()])
    else:
        emit_json({"distribution": law.to_json()})
