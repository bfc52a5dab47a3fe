"""
GIP commands: gip and derand-sr
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Optional

import typer
from rich.panel import Panel

from app.commands.common import (
    console,
    emit_json,
    emit_rows,
    read_program,
    reporting_errors,
)
from app.errors import InputError
from app.services.branching_program import failure_probability, majority_truth_table
from app.services.experiments import probability_text
from app.services.gip_derand import BOUND_TEMPLATE, derandomize_sr, generate_R, mistake_table
from app.utils.bits import bits_to_hex, format_bits, parse_bits
from app.utils.config_format import load_truth_table


def gip_command(
    x: str = typer.Option(..., "--x", help="Input bits"),
    m: int = typer.Option(..., "--m", help="Number of output bits, at most n/3"),
):
    """
    🔀 Print R(x), the GIP coin string generated from the input, in hex
    """
    with reporting_errors():
        typer.echo(bits_to_hex(generate_R(parse_bits(x), m)))


def derand_sr_command(
    bp: Path = typer.Option(..., "--bp", help="S_R branching program file"),
    truth: Optional[Path] = typer.Option(None, "--truth", help="Truth table file; majority vote when omitted"),
    exhaustive: bool = typer.Option(False, "--exhaustive", help="Tabulate every x in {0,1}^n"),
    x: Optional[str] = typer.Option(None, "--x", help="Evaluate a single input"),
    summary_path: Optional[Path] = typer.Option(None, "--summary", help="Also write the summary JSON here"),
):
    """
    🎯 Evaluate P(x, R(x)) and measure how often it disagrees with f
    """
    with reporting_errors():
        program = read_program(bp)
        if x is not None and not exhaustive:
            bits = parse_bits(x)
            emit_json({"x": x, "R": format_bits(generate_R(bits, program.m)), "output": derandomize_sr(program, bits)})
            return
        if not exhaustive:
            raise InputError("Pass --exhaustive for the mistake table or --x for one input")
        table = load_truth_table(truth) if truth is not None else majority_truth_table(program)
        rows = [
            {"x": format_bits(row.x), "f(x)": row.expected, "P(x,R(x))": row.derandomized,
             "mismatch": int(row.mismatch)}
            for row in mistake_table(program, table)
        ]
        mismatches = sum(row["mismatch"] for row in rows)
        summary = {
            "mistake_density": probability_text(Fraction(mismatches, len(rows))),
            "delta_measured": probability_text(failure_probability(program, table)),
            "bound_template": BOUND_TEMPLATE,
        }
    console.print(Panel.fit(
        f"mistake density [bold]{summary['mistake_density']}[/bold]\n"
        f"measured delta {summary['delta_measured']}\nbound {BOUND_TEMPLATE}",
        title="🎯 derand-sr", border_style="blue",
    ))
    if summary_path is not None:
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    emit_rows(["x", "f(x)", "P(x,R(x))", "mismatch"], rows, summary)
