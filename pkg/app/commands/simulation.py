"""
Simulation commands: simulate and hybrid-compare
"""

from pathlib import Path
from typing import Optional

import typer

from app.commands.common import (
    console,
    emit_csv,
    emit_json,
    emit_rows,
    parameter_table,
    parse_overrides,
    parse_seed,
    read_program,
    reporting_errors,
    wants_csv,
)
from app.config import settings
from app.errors import ResourceError
from app.models.program import RandomizedBranchingProgram
from app.models.simulation import SimulationConfig, SimulationMode
from app.services.branching_program import length
from app.services.experiments import probability_text
from app.services.simulator import exact_law, prepare, sample_law, simulate
from app.utils.bits import all_bitstrings, format_bits, parse_bits
from app.utils.bitstream import SeededBitStream
from app.utils.distribution import tvd


def _config(program: RandomizedBranchingProgram, overrides: Optional[str], trials: Optional[int],
            master_seed: int) -> SimulationConfig:
    values = {"T": max(length(program), 1), "master_seed": master_seed}
    if trials is not None:
        values["trials"] = trials
    values.update(parse_overrides(overrides))
    return SimulationConfig(**values)


def simulate_command(
    bp: Path = typer.Option(..., "--bp", help="Branching program file"),
    x: str = typer.Option(..., "--x", help="Input bits"),
    mode: SimulationMode = typer.Option(SimulationMode.A, "--mode", "-m", help="A, H1, H2, H3, SOW, SOW-H1, SOW-H2 or P"),
    trials: Optional[int] = typer.Option(None, "--trials", "-n", help="Monte-Carlo trials for the distribution"),
    master_seed: Optional[str] = typer.Option(None, "--master-seed", help="Hex master seed (default: --seed or 0)"),
    override: Optional[str] = typer.Option(None, "--override", "-o", help="Comma-separated overrides, e.g. r=6,block=8"),
    exact: bool = typer.Option(False, "--exact-law", help="Report the exact law instead of a sampled one"),
):
    """
    🎲 Run one simulation mode and report its output law and randomness use
    """
    with reporting_errors():
        program = read_program(bp)
        seed = parse_seed(master_seed)
        cfg = _config(program, override, trials, seed)
        x_bits = parse_bits(x)
        v0 = program.start_vertex
        run = simulate(program, v0, x_bits, cfg, mode, SeededBitStream.from_seed(seed))
        if exact:
            law = exact_law(program, v0, x_bits, cfg, mode)
        else:
            law = sample_law(program, v0, x_bits, cfg, mode)
        report = {
            "mode": mode.value,
            "distribution": law.to_json(),
            "trace_summary": run.trace.summary(),
            "bits_consumed": run.bits_consumed,
            "vertex": run.vertex,
        }
        if mode != SimulationMode.P:
            params = prepare(program, cfg, mode.is_sequential).params
            report["parameters"] = params.model_dump(mode="json")
            console.print(parameter_table(
                f"🎲 {mode.value} on {bp.name}",
                {"r": params.r, "B": params.B, "block": params.block_size, "direct": params.direct,
                 "seed bits": params.seed_bits, "bits consumed": run.bits_consumed},
            ))
    if wants_csv():
        emit_csv(["vertex", "probability"], [{"vertex": v, "probability": p} for v, p in law.to_json().items()])
    else:
        emit_json(report)


def hybrid_compare_command(
    bp: Path = typer.Option(..., "--bp", help="Branching program file"),
    mode_a: SimulationMode = typer.Option(SimulationMode.A, "--mode-a", help="First mode"),
    mode_b: SimulationMode = typer.Option(SimulationMode.H1, "--mode-b", help="Second mode"),
    x: Optional[str] = typer.Option(None, "--x", help="One input; every input when omitted"),
    threshold: float = typer.Option(0.1, "--threshold", "-t", help="TVD above which a row is flagged bad"),
    sampled: bool = typer.Option(False, "--sampled", help="Compare Monte-Carlo laws instead of exact ones"),
    trials: Optional[int] = typer.Option(None, "--trials", "-n", help="Monte-Carlo trials with --sampled"),
    master_seed: Optional[str] = typer.Option(None, "--master-seed", help="Hex master seed"),
    override: Optional[str] = typer.Option(None, "--override", "-o", help="Comma-separated overrides"),
):
    """
    ⚖️ Per-input TVD between two simulation modes
    """
    with reporting_errors():
        program = read_program(bp)
        cfg = _config(program, override, trials, parse_seed(master_seed))
        if x is not None:
            inputs = [parse_bits(x)]
        elif program.n > settings.MAX_EXHAUSTIVE_INPUT_BITS:
            raise ResourceError(
                f"Looping over 2^{program.n} inputs exceeds 2^{settings.MAX_EXHAUSTIVE_INPUT_BITS}; pass --x"
            )
        else:
            inputs = all_bitstrings(program.n)
        law = sample_law if sampled else exact_law
        v0 = program.start_vertex
        rows = []
        for bits in inputs:
            distance = tvd(law(program, v0, bits, cfg, mode_a), law(program, v0, bits, cfg, mode_b))
            rows.append({"x": format_bits(bits), "tvd": probability_text(distance),
                         "bad_flag": int(distance > threshold)})
    bad = sum(row["bad_flag"] for row in rows)
    console.print(f"⚖️  {mode_a.value} vs {mode_b.value}: {len(rows)} inputs, [bold]{bad}[/bold] flagged")
    emit_rows(["x", "tvd", "bad_flag"], rows, {"bad": bad, "rows": len(rows)})
