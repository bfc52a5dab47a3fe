"""
Primitive commands: extractor-test, prg and ff-test
"""

import math
from enum import Enum
from typing import Optional

import typer
from rich.table import Table

from app.commands.common import (
    OutputFormat,
    console,
    emit_json,
    emit_rows,
    parameter_table,
    parse_int_list,
    parse_seed,
    reporting_errors,
    state,
)
from app.config import settings
from app.models.experiment_config import ExperimentKind
from app.models.prg_params import NisanParams, NZParams
from app.services.experiments import CSV_COLUMNS, field_checks, probability_text
from app.services.extractors import (
    REGIME_TOLERANCE,
    BaseExtractor,
    GuvExtractor,
    HashExtractor,
    WalkExtractor,
    random_flat_sources,
    random_function,
    sampler_badset_count,
    verify_extractor,
)
from app.services.prg import nisan_generate, nz_generate
from app.utils.bits import bits_to_hex, hex_to_bits


class ExtractorChoice(str, Enum):
    HASH = "hash"
    WALK = "walk"
    GUV = "guv"


class GeneratorChoice(str, Enum):
    NISAN = "nisan"
    NZ = "nz"


def build_test_extractor(kind: ExtractorChoice, ell: int, k: int, eps: float, seed_len: int,
                         out: Optional[int]) -> BaseExtractor:
    if kind == ExtractorChoice.HASH:
        s = out or max(1, math.floor(k - 2 * math.log2(1 / eps) + REGIME_TOLERANCE))
        return HashExtractor(ell, seed_len, s, k, eps)
    if kind == ExtractorChoice.WALK:
        walk_length = settings.GUV_WALK_LENGTH
        s = out or max(1, k // 2)
        return WalkExtractor(ell, math.ceil(s / (walk_length + 1)), walk_length, s, k, eps)
    return GuvExtractor(ell, k, eps)


def extractor_test_command(
    kind: ExtractorChoice = typer.Option(ExtractorChoice.HASH, "--kind", help="hash, walk or guv"),
    ell: int = typer.Option(10, "--ell", help="Source length"),
    k: int = typer.Option(6, "--k", help="Min-entropy of the test sources"),
    eps: float = typer.Option(0.25, "--eps", help="Claimed extraction error"),
    seed_len: int = typer.Option(4, "--seed-len", help="Seed length of the hash extractor"),
    out: Optional[int] = typer.Option(None, "--out", help="Output length (default from k and eps)"),
    exhaustive: bool = typer.Option(False, "--exhaustive", help="Count the sampler bad set over all 2^ell sources"),
    sources: int = typer.Option(8, "--sources", help="Random flat sources to verify on"),
    functions: int = typer.Option(10, "--functions", help="Random test functions for the bad-set count"),
    codomain: int = typer.Option(2, "--codomain", help="Codomain size of the test functions"),
    master_seed: Optional[str] = typer.Option(None, "--master-seed", help="Hex master seed"),
):
    """
    🧪 Verify an extractor on random flat sources and count its sampler bad set
    """
    with reporting_errors():
        extractor = build_test_extractor(kind, ell, k, eps, seed_len, out)
        spec = extractor.spec
        seed = parse_seed(master_seed)
        verified = max_tvd = None
        if sources * 2 ** k * 2 ** spec.d <= settings.ENUMERATION_CAP:
            verdict = verify_extractor(extractor, random_flat_sources(ell, k, sources, seed))
            verified, max_tvd = verdict.verified, probability_text(verdict.max_tvd)
        else:
            console.print(f"[yellow]⚠️  Seed of {spec.d} bits is too long to verify by enumeration[/yellow]")
        bound = 2 ** (k + 1) * codomain
        badset = None
        if exhaustive:
            badset = max(
                (sampler_badset_count(extractor, random_function(spec.s, codomain, seed + 1 + index), eps)
                 for index in range(functions)),
                default=0,
            )
    console.print(parameter_table(f"🧪 {spec.kind.value} extractor", spec.model_dump(mode="json")))
    emit_json({
        "params": spec.model_dump(mode="json"),
        "verified": verified,
        "max_tvd": max_tvd,
        "badset_count": badset,
        "bound": bound,
    })
    if verified is False or (badset is not None and badset > bound):
        console.print("[bold red]❌ Extractor property check failed[/bold red]")
        raise typer.Exit(2)


def prg_command(
    kind: GeneratorChoice = typer.Option(GeneratorChoice.NISAN, "--kind", help="nisan or nz"),
    seed_hex: str = typer.Option(..., "--seed-hex", help="Seed as hex, zero-extended to the seed length"),
    length: int = typer.Option(..., "--len", help="Output length in bits"),
    space: int = typer.Option(..., "--space", help="Space bound S"),
    eps: float = typer.Option(0.25, "--eps", help="Generator error"),
):
    """
    🌱 Stretch a seed with the Nisan or NZ generator and print the output in hex
    """
    with reporting_errors():
        if kind == GeneratorChoice.NISAN:
            params = NisanParams.derive(space=space, length=length, eps=eps)
            output = nisan_generate(hex_to_bits(seed_hex, params.seed_len), params)
        else:
            params = NZParams.derive(space=space, target_len=length, eps=eps)
            output = nz_generate(hex_to_bits(seed_hex, params.seed_len), params)
    console.print(parameter_table(f"🌱 {kind.value} generator", {**params.model_dump(), "seed_len": params.seed_len}))
    if state.format == OutputFormat.JSON:
        emit_json({"kind": kind.value, "seed_bits": params.seed_len, "output": bits_to_hex(output)})
    else:
        typer.echo(bits_to_hex(output))


def ff_test_command(
    towers: str = typer.Option("0,1", "--towers", help="Tower parameters a, comma-separated"),
    degrees: str = typer.Option("0,1", "--degrees", help="Degree parameters b, comma-separated"),
    cases: int = typer.Option(20, "--cases", help="Random Frobenius cases per (a, b)"),
    master_seed: Optional[str] = typer.Option(None, "--master-seed", help="Hex master seed"),
):
    """
    🔢 Finite-field verification tables: irreducibility, identities, Frobenius powering
    """
    with reporting_errors():
        rows = field_checks(parse_int_list(towers), parse_int_list(degrees), cases, parse_seed(master_seed))
    table = Table(title="🔢 Finite-field checks", show_header=True, header_style="bold magenta")
    for column in ("check", "a", "b", "cases", "ok"):
        table.add_column(column, style="cyan" if column == "check" else "green")
    for row in rows:
        table.add_row(row["check"], str(row["a"]), str(row["b"]), str(row["cases"]), "✅" if row["ok"] else "❌")
    console.print(table)
    failed = sum(1 for row in rows if not row["ok"])
    emit_rows(CSV_COLUMNS[ExperimentKind.FF_VERIFY], rows, {"checks": len(rows), "failed": failed})
    if failed:
        raise typer.Exit(2)
