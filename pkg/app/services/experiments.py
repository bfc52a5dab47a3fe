"""
Experiment Service
Runs a configured experiment over branching-program instances and writes
`<kind>.csv`, `<kind>.json` and a reproducibility `manifest.json` into the
output directory. Outputs carry no timestamps, so a rerun with the same
config and master seed reproduces them byte for byte.
"""

import csv
import hashlib
import json
import logging
import math
import platform
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Tuple

import networkx as nx
import numpy as np
import pydantic
import sympy
from pydantic import ValidationError

from app.config import settings
from app.errors import DerandError, ResourceError
from app.models.experiment_config import ExperimentConfig, ExperimentKind
from app.models.prg_params import NisanParams, NZParams
from app.models.program import AccessDiscipline, RandomizedBranchingProgram, RandomProgramSpec
from app.models.simulation import SimulationConfig, SimulationMode
from app.services.branching_program import (
    failure_probability,
    length,
    majority_truth_table,
    random_program,
    size,
)
from app.services.extractors import (
    HashExtractor,
    random_flat_sources,
    random_function,
    sampler_badset_count,
    verify_extractor,
)
from app.services.gip_derand import BOUND_TEMPLATE, amplify_sow_to_sr, mistake_table
from app.services.prg import nisan_fooling_tvd, nz_fooling_tvd
from app.services.simulator import exact_law, prepare, sample_law, space_bound
from app.utils.bits import Bits, all_bitstrings, format_bits, parse_bits
from app.utils.bp_format import parse_bp, serialize_bp
from app.utils.config_format import dump_config, load_truth_table
from app.utils.distribution import tvd
from app.utils.finite_field import (
    G5,
    GENERATOR,
    F16Field,
    FqElement,
    FqField,
    PolyOverFq,
    check_irreducible,
    e_modulus,
    f16_order,
    frobenius_power,
    naive_frobenius_power,
    poly_pow_mod_e,
    tower_modulus,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK = 2

CSV_COLUMNS: Dict[ExperimentKind, List[str]] = {
    ExperimentKind.HYBRID_COMPARE: ["instance", "x", "mode_a", "mode_b", "tvd", "bad_flag"],
    ExperimentKind.MISTAKE_RATE: ["instance", "x", "f", "derandomized", "mismatch"],
    ExperimentKind.EXTRACTOR_VERIFY: ["check", "index", "codomain", "value", "bound", "ok"],
    ExperimentKind.FF_VERIFY: ["check", "a", "b", "cases", "ok"],
    ExperimentKind.PRG_FOOL: ["instance", "x", "generator", "seed_bits", "tvd", "eps", "ok"],
    ExperimentKind.AMPLIFY_CHECK: [
        "instance", "r", "seed_bits", "label_bits", "coins", "size", "expected_size",
        "failure_original", "failure_amplified", "delta", "sr_ok", "ok",
    ],
}

Instance = Tuple[str, RandomizedBranchingProgram]


class ExperimentOutcome(NamedTuple):
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any]
    parameters: Dict[str, Any]
    passed: bool


def probability_text(value: Any) -> str:
    """Exact values print as fractions, floats with 12 significant digits."""
    if isinstance(value, Fraction):
        return str(value)
    return format(float(value), ".12g")


def _seeds(master_seed: int, count: int) -> List[int]:
    if count == 0:
        return []
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(count)]


def load_instances(cfg: ExperimentConfig) -> List[Instance]:
    instances = [(path.name, parse_bp(path.read_text(encoding="utf-8"))) for path in cfg.instances]
    if cfg.generate is not None:
        spec = RandomProgramSpec(**cfg.generate.model_dump(exclude={"count"}))
        for k, seed in enumerate(_seeds(cfg.master_seed, cfg.generate.count)):
            instances.append((f"generated-{k}", random_program(spec, seed)))
    return instances


def _inputs(cfg: ExperimentConfig, program: RandomizedBranchingProgram) -> Iterable[Bits]:
    if cfg.x is not None:
        return [parse_bits(cfg.x)]
    if program.n > settings.MAX_EXHAUSTIVE_INPUT_BITS:
        raise ResourceError(
            f"Looping over 2^{program.n} inputs exceeds 2^{settings.MAX_EXHAUSTIVE_INPUT_BITS}; pin x instead"
        )
    return all_bitstrings(program.n)


def _truth(cfg: ExperimentConfig, program: RandomizedBranchingProgram) -> Dict[Bits, int]:
    return load_truth_table(cfg.truth) if cfg.truth is not None else majority_truth_table(program)


# ---------------------------------------------------------------------------
# Experiment kinds
# ---------------------------------------------------------------------------

def simulation_config(cfg: ExperimentConfig, program: RandomizedBranchingProgram) -> SimulationConfig:
    values = {"T": max(length(program), 1), "trials": cfg.trials, "master_seed": cfg.master_seed or 0}
    values.update(cfg.overrides)
    return SimulationConfig(**values)


def run_hybrid_compare(cfg: ExperimentConfig, instances: List[Instance]) -> ExperimentOutcome:
    first, second = cfg.modes
    rows, parameters = [], {}
    worst: Any = 0
    for name, program in instances:
        sim_cfg = simulation_config(cfg, program)
        parameters[name] = {
            mode.value: prepare(program, sim_cfg, mode.is_sequential).params.model_dump(mode="json")
            for mode in (first, second) if mode != SimulationMode.P
        }
        v0 = program.start_vertex
        for x in _inputs(cfg, program):
            if cfg.method == "exact":
                laws = [exact_law(program, v0, x, sim_cfg, mode) for mode in (first, second)]
            else:
                laws = [sample_law(program, v0, x, sim_cfg, mode) for mode in (first, second)]
            distance = tvd(*laws)
            worst = max(worst, distance)
            rows.append({
                "instance": name, "x": format_bits(x), "mode_a": first.value, "mode_b": second.value,
                "tvd": probability_text(distance), "bad_flag": int(distance > cfg.bad_threshold),
            })
    bad = sum(row["bad_flag"] for row in rows)
    summary = {"rows": len(rows), "bad": bad, "max_tvd": probability_text(worst), "method": cfg.method}
    return ExperimentOutcome(rows, summary, parameters, bad == 0)


def run_mistake_rate(cfg: ExperimentConfig, instances: List[Instance]) -> ExperimentOutcome:
    rows, per_instance, parameters = [], {}, {}
    passed = True
    for name, program in instances:
        truth = _truth(cfg, program)
        table = mistake_table(program, truth)
        density = Fraction(sum(row.mismatch for row in table), len(table))
        rows.extend(
            {"instance": name, "x": format_bits(row.x), "f": row.expected,
             "derandomized": row.derandomized, "mismatch": int(row.mismatch)}
            for row in table
        )
        per_instance[name] = {
            "mistake_density": probability_text(density),
            "delta_measured": probability_text(failure_probability(program, truth)),
            "bound_template": BOUND_TEMPLATE,
        }
        parameters[name] = {"n": program.n, "m": program.m, "size": size(program)}
        if cfg.max_density is not None and density > Fraction(cfg.max_density):
            passed = False
    return ExperimentOutcome(rows, {"instances": per_instance}, parameters, passed)


def run_extractor_verify(cfg: ExperimentConfig, instances: List[Instance]) -> ExperimentOutcome:
    extractor = HashExtractor(cfg.ell, cfg.d, cfg.s, cfg.k, cfg.eps)
    source_seed, *function_seeds = _seeds(cfg.master_seed, 1 + cfg.functions * len(cfg.codomains))
    sources = random_flat_sources(cfg.ell, cfg.k, cfg.sources, source_seed)
    verification = verify_extractor(extractor, sources)
    rows = [{
        "check": "flat-sources", "index": "", "codomain": "", "value": probability_text(verification.max_tvd),
        "bound": probability_text(Fraction(cfg.eps)), "ok": int(verification.verified),
    }]
    badset_max = 0
    seeds = iter(function_seeds)
    for codomain in cfg.codomains:
        bound = 2 ** (cfg.k + 1) * codomain
        for index in range(cfg.functions):
            bad = sampler_badset_count(extractor, random_function(cfg.s, codomain, next(seeds)), cfg.eps)
            badset_max = max(badset_max, bad)
            rows.append({
                "check": "sampler-badset", "index": index, "codomain": codomain,
                "value": bad, "bound": bound, "ok": int(bad <= bound),
            })
    passed = all(row["ok"] for row in rows)
    summary = {"verified": verification.verified, "badset_count": badset_max,
               "bound": f"2^(k+1)*|V| with k={cfg.k}", "functions": cfg.functions * len(cfg.codomains)}
    return ExperimentOutcome(rows, summary, {"extractor": extractor.spec.model_dump(mode="json")}, passed)


def _random_poly(rng: np.random.Generator, a: int, b: int) -> PolyOverFq:
    bits = rng.integers(0, 2, size=3 ** b * 4 * 5 ** a).tolist()
    return PolyOverFq.from_bits(bits, a, b)


def field_checks(towers: List[int], degrees: List[int], frobenius_cases: int, seed: int) -> List[Dict[str, Any]]:
    """Generator order, tower and E irreducibility, x-power identities and Frobenius agreement."""
    rng = np.random.default_rng(seed)
    rows: List[Dict[str, Any]] = [
        {"check": "generator-order-15", "a": "", "b": "", "cases": 1, "ok": int(f16_order(GENERATOR) == 15)}
    ]
    for a in towers:
        rows.append({"check": "tower-irreducible", "a": a, "b": "", "cases": 1,
                     "ok": int(check_irreducible(tower_modulus(a), F16Field()))})
    for a in towers:
        field = FqField(a)
        for b in degrees:
            rows.append({"check": "e-irreducible", "a": a, "b": b, "cases": 1,
                         "ok": int(check_irreducible(e_modulus(b, field), field))})
            n = 3 ** b
            x = PolyOverFq.monomial(1, a, b)
            identities = (
                poly_pow_mod_e(x, n) == PolyOverFq.monomial(0, a, b, FqElement.scalar(G5, a))
                and poly_pow_mod_e(x, 3 * n) == PolyOverFq.monomial(0, a, b)
            )
            rows.append({"check": "x-power-identities", "a": a, "b": b, "cases": 2, "ok": int(identities)})
            agree = all(
                frobenius_power(f, t) == naive_frobenius_power(f, t)
                for f, t in ((_random_poly(rng, a, b), int(rng.integers(1, 9))) for _ in range(frobenius_cases))
            )
            rows.append({"check": "frobenius-vs-squaring", "a": a, "b": b,
                         "cases": frobenius_cases, "ok": int(agree)})
    return rows


def run_ff_verify(cfg: ExperimentConfig, instances: List[Instance]) -> ExperimentOutcome:
    rows = field_checks(cfg.towers, cfg.degrees, cfg.frobenius_cases, cfg.master_seed)
    passed = all(row["ok"] for row in rows)
    summary = {"checks": len(rows), "failed": sum(1 for row in rows if not row["ok"])}
    return ExperimentOutcome(rows, summary, {"towers": cfg.towers, "degrees": cfg.degrees}, passed)


def run_prg_fool(cfg: ExperimentConfig, instances: List[Instance]) -> ExperimentOutcome:
    rows, parameters = [], {}
    for name, program in instances:
        space = cfg.space or space_bound(program)
        target = cfg.length or program.m
        if cfg.prg == "nisan":
            params: Any = NisanParams.derive(space=space, length=target, eps=cfg.eps)
            fooling: Callable = nisan_fooling_tvd
        else:
            params = NZParams.derive(space=space, target_len=target, eps=cfg.eps)
            fooling = nz_fooling_tvd
        parameters[name] = params.model_dump(mode="json")
        for x in _inputs(cfg, program):
            distance = fooling(program, program.start_vertex, x, params)
            rows.append({
                "instance": name, "x": format_bits(x), "generator": cfg.prg, "seed_bits": params.seed_len,
                "tvd": probability_text(distance), "eps": probability_text(Fraction(cfg.eps)),
                "ok": int(distance <= Fraction(cfg.eps)),
            })
    failed = sum(1 for row in rows if not row["ok"])
    return ExperimentOutcome(rows, {"rows": len(rows), "failed": failed}, parameters, failed == 0)


def run_amplify_check(cfg: ExperimentConfig, instances: List[Instance]) -> ExperimentOutcome:
    rows, parameters = [], {}
    for name, program in instances:
        truth = _truth(cfg, program)
        amplified = amplify_sow_to_sr(program, cfg.delta, cfg.r)
        before = failure_probability(program, truth)
        after = failure_probability(amplified.program, truth)
        sr_ok = amplified.program.satisfies(AccessDiscipline.S_R)
        built = size(amplified.program)
        rows.append({
            "instance": name, "r": amplified.r, "seed_bits": amplified.seed_bits,
            "label_bits": amplified.label_bits, "coins": amplified.coins, "size": built,
            "expected_size": amplified.expected_size, "failure_original": probability_text(before),
            "failure_amplified": probability_text(after), "delta": probability_text(Fraction(cfg.delta)),
            "queries": amplified.queries, "queries_bound": amplified.queries_bound, "sr_ok": int(sr_ok),
            "ok": int(
                sr_ok and built == amplified.expected_size and after <= Fraction(cfg.delta)
                and amplified.queries <= amplified.queries_bound
                and math.log2(built) <= amplified.size_bound_log2
            ),
        })
        parameters[name] = {"r": amplified.r, "nisan": amplified.nisan.model_dump(mode="json"),
                            "label_bits": amplified.label_bits}
    failed = sum(1 for row in rows if not row["ok"])
    return ExperimentOutcome(rows, {"rows": len(rows), "failed": failed}, parameters, failed == 0)


RUNNERS: Dict[ExperimentKind, Callable[[ExperimentConfig, List[Instance]], ExperimentOutcome]] = {
    ExperimentKind.HYBRID_COMPARE: run_hybrid_compare,
    ExperimentKind.MISTAKE_RATE: run_mistake_rate,
    ExperimentKind.EXTRACTOR_VERIFY: run_extractor_verify,
    ExperimentKind.FF_VERIFY: run_ff_verify,
    ExperimentKind.PRG_FOOL: run_prg_fool,
    ExperimentKind.AMPLIFY_CHECK: run_amplify_check,
}


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------

def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical config text, output directory excluded."""
    canonical = dump_config(cfg.model_copy(update={"output_dir": Path(".")}))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def versions() -> Dict[str, str]:
    return {
        "app": settings.APP_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pydantic": pydantic.VERSION,
        "sympy": sympy.__version__,
        "networkx": nx.__version__,
    }


def write_artifacts(cfg: ExperimentConfig, outcome: ExperimentOutcome, instances: List[Instance]) -> List[Path]:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    kind = cfg.kind.value
    written = []
    if "csv" in cfg.formats:
        path = cfg.output_dir / f"{kind}.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS[cfg.kind], lineterminator="\n")
            writer.writeheader()
            writer.writerows(outcome.rows)
        written.append(path)
    if "json" in cfg.formats:
        path = cfg.output_dir / f"{kind}.json"
        report = {"schema_version": settings.SCHEMA_VERSION, "kind": kind,
                  "passed": outcome.passed, "summary": outcome.summary, "rows": outcome.rows}
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)

    manifest = {
        "schema_version": settings.SCHEMA_VERSION,
        "kind": kind,
        "config_hash": config_hash(cfg),
        "master_seed": cfg.master_seed,
        "versions": versions(),
        "instances": [
            {"name": name, "sha256": hashlib.sha256(serialize_bp(program).encode("utf-8")).hexdigest()}
            for name, program in instances
        ],
        "parameters": outcome.parameters,
        "artifacts": [path.name for path in written],
    }
    path = cfg.output_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    for path in written:
        logger.info(f"Wrote {path}")
    return written


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run one experiment and write its artifacts; returns 0, 1 (usage error) or 2 (check failed)."""
    logger.info(f"Running {cfg.kind.value} experiment into {cfg.output_dir}")
    try:
        instances = load_instances(cfg)
        if cfg.kind.needs_instances and not instances:
            logger.error(f"A {cfg.kind.value} experiment needs at least one instance file or a generate section")
            return EXIT_USAGE
        outcome = RUNNERS[cfg.kind](cfg, instances)
    except (DerandError, ValidationError) as exc:
        logger.error(f"{cfg.kind.value} experiment failed: {exc}")
        return EXIT_USAGE
    write_artifacts(cfg, outcome, instances)
    if cfg.check and not outcome.passed:
        logger.warning(f"{cfg.kind.value} experiment: a checked property failed")
        return EXIT_CHECK
    return EXIT_OK
