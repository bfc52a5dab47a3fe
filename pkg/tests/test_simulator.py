import math
from fractions import Fraction

import pytest

from app.errors import DivergenceError, InputError, LengthBoundError, NonAbsorptionError, ParameterError, StreamExhaustedError
from app.models.program import AccessDiscipline, HaltReason, RandomizedBranchingProgram, RandomProgramSpec, Vertex
from app.models.simulation import SimulationConfig, SimulationMode
from app.services.branching_program import random_program
from app.services.extractors import IdentitySeedExtractor
from app.services.simulator import (
    derive_parameters,
    derive_sow_parameters,
    draw_block,
    exact_law,
    hybrid_h1,
    hybrid_h2,
    hybrid_h3,
    hybrid_sow_h1,
    hybrid_sow_h2,
    phase_matrix,
    phase_state,
    prepare,
    sample_law,
    simulate,
    simulate_A,
    simulate_sow,
    space_bound,
)
from app.utils.bits import all_bitstrings
from app.utils.bitstream import FiniteBitStream, SeededBitStream
from app.utils.distribution import VertexDistribution, exact_distribution, tvd
from tests.conftest import layered

ONES = (1,) * 64


def wide_law(program):
    return VertexDistribution(program.ids, {4: Fraction(5, 16), 5: Fraction(11, 16)})


def shared_coin_program():
    """y_1 = 0 moves to vertex 1, which reads x_9 and the same coin; y_1 = 1 accepts."""
    return RandomizedBranchingProgram(
        n=16, m=1, start=0, accept=3, output_bits={2: 0, 3: 1},
        vertices=(
            Vertex.nonterminal(0, 1, 1, (1, 3, 1, 3)),
            Vertex.nonterminal(1, 9, 1, (2, 3, 2, 3)),
            Vertex.terminal(2),
            Vertex.terminal(3),
        ),
    )


def relay_program():
    """Scans x_1..x_16 reading y_1 at every step; y_1 = 1 accepts at once, y_1 = 0 ends at vertex 16."""
    chain = tuple(Vertex.nonterminal(v, v + 1, 1, (v + 1, 17, v + 1, 17)) for v in range(16))
    return RandomizedBranchingProgram(
        n=32, m=1, start=0, accept=17, output_bits={16: 0, 17: 1},
        vertices=chain + (Vertex.terminal(16), Vertex.terminal(17)),
    )


SHARED_CONFIG = SimulationConfig(T=2, r_override=6, block_size_override=8, threshold_override=16)


def test_space_bound(coin_program, wide_program, scan_program):
    assert space_bound(coin_program) == 2
    assert space_bound(wide_program) == 6
    assert space_bound(scan_program) == 5


def test_small_programs_fall_back_to_direct_simulation(coin_program):
    params = derive_parameters(coin_program, SimulationConfig(T=1))
    assert params.direct
    assert params.nisan is None
    result = simulate_A(coin_program, 0, (0,), SimulationConfig(T=1), FiniteBitStream((1,)))
    assert result.vertex == 2
    assert result.bits_consumed == 1


def test_resolved_parameters(wide_program, wide_config):
    params = derive_parameters(wide_program, wide_config)
    assert (params.S, params.B, params.r, params.direct) == (6, 8, 6, False)
    assert params.blocks[1] == tuple(range(9, 17))
    assert (params.nisan.block_bits, params.nisan.levels, params.seed_bits) == (4, 0, 4)
    assert (params.extractor.ell, params.extractor.d, params.extractor.s) == (8, 8, 4)
    assert (params.extractor.k, params.extractor.eps) == (8, 0.25)
    assert params.block_draw_bits == 3
    assert params.eps == pytest.approx(math.exp(-6) / 24)
    assert params.eps_prime == pytest.approx(math.exp(-6) / (12 * 64))
    assert params.k == pytest.approx((6 * math.log2(math.e) + math.log2(24)) ** 6)


def test_prepare_checks_discipline_and_seed_length(reversed_program, wide_program, wide_config):
    with pytest.raises(InputError):
        prepare(reversed_program, SimulationConfig(T=2))
    with pytest.raises(ParameterError, match="attach an extractor"):
        prepare(wide_program, wide_config.model_copy(update={"block_size_override": 4}))


def test_attached_extractor_must_fit(wide_program, wide_config):
    with pytest.raises(ParameterError):
        prepare(wide_program, wide_config, extractor=IdentitySeedExtractor(8, 5))


def test_draw_block_rejects_out_of_range_values():
    stream = FiniteBitStream((1, 1, 0, 1))
    assert draw_block(stream, 3) == 3
    assert stream.consumed == 4
    assert draw_block(FiniteBitStream(()), 1) == 1


def test_algorithm_a_reads_a_fixed_number_of_bits(wide_program, wide_config):
    result = simulate_A(wide_program, 0, ONES, wide_config, SeededBitStream.from_seed(3))
    assert result.bits_consumed == 6 * (3 + 8)
    assert len(result.trace.phases) == 6
    with pytest.raises(StreamExhaustedError):
        simulate_A(wide_program, 0, ONES, wide_config, FiniteBitStream((0,) * 65))


def test_exact_law_of_algorithm_a(wide_program, wide_config):
    law = exact_law(wide_program, 0, ONES, wide_config, SimulationMode.A)
    stuck = Fraction(1, 8 ** 6)
    assert law[0] == stuck
    assert law[4] == Fraction(5, 16) * (1 - stuck)
    assert law[5] == Fraction(11, 16) * (1 - stuck)
    assert tvd(law, wide_law(wide_program)) == Fraction(1, 262144)


@pytest.mark.parametrize("mode", [SimulationMode.H1, SimulationMode.H2])
def test_hybrids_share_the_law_of_a(wide_program, wide_config, mode):
    a = exact_law(wide_program, 0, ONES, wide_config, SimulationMode.A)
    assert exact_law(wide_program, 0, ONES, wide_config, mode) == a


def test_attached_extractor(wide_program, wide_config):
    a = exact_law(wide_program, 0, ONES, wide_config, SimulationMode.A)
    law = exact_law(wide_program, 0, ONES, wide_config, SimulationMode.A, extractor=IdentitySeedExtractor(8, 4))
    assert law == a


def test_h3_is_the_law_of_p(wide_program, wide_config):
    assert exact_law(wide_program, 0, ONES, wide_config, SimulationMode.H3) == wide_law(wide_program)
    assert exact_law(wide_program, 0, ONES, wide_config, SimulationMode.P) == wide_law(wide_program)


def test_phase_matrices_are_stochastic(wide_program, wide_config):
    setup = prepare(wide_program, wide_config)
    for mode in (SimulationMode.A, SimulationMode.H2):
        matrix = phase_matrix(wide_program, ONES, setup, mode)
        assert matrix.is_stochastic()
        assert matrix.entry(phase_state(0), phase_state(0)) == Fraction(1, 8)


def test_sampled_law_of_a(wide_program, wide_config):
    law = sample_law(wide_program, 0, ONES, wide_config, SimulationMode.A, trials=2000, master_seed=11)
    assert tvd(law, wide_law(wide_program)) < Fraction(1, 10)
    again = sample_law(wide_program, 0, ONES, wide_config, SimulationMode.A, trials=2000, master_seed=11)
    assert law == again


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("x", [(0,) * 12, (1,) * 12, (1, 0) * 6])
def test_h3_matches_p_on_random_programs(seed, x):
    program = random_program(
        RandomProgramSpec(n=12, m=3, width=2, depth=5, discipline=AccessDiscipline.R_OW), seed
    )
    cfg = SimulationConfig(T=5, block_size_override=6, threshold_override=12)
    params = prepare(program, cfg).params
    assert (params.S, params.B, params.seed_bits) == (4, 2, 5)
    assert exact_law(program, 0, x, cfg, SimulationMode.H3) == exact_distribution(program, 0, x)


def test_a_coin_read_twice_survives_the_phase_boundary():
    program = shared_coin_program()
    x = (0,) * 16
    half = VertexDistribution(program.ids, {2: Fraction(1, 2), 3: Fraction(1, 2)})
    assert exact_distribution(program, 0, x) == half
    assert exact_law(program, 0, x, SHARED_CONFIG, SimulationMode.H3) == half


def test_h2_matrix_carries_the_known_coin():
    program = shared_coin_program()
    matrix = phase_matrix(program, (0,) * 16, prepare(program, SHARED_CONFIG), SimulationMode.H2)
    assert matrix.is_stochastic()
    assert matrix.entry(phase_state(0), phase_state(0)) == Fraction(1, 2)
    assert matrix.entry(phase_state(0), phase_state(1, 0)) == Fraction(1, 4)
    assert matrix.entry(phase_state(0), phase_state(3)) == Fraction(1, 4)
    assert matrix.entry(phase_state(1, 0), phase_state(2)) == Fraction(1, 2)
    assert matrix.entry(phase_state(1, 0), phase_state(3)) == 0


def test_h3_run_reuses_the_coin_of_the_previous_phase():
    program = shared_coin_program()
    # block 2 and tape 01, then block 1 and tape 11
    stream = FiniteBitStream((1, 0, 1, 0, 1, 1))
    result = hybrid_h3(program, 0, (0,) * 16, SHARED_CONFIG, stream)
    assert result.vertex == 2
    assert [(p.block, p.steps, p.halt) for p in result.trace.phases] == [
        (2, 1, HaltReason.RESTRICTED_READ),
        (1, 1, HaltReason.TRUE_TERMINAL),
    ]
    assert result.bits_consumed == 6


@pytest.mark.parametrize("seed", range(50))
def test_h3_matches_p_when_coins_are_shared(seed):
    n, m = 4 + seed % 3, 1 + (seed // 3) % 3
    depth = m + 2 + seed % 2
    program = layered(seed, n=n, m=m, width=2 + (seed // 9) % 2, depth=depth)
    assert len(program.vertices) <= 32
    cfg = SimulationConfig(T=depth, r_override=1, block_size_override=2, threshold_override=n,
                           nisan_block_override=depth)
    extractor = IdentitySeedExtractor(2, depth)
    for x in all_bitstrings(n):
        law = exact_law(program, 0, x, cfg, SimulationMode.H3, arithmetic="float", extractor=extractor)
        assert tvd(law, exact_distribution(program, 0, x, "float")) < 1e-9


def test_h3_reports_non_absorption(stuck_program):
    cfg = SimulationConfig(T=1, block_size_override=8, threshold_override=8, r_override=1)
    with pytest.raises(NonAbsorptionError):
        hybrid_h3(stuck_program, 0, (0,) * 8, cfg, SeededBitStream.from_seed(0))
    with pytest.raises(DivergenceError):
        exact_law(stuck_program, 0, (0,) * 8, cfg, SimulationMode.H3)
    result = simulate(stuck_program, 0, (0,) * 8, cfg, SimulationMode.A, SeededBitStream.from_seed(0))
    assert result.vertex == 0
    assert result.trace.phases[0].halt == HaltReason.RESTRICTED_READ


def test_length_bound_is_enforced():
    program = RandomizedBranchingProgram(
        n=1, m=2, start=0,
        vertices=(Vertex.nonterminal(0, 1, 1, (1,) * 4), Vertex.nonterminal(1, 1, 2, (2,) * 4), Vertex.terminal(2)),
    )
    with pytest.raises(LengthBoundError):
        simulate(program, 0, (0,), SimulationConfig(T=1), SimulationMode.P, FiniteBitStream((0,)))


def test_sequential_parameters(scan_program, scan_config):
    params = derive_sow_parameters(scan_program, scan_config)
    assert (params.S, params.block_size, params.B, params.r) == (5, 4, 8, 4)
    assert params.sources[0] == tuple(range(9, 29))
    assert params.sources[2] == (1, 2, 3, 4) + tuple(range(17, 33))
    assert params.blocks[-1] == (29, 30, 31, 32)
    assert all(len(source) == 20 for source in params.sources)
    assert params.seed_bits == 9
    assert (params.extractor.ell, params.extractor.s) == (20, 9)


def test_sequential_run_follows_the_head(scan_program, scan_config):
    x = (0,) * 32
    result = simulate_sow(scan_program, 0, x, scan_config, SeededBitStream.from_seed(5))
    assert result.vertex in (16, 17)
    assert [(p.block, p.steps, p.halt) for p in result.trace.phases] == [
        (1, 8, HaltReason.RESTRICTED_READ),
        (3, 8, HaltReason.TRUE_TERMINAL),
    ]
    assert result.bits_consumed == 40
    assert hybrid_sow_h1(scan_program, 0, x, scan_config, SeededBitStream.from_seed(5)).bits_consumed == 18


def test_sequential_hybrid_law(scan_program, scan_config):
    law = exact_law(scan_program, 0, (0,) * 32, scan_config, SimulationMode.SOW_H2)
    assert law == VertexDistribution(scan_program.ids, {16: Fraction(1, 2), 17: Fraction(1, 2)})


def test_sequential_error_terms(scan_program, scan_config):
    params = derive_sow_parameters(scan_program, scan_config)
    assert params.eps == pytest.approx(math.exp(-5) / 8)
    assert params.eps_log2 == pytest.approx(-5 * math.log2(math.e) - 3)
    assert params.eps_prime == pytest.approx(math.exp(-5) / (4 * 32))
    assert params.k == pytest.approx(math.sqrt(32))
    assert (params.extractor.ell, params.extractor.k, params.extractor.eps) == (20, 11, 0.5)


def test_sequential_blocks_when_h_does_not_divide_n():
    program = RandomizedBranchingProgram(
        n=30, m=1, start=0, accept=2, output_bits={1: 0, 2: 1},
        vertices=(Vertex.nonterminal(0, 1, 1, (1, 2, 1, 2)), Vertex.terminal(1), Vertex.terminal(2)),
    )
    cfg = SimulationConfig(T=16, h_override=4, threshold_override=100, nisan_block_override=1)
    params = derive_sow_parameters(program, cfg)
    assert (params.B, params.r) == (8, 4)
    assert params.blocks[6] == (25, 26, 27, 28)
    assert params.blocks[-1] == (29, 30)
    assert params.sources[0] == tuple(range(9, 27))
    assert params.sources[6] == params.sources[7] == tuple(range(1, 19))
    assert all(len(source) == 18 for source in params.sources)
    assert params.extractor.ell == 18


@pytest.mark.parametrize("x", [(0,) * 32, (1,) * 32])
def test_sequential_hybrid_keeps_a_coin_read_across_phases(scan_config, x):
    program = relay_program()
    half = VertexDistribution(program.ids, {16: Fraction(1, 2), 17: Fraction(1, 2)})
    assert exact_distribution(program, 0, x) == half
    assert exact_law(program, 0, x, scan_config, SimulationMode.SOW_H2) == half


def test_sequential_run_reuses_the_coin_of_the_previous_phase(scan_config):
    stream = FiniteBitStream((0,) + (1,) * 31)
    result = hybrid_sow_h2(relay_program(), 0, (0,) * 32, scan_config, stream)
    assert result.vertex == 16
    assert [(p.block, p.steps, p.halt) for p in result.trace.phases] == [
        (1, 8, HaltReason.RESTRICTED_READ),
        (3, 8, HaltReason.TRUE_TERMINAL),
    ]
    assert result.bits_consumed == 32


@pytest.mark.parametrize("seed", range(10))
def test_sequential_h2_matches_p_on_random_programs(seed):
    depth = 4 + seed % 3
    program = layered(seed, n=6, m=2, width=2, depth=depth, discipline=AccessDiscipline.S_OW)
    cfg = SimulationConfig(T=depth, h_override=1, threshold_override=100, nisan_block_override=depth)
    extractor = IdentitySeedExtractor(3, depth)
    for x in all_bitstrings(6):
        law = exact_law(program, 0, x, cfg, SimulationMode.SOW_H2, arithmetic="float", extractor=extractor)
        assert tvd(law, exact_distribution(program, 0, x, "float")) < 1e-9


def test_sequential_default_is_direct(scan_program):
    result = simulate_sow(scan_program, 0, (0,) * 32, SimulationConfig(T=16), FiniteBitStream((0,) * 16))
    assert result.vertex == 16
    assert result.bits_consumed == 16


def test_sequential_requires_the_discipline(reversed_program):
    with pytest.raises(InputError):
        simulate_sow(reversed_program, 0, (0,), SimulationConfig(T=2), FiniteBitStream((0, 0)))


def test_terminal_start(coin_program):
    result = simulate(coin_program, 1, (0,), SimulationConfig(T=1), SimulationMode.A, FiniteBitStream(()))
    assert result.vertex == 1
    assert result.bits_consumed == 0


@pytest.mark.parametrize(
    "run, mode",
    [(simulate_A, SimulationMode.A), (hybrid_h1, SimulationMode.H1), (hybrid_h2, SimulationMode.H2)],
)
def test_mode_entry_points_match_dispatch(wide_program, wide_config, run, mode):
    direct = run(wide_program, 0, ONES, wide_config, SeededBitStream.from_seed(9))
    assert direct == simulate(wide_program, 0, ONES, wide_config, mode, SeededBitStream.from_seed(9))
    assert direct.mode == mode


def test_sequential_entry_points_match_dispatch(scan_program, scan_config):
    x = (1, 0) * 16
    for run, mode in ((hybrid_sow_h1, SimulationMode.SOW_H1), (hybrid_sow_h2, SimulationMode.SOW_H2)):
        result = run(scan_program, 0, x, scan_config, SeededBitStream.from_seed(2))
        assert result == simulate(scan_program, 0, x, scan_config, mode, SeededBitStream.from_seed(2))
