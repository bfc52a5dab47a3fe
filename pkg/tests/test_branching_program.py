from fractions import Fraction
from itertools import combinations

import pytest

from app.errors import ConfigurationError, InputError, ResourceError
from app.models.program import AccessDiscipline, HaltReason, RandomizedBranchingProgram, RandomProgramSpec, Vertex
from app.services.branching_program import (
    compute_boolean,
    error_probability,
    evaluate,
    failure_probability,
    length,
    majority_truth_table,
    output_bit,
    queries,
    random_program,
    restrict,
    size,
    validate_discipline,
    walk,
)
from app.utils.bits import all_bitstrings
from tests.conftest import layered


def chain(reads):
    """Single path through nonterminals reading the given (i, j) pairs, then one terminal."""
    n = max(i for i, _ in reads)
    m = max(j for _, j in reads)
    vertices = [Vertex.nonterminal(k, i, j, (k + 1,) * 4) for k, (i, j) in enumerate(reads)]
    vertices.append(Vertex.terminal(len(reads)))
    return RandomizedBranchingProgram(n=n, m=m, vertices=tuple(vertices), start=0)


def test_evaluate(coin_program):
    assert evaluate(coin_program, 0, (0,), (1,)) == 2
    assert evaluate(coin_program, 0, (1,), (0,)) == 1
    assert compute_boolean(coin_program, (1,), (1,)) == 1


def test_evaluate_checks_dimensions(coin_program):
    with pytest.raises(InputError):
        evaluate(coin_program, 0, (0, 1), (1,))
    with pytest.raises(InputError):
        evaluate(coin_program, 0, (0,), ())
    with pytest.raises(InputError):
        evaluate(coin_program, 9, (0,), (0,))


def test_walk_halts_on_blocked_reads_and_limits(coin_program):
    blocked = walk(coin_program, 0, (0,), lambda j: 0, blocked=frozenset({1}))
    assert blocked == (0, 0, HaltReason.RESTRICTED_READ)
    limited = walk(coin_program, 0, (0,), lambda j: 0, limit=0)
    assert limited.halt == HaltReason.EXHAUSTED
    assert walk(coin_program, 0, (0,), lambda j: 1).halt == HaltReason.TRUE_TERMINAL


def test_structural_metrics(coin_program):
    assert (size(coin_program), length(coin_program), queries(coin_program)) == (3, 1, 1)
    program = chain([(1, 1), (2, 1), (2, 2)])
    assert length(program) == 3
    assert queries(program) == 2


def test_disciplines(coin_program, reversed_program):
    for discipline in AccessDiscipline:
        assert validate_discipline(coin_program, discipline)
    assert not reversed_program.satisfies(AccessDiscipline.R_OW)
    assert not reversed_program.satisfies(AccessDiscipline.S_OW)
    assert reversed_program.satisfies(AccessDiscipline.S_R)

    jumping = chain([(1, 1), (3, 1)])
    assert jumping.satisfies(AccessDiscipline.R_OW)
    assert not jumping.satisfies(AccessDiscipline.S_OW)
    assert not jumping.satisfies(AccessDiscipline.S_R)
    assert jumping.satisfies(AccessDiscipline.UNRESTRICTED)


@pytest.mark.parametrize("seed", range(6))
def test_restriction_ignores_bits_outside_the_index_set(seed):
    program = layered(seed, n=4, m=3, width=3, depth=4, discipline=AccessDiscipline.UNRESTRICTED)
    positions = range(1, program.n + 1)
    assert restrict(program, positions) == program
    for count in range(program.n + 1):
        for kept in combinations(positions, count):
            restricted = restrict(program, kept)
            for x in all_bitstrings(program.n):
                flipped = tuple(bit if p in kept else 1 - bit for p, bit in zip(positions, x))
                for y in all_bitstrings(program.m):
                    for v in program.ids:
                        assert evaluate(restricted, v, x, y) == evaluate(restricted, v, flipped, y)


def test_restrict_rejects_indices_out_of_range(coin_program):
    with pytest.raises(InputError):
        restrict(coin_program, [2])


def test_unlabeled_terminal(coin_program):
    program = coin_program.model_copy(update={"output_bits": {}})
    with pytest.raises(ConfigurationError):
        output_bit(program, 1)


def test_failure_probability(xor_program):
    def first_bit(x):
        return x[0]

    assert error_probability(xor_program, (1, 0, 0, 0, 0, 0), 1) == Fraction(1, 2)
    assert failure_probability(xor_program, first_bit) == Fraction(1, 2)
    with pytest.raises(ResourceError, match="Monte-Carlo"):
        failure_probability(xor_program, first_bit, cap=16)


def test_failure_probability_needs_a_complete_truth_table(coin_program):
    with pytest.raises(ConfigurationError):
        failure_probability(coin_program, {(0,): 1})


def test_majority_breaks_ties_towards_one(coin_program, amplify_program):
    assert majority_truth_table(coin_program) == {(0,): 1, (1,): 1}
    assert majority_truth_table(amplify_program) == {(0, 0): 0, (0, 1): 0, (1, 0): 1, (1, 1): 1}


@pytest.mark.parametrize("discipline", list(AccessDiscipline))
def test_random_programs_satisfy_their_discipline(discipline):
    program = random_program(RandomProgramSpec(n=6, m=4, width=3, depth=5, discipline=discipline), seed=11)
    assert program.satisfies(discipline)
    assert length(program) == 5
    assert size(program) == 1 + 4 * 3 + 2
    assert random_program(RandomProgramSpec(n=6, m=4, width=3, depth=5, discipline=discipline), seed=11) == program


def test_random_program_edge_cases():
    empty = random_program(RandomProgramSpec(n=2, m=1, width=2, depth=0), seed=0)
    assert empty.terminal_ids == frozenset({0})
    with pytest.raises(ResourceError):
        random_program(RandomProgramSpec(n=2, m=1, width=100, depth=100), seed=0)


def test_terminal_start_has_no_reads():
    program = RandomizedBranchingProgram(n=1, m=1, vertices=(Vertex.terminal(0),), start=0, output_bits={0: 1})
    assert compute_boolean(program, (0,), (0,)) == 1
    assert queries(program) == 0
