from fractions import Fraction

import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from app.errors import DivergenceError, InputError, ResourceError
from app.models.program import RandomizedBranchingProgram, Vertex
from app.services.branching_program import evaluate
from app.utils.bits import all_bitstrings
from app.utils.distribution import (
    FLOAT,
    StochasticMatrix,
    VertexDistribution,
    absorbing_distribution,
    exact_distribution,
    matrix_closeness,
    matrix_power,
    one_way_states,
    row_after,
    sampled_distribution,
    transition_matrix,
    tvd,
)
from tests.conftest import layered


def half(*vertices):
    return {v: Fraction(1, len(vertices)) for v in vertices}


def coin_matrix(program, arithmetic="exact"):
    return transition_matrix(
        program, (0,), lambda u, x, y: evaluate(program, u, x, y), list(all_bitstrings(program.m)), arithmetic
    )


def test_coin_law(coin_program):
    law = exact_distribution(coin_program, 0, (0,))
    assert law == VertexDistribution(coin_program.ids, half(1, 2))
    assert law.total() == 1
    assert law.to_json() == {"1": "1/2", "2": "1/2"}


def test_enumerated_law_for_programs_that_reread_backwards(reversed_program):
    law = exact_distribution(reversed_program, 0, (1,))
    assert law.items() == [(2, Fraction(1, 2)), (3, Fraction(1, 4)), (4, Fraction(1, 4))]


def test_one_way_dynamic_program_remembers_the_current_coin():
    # Both branches re-read y_1; the only consistent outcomes end in vertex 3.
    program = RandomizedBranchingProgram(
        n=1, m=1, start=0,
        vertices=(
            Vertex.nonterminal(0, 1, 1, (1, 2, 1, 2)),
            Vertex.nonterminal(1, 1, 1, (3, 4, 3, 4)),
            Vertex.nonterminal(2, 1, 1, (3, 3, 3, 3)),
            Vertex.terminal(3),
            Vertex.terminal(4),
        ),
    )
    assert exact_distribution(program, 0, (0,)).items() == [(3, Fraction(1))]


def test_one_way_states_stop_at_blocked_reads():
    # Vertex 1 reads x_2 and the coin vertex 0 just drew.
    program = RandomizedBranchingProgram(
        n=2, m=1, start=0,
        vertices=(
            Vertex.nonterminal(0, 1, 1, (1, 3, 1, 3)),
            Vertex.nonterminal(1, 2, 1, (2, 3, 2, 3)),
            Vertex.terminal(2),
            Vertex.terminal(3),
        ),
    )
    x = (0, 0)
    assert one_way_states(program, 0, x, "exact", frozenset({2})) == {(1, 0): Fraction(1, 2), (3, None): Fraction(1, 2)}
    assert one_way_states(program, 1, x, "exact", known=0) == {(2, None): Fraction(1)}
    assert one_way_states(program, 1, x, "exact", frozenset({2}), known=1) == {(1, 1): Fraction(1)}
    assert one_way_states(program, 0, x, "exact", known=1) == {(3, None): Fraction(1)}


@pytest.mark.parametrize("seed", range(4))
def test_dynamic_program_matches_enumeration(seed):
    program = layered(seed, n=4, m=4, width=3, depth=5)
    for x in all_bitstrings(program.n):
        counts = {}
        for y in all_bitstrings(program.m):
            terminal = evaluate(program, 0, x, y)
            counts[terminal] = counts.get(terminal, 0) + 1
        expected = VertexDistribution(program.ids, {v: Fraction(c, 16) for v, c in counts.items()})
        assert exact_distribution(program, 0, x) == expected


def test_float_arithmetic(coin_program):
    law = exact_distribution(coin_program, 0, (1,), FLOAT)
    assert law[1] == pytest.approx(0.5)
    assert law[0] == 0.0
    assert isinstance(law[2], float)


def test_enumeration_cap(reversed_program):
    with pytest.raises(ResourceError, match="Monte-Carlo"):
        exact_distribution(reversed_program, 0, (0,), cap=2)


def test_distribution_validation():
    with pytest.raises(InputError):
        VertexDistribution((0, 1), {0: Fraction(-1, 2)})
    with pytest.raises(InputError):
        VertexDistribution((0, 1), {5: Fraction(1)})
    assert VertexDistribution((0, 1), {0: Fraction(0), 1: Fraction(1)}).support == (1,)


def test_tvd(coin_program):
    law = exact_distribution(coin_program, 0, (0,))
    assert tvd(law, law) == 0
    assert tvd(law, VertexDistribution.point_mass(coin_program.ids, 1)) == Fraction(1, 2)
    with pytest.raises(InputError):
        tvd(law, VertexDistribution.point_mass((0, 1), 1))


def test_transition_matrix_and_powers(coin_program):
    matrix = coin_matrix(coin_program)
    assert matrix.is_stochastic()
    assert matrix.entry(0, 2) == Fraction(1, 2)
    assert matrix.entry(1, 1) == 1
    assert matrix_power(matrix, 3).row(0) == row_after(matrix, 0, 3)
    assert row_after(matrix, 0, 0) == VertexDistribution.point_mass(matrix.index, 0)
    with pytest.raises(InputError):
        matrix_power(matrix, -1)


def test_transition_matrix_cap(coin_program):
    with pytest.raises(ResourceError):
        transition_matrix(coin_program, (0,), lambda u, x, y: u, list(all_bitstrings(1)), cap=4)


def test_float_matrices_agree_with_exact(coin_program):
    exact = coin_matrix(coin_program)
    approx = coin_matrix(coin_program, FLOAT)
    assert approx.is_stochastic()
    assert row_after(approx, 0, 2)[2] == pytest.approx(float(row_after(exact, 0, 2)[2]))


def test_absorption():
    matrix = StochasticMatrix(
        (0, 1, 2),
        [[Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)], [0, 1, 0], [0, 0, 1]],
    )
    law = absorbing_distribution(matrix, 0, {1, 2})
    assert law == VertexDistribution((0, 1, 2), half(1, 2))
    assert absorbing_distribution(matrix, 1, {1, 2}) == VertexDistribution.point_mass((0, 1, 2), 1)

    approx = StochasticMatrix((0, 1, 2), [[0.5, 0.25, 0.25], [0, 1, 0], [0, 0, 1]], FLOAT)
    assert absorbing_distribution(approx, 0, {1, 2})[1] == pytest.approx(0.5)


def test_absorption_diverges_when_a_state_is_trapped():
    matrix = StochasticMatrix((0, 1, 2), [[Fraction(1, 2), Fraction(1, 2), 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(DivergenceError):
        absorbing_distribution(matrix, 0, {2})


def test_sampled_distribution_is_seeded(coin_program):
    def sampler(stream):
        return 1 + stream.read_bit()

    first = sampled_distribution(sampler, 2000, 7, coin_program.ids)
    assert first == sampled_distribution(sampler, 2000, 7, coin_program.ids)
    assert tvd(first, exact_distribution(coin_program, 0, (0,))) < Fraction(1, 10)
    with pytest.raises(InputError):
        sampled_distribution(sampler, 0, 7, coin_program.ids)


weights = st.lists(st.integers(0, 5), min_size=3, max_size=3).filter(lambda row: sum(row) > 0)
stochastic = st.lists(weights, min_size=3, max_size=3).map(
    lambda rows: StochasticMatrix((0, 1, 2), [[Fraction(w, sum(row)) for w in row] for row in rows])
)


@hypothesis_settings(max_examples=60, deadline=None)
@given(stochastic, stochastic, stochastic, stochastic)
def test_closeness_of_products_is_subadditive(a, a2, b, b2):
    assert a.is_stochastic()
    assert matrix_closeness(a, a) == 0
    assert matrix_closeness(a, a2) == matrix_closeness(a2, a)
    assert matrix_closeness(a @ b, a2 @ b2) <= matrix_closeness(a, a2) + matrix_closeness(b, b2)


@hypothesis_settings(max_examples=30, deadline=None)
@given(stochastic, st.integers(0, 4))
def test_row_after_matches_matrix_power(matrix, r):
    for v in matrix.index:
        assert row_after(matrix, v, r) == matrix_power(matrix, r).row(v)
