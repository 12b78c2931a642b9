from fractions import Fraction

import pytest

from fplab import core, generators
from fplab.core import COL, ROW, MixedStrategy, make_game

F = Fraction


@pytest.fixture(scope="module")
def mp():
    return generators.build_matching_pennies()


def test_make_game_singleton():
    g = make_game([[1]], [[1]])
    assert g.shape == (1, 1)
    assert g.row_range == (1, 1) and g.col_range == (1, 1)


def test_make_game_gn_range(g5):
    g = make_game(g5.R, [list(c) for c in zip(*g5.R)])
    assert g == g5
    assert g.row_range == (0, F(3, 2))


@pytest.mark.parametrize("R, C", [
    ([[1, 2, 3], [4, 5, 6]], [[1, 2], [3, 4], [5, 6]]),
    ([], []),
    ([[1, 2], [3]], [[1, 2], [3, 4]]),
])
def test_make_game_rejects_bad_shapes(R, C):
    with pytest.raises(ValueError):
        make_game(R, C)


def test_make_game_rejects_floats():
    with pytest.raises(TypeError):
        make_game([[0.5]], [[1]])


def test_make_game_accepts_strings():
    g = make_game([["1/2", "-3"]], [[0, "4/6"]])
    assert g.R[0] == (F(1, 2), F(-3)) and g.C[0][1] == F(2, 3)


def test_mixed_strategy_validation():
    with pytest.raises(ValueError):
        MixedStrategy((F(1, 2), F(1, 3)))
    with pytest.raises(ValueError):
        MixedStrategy((F(3, 2), F(-1, 2)))
    assert MixedStrategy.from_counts([1, 3]).probs == (F(1, 4), F(3, 4))
    assert MixedStrategy.uniform(4, [1, 3]).support == (1, 3)


def test_expected_payoff_point_masses(g5):
    assert core.expected_payoff(g5, ROW, MixedStrategy.pure(20, 5), MixedStrategy.pure(20, 4)) == F(3, 2)


def test_expected_payoff_uniform_block(g5):
    u = MixedStrategy.uniform(20, range(10, 20))
    assert core.expected_payoff(g5, ROW, u, u) == F(11, 20)
    assert core.expected_payoff(g5, COL, u, u) == F(11, 20)


def test_expected_payoff_matching_pennies(mp):
    h = MixedStrategy.uniform(2)
    assert core.expected_payoff(mp, ROW, h, h) == F(1, 2)


def test_payoff_vector_column_one(g5):
    v = core.payoff_vector(g5, ROW, MixedStrategy.pure(20, 0))
    assert v[0] == 0 and v[1] == 1 and all(x == F(3, 4) for x in v[2:])


def test_payoff_vector_uniform_prefix(g5):
    v = core.payoff_vector(g5, ROW, MixedStrategy.uniform(20, range(5)))
    assert (v[5], v[6], v[4]) == (F(9, 10), F(3, 4), F(13, 20))


def test_payoff_vector_point_mass_is_column(mp):
    assert core.payoff_vector(mp, COL, MixedStrategy.pure(2, 1)) == [F(1), F(0)]


def test_payoff_vector_length_mismatch(g5):
    with pytest.raises(ValueError):
        core.payoff_vector(g5, ROW, MixedStrategy.uniform(3))


def test_best_response_sets(g5, mp):
    assert core.best_response_set(g5, ROW, MixedStrategy.pure(20, 0)) == (1,)
    assert core.best_response_set(mp, ROW, MixedStrategy.uniform(2)) == (0, 1)
    assert core.best_response_set(g5, ROW, MixedStrategy.uniform(20, range(5))) == (5,)


def test_regret_examples(g5):
    e = MixedStrategy.pure(20, 0)
    assert core.regret(g5, ROW, e, e) == (1, F(2, 3))
    u = MixedStrategy.uniform(20, range(10, 20))
    assert core.regret(g5, ROW, u, u) == (0, 0)
    assert core.regret(g5, ROW, MixedStrategy.pure(20, 1), e) == (0, 0)


def test_regret_constant_game_normalizes_to_zero():
    g = make_game([[2, 2]], [[2, 2]])
    assert core.regret(g, COL, MixedStrategy.pure(2, 0), MixedStrategy.pure(1, 0)) == (0, 0)


def test_normalize_to_unit(g5):
    h = core.normalize_to_unit(g5)
    assert {x for row in h.R for x in row} == {0, F(1, 2), F(2, 3), 1}
    unit = generators.build_shapley()
    assert core.normalize_to_unit(unit) == unit
    flat = core.normalize_to_unit(make_game([[5, 5]], [[1, 1]]))
    assert flat.R == ((0, 0),) and flat.C == ((0, 0),)


def test_pure_nash(g5):
    assert core.pure_nash_equilibria(g5) == []
    assert core.pure_nash_equilibria(make_game([[2, 0], [0, 1]], [[2, 0], [0, 1]])) == [(0, 0), (1, 1)]
