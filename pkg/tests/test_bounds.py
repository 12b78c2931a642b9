from fractions import Fraction

import pytest

from fplab import bounds, core, engine, generators

F = Fraction


@pytest.mark.parametrize("seq, f", [
    ((1, 2, 1), (3, 2, 3)),
    ((1, 1, 2, 2), (2, 2, 4, 4)),
    ((1, 2, 3), (1, 2, 3)),
])
def test_last_occurrences(seq, f):
    assert bounds.last_occurrences(seq) == f


@pytest.mark.parametrize("seq, S", [((1, 1, 2, 2), 12), ((1, 2, 1, 2), 14), ((1, 2), 3)])
def test_sum_S(seq, S):
    assert bounds.sum_S(seq) == S


def test_msbound_examples():
    assert bounds.msbound((1, 1, 2, 2)) == F(1, 2)
    assert bounds.msbound(tuple(range(7))) == F(1, 2) + F(1, 14)
    assert bounds.msbound((1,) * 9) == F(1, 9)
    with pytest.raises(ValueError):
        bounds.msbound((1, 2), 3)


def test_transform_examples():
    assert bounds.transform((2, 1, 2)) == (1, 2, 2)
    assert (bounds.sum_S((2, 1, 2)), bounds.sum_S((1, 2, 2))) == (8, 7)
    assert bounds.transform((3, 3, 1, 1)) == (3, 3, 1, 1)
    assert bounds.transform((3, 1, 3, 1)) == (3, 3, 1, 1)
    assert (bounds.sum_S((3, 1, 3, 1)), bounds.sum_S((3, 3, 1, 1))) == (14, 12)


def test_min_blocks_examples():
    r = bounds.brute_force_min_S(4, 2)
    assert (r.min_S, r.argmin_compositions) == (12, ((2, 2),))
    assert bounds.composition_S((1, 3)) == bounds.composition_S((3, 1)) == 13
    assert bounds.brute_force_min_S(6, 3).min_S == 24
    r = bounds.brute_force_min_S(5, 2)
    assert (r.min_S, r.argmin_compositions) == (19, ((2, 3), (3, 2)))


def test_min_blocks_fewer_values_than_n():
    r = bounds.brute_force_min_S(2, 5)
    assert r.argmin_compositions == ((1, 1),) and r.n == 5


def test_min_all_sequences_agrees_with_blocks():
    for t in range(1, 8):
        for n in range(1, 4):
            a = bounds.brute_force_min_S(t, n, "all-sequences")
            b = bounds.brute_force_min_S(t, n)
            assert a.min_S == b.min_S and a.all_block_form
            assert a.argmin_compositions == b.argmin_compositions


def test_limits():
    with pytest.raises(ValueError):
        bounds.brute_force_min_S(41, 2)
    with pytest.raises(ValueError):
        bounds.brute_force_min_S(11, 2, "all-sequences")
    with pytest.raises(ValueError):
        bounds.brute_force_min_S(4, 2, "greedy")


def test_min_s_csv():
    assert bounds.brute_force_min_S(5, 2).to_csv() == "t,n,min_S,composition\n5,2,19,2-3\n5,2,19,3-2\n"


def test_epsilon_star():
    assert bounds.epsilon_star(2, 4) == F(1, 2)
    assert bounds.epsilon_star(10, 100) == F(23, 50)
    assert bounds.epsilon_star_limit(10) == F(9, 20)
    with pytest.raises(ValueError, match="nearest valid t: 100 or 110"):
        bounds.epsilon_star(10, 105)


def test_certify_normalized_g5(g5):
    h = core.normalize_to_unit(g5)
    trace = engine.simulate(h, 20000).trace
    cert = bounds.certify_trace_bound(h, trace, times=range(20, 20001, 20))
    assert cert.passed and cert.checked == 1000


def test_certify_rejects_out_of_range(g5):
    with pytest.raises(ValueError):
        bounds.certify_trace_bound(g5, engine.simulate(g5, 10).trace)


def test_certify_matches_core_regret():
    g = generators.build_random(5, 3, 4, 10)
    s = engine.simulate(g, 60)
    cert = bounds.certify_trace_bound(g, s.trace, times=[60])
    p, q = engine.state_probabilities(s, 0), engine.state_probabilities(s, 1)
    eps = core.regret(g, 0, p, q)[0]
    mb = bounds.msbound([a for a, _ in s.trace.steps()])
    assert cert.worst_margin_msbound <= mb - eps
