import io
import warnings
from fractions import Fraction

import pytest

from fplab import core, generators
from fplab.generators import GameFormatError

F = Fraction

# Row player's matrix of G_5, transcribed by hand from the reference layout:
# "." is 0, "1" is 1, "b" is beta, "a" is alpha.
G5_LAYOUT = """\
....................
1...................
b1..................
bb1.................
bbb1................
bbbba1..............
bbbbba1.............
bbbbbba1............
bbbbbbba1...........
bbbbbbbba1..........
bbbbbbbbba1....bbbba
bbbbbbbbbba1....bbbb
bbbbbbbbbbba1....bbb
bbbbbbbbbbbba1....bb
bbbbbbbbbbbbba1....b
bbbbbbbbbbbbbba1....
bbbbbbbbbb.bbbba1...
bbbbbbbbbb..bbbba1..
bbbbbbbbbb...bbbba1.
bbbbbbbbbb....bbbba1
""".split()

SEED1_2X2 = (
    ((F(151339, 524288), F(15385, 65536)), (F(784703, 1048576), F(752551, 1048576))),
    ((F(386039, 1048576), F(546431, 1048576)), (F(145, 65536), F(409091, 524288))),
)


def test_gn_params_k2():
    p = generators.gn_params(5, 2)
    assert (p.alpha, p.beta, p.rho, p.rb) == (F(3, 2), F(3, 4), F(3, 2), F(3, 2))
    assert p.delta_equiv == pytest.approx(0.5693, abs=1e-4)
    assert "alpha=3/2 beta=3/4 rho=3/2" in p.banner()


def test_gn_params_k4():
    p = generators.gn_params(5, 4)
    assert (p.alpha, p.beta, p.rho, p.rb) == (F(5, 4), F(15, 16), F(5, 4), F(15, 4))


@pytest.mark.parametrize("k", [1, 0, "1/2", -3])
def test_gn_params_rejects_small_k(k):
    with pytest.raises(ValueError):
        generators.gn_params(4, k)


def test_gn_params_rational_k():
    p = generators.gn_params(6, "7/3")
    assert p.alpha == F(10, 7) and p.beta == F(40, 49) and p.rho == F(10, 7)


def test_override_warns_when_cycling_fails():
    with pytest.warns(UserWarning):
        generators.gn_params_override(2, 3, "1/2")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        generators.gn_params_override(5, "3/2", "3/4")


def test_build_gn_matches_reference_layout(g5):
    sym = {F(0): ".", F(1): "1", F(3, 4): "b", F(3, 2): "a"}
    assert ["".join(sym[x] for x in row) for row in g5.R] == G5_LAYOUT


def test_build_gn_named_cells(g5):
    R = g5.R
    a, b = F(3, 2), F(3, 4)
    assert (R[1][0], R[5][5], R[5][4], R[10][19], R[0][0]) == (1, 1, a, a, 0)
    assert R[14][19] == b
    assert R[15][14] == a and R[15][15] == 1


def test_build_gn_circular_last_block(g5):
    block = [row[10:20] for row in g5.R[10:20]]
    for i in range(10):
        assert block[i] == tuple(block[0][(j - i) % 10] for j in range(10))


def test_infer_gn_params(g5):
    p = generators.infer_gn_params(g5)
    assert p.n == 5 and p.k == 2
    assert generators.infer_gn_params(generators.build_shapley()) is None


def test_shapley_and_pennies():
    s = generators.build_shapley()
    assert s.R[0][1] == 1 and s.C[0][2] == 1
    assert core.pure_nash_equilibria(s) == []
    u = core.MixedStrategy.uniform(3)
    assert core.expected_payoff(s, 0, u, u) == F(1, 3)
    mp = generators.build_matching_pennies()
    assert all(mp.R[i][j] + mp.C[i][j] == 1 for i in range(2) for j in range(2))
    assert core.pure_nash_equilibria(mp) == []


def test_splitmix_reference_values():
    # published first outputs of splitmix64 seeded with 0
    rng = generators.SplitMix64(0)
    assert [rng.next() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F,
    ]


def test_build_random_golden_and_determinism():
    g = generators.build_random(1, 2, 2, 20)
    assert (g.R, g.C) == SEED1_2X2
    assert generators.build_random(1, 2, 2, 20) == g
    assert generators.build_random(2, 2, 2, 20) != g


def test_build_random_entries():
    g = generators.build_random(99, 4, 3, 5)
    for M in (g.R, g.C):
        for row in M:
            for x in row:
                assert 0 <= x <= 1 and 32 % x.denominator == 0


@pytest.mark.parametrize("args", [(1, 0, 2, 10), (1, 2, 2, 0), (1, 2, 2, 31)])
def test_build_random_rejects(args):
    with pytest.raises(ValueError):
        generators.build_random(*args)


def test_roundtrip(tmp_path, g5):
    path = tmp_path / "g5.fpg"
    generators.write_game(g5, path)
    assert generators.read_game(path) == g5
    buf = io.StringIO()
    generators.write_game(g5, buf)
    assert generators.loads_game(buf.getvalue()) == g5


def test_integer_tokens_and_comments():
    g = generators.loads_game("# header\nfpg 1\n1 2\n# R\n1 -2\n3/4 0\n")
    assert g.R == ((F(1), F(-2)),) and g.C == ((F(3, 4), F(0)),)


def test_zero_denominator_names_token():
    with pytest.raises(GameFormatError) as err:
        generators.loads_game("fpg 1\n1 2\n1 3/0\n0 0\n")
    assert "3/0" in str(err.value)
    assert (err.value.line, err.value.column) == (3, 3)


@pytest.mark.parametrize("text", [
    "fpg 2\n1 1\n1\n1\n",
    "fpg 1\n1 x\n1\n1\n",
    "fpg 1\n2 2\n1 1\n1 1\n1 1\n",
    "fpg 1\n1 2\n1\n1 1\n",
    "fpg 1\n1 1\n1.5\n1\n",
])
def test_malformed_files(text):
    with pytest.raises(GameFormatError):
        generators.loads_game(text)
