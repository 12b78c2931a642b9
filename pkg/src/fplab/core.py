"""Exact-rational bimatrix games, expected payoffs, best responses and regret.

Every number in this module is a :class:`fractions.Fraction`; nothing is ever
rounded. Players are indexed ``0`` (row) and ``1`` (column), strategies are
0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._validation import as_rational, check_player

Rational = Fraction

ROW, COL = 0, 1


@dataclass(frozen=True)
class BimatrixGame:
    """Two-player normal-form game with row matrix ``R`` and column matrix ``C``.

    Both matrices are ``m x n`` tuples of tuples of Fractions; ``R[i][j]`` is
    the row player's payoff and ``C[i][j]`` the column player's payoff when
    row plays ``i`` and column plays ``j``.
    """

    R: tuple
    C: tuple
    row_range: tuple = field(init=False, compare=False, repr=False)
    col_range: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "row_range", _value_range(self.R))
        object.__setattr__(self, "col_range", _value_range(self.C))

    @property
    def m(self) -> int:
        return len(self.R)

    @property
    def n(self) -> int:
        return len(self.R[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    def matrix(self, player: int) -> tuple:
        return self.R if check_player(player) == ROW else self.C

    def payoff_range(self, player: int) -> tuple[Fraction, Fraction]:
        return self.row_range if check_player(player) == ROW else self.col_range

    def n_strategies(self, player: int) -> int:
        return self.m if check_player(player) == ROW else self.n

    def transpose_symmetric(self) -> bool:
        """True when ``C`` is the transpose of ``R``."""
        if self.m != self.n:
            return False
        return all(self.C[i][j] == self.R[j][i] for i in range(self.m) for j in range(self.n))


def _value_range(M) -> tuple[Fraction, Fraction]:
    flat = [x for row in M for x in row]
    return min(flat), max(flat)


def make_game(R, C) -> BimatrixGame:
    """Validate two payoff matrices and build a :class:`BimatrixGame`.

    Entries may be ints, Fractions or ``"p/q"`` strings. Floats are rejected
    because they would silently carry binary rounding into exact comparisons.
    """
    R = _as_matrix(R, "R")
    C = _as_matrix(C, "C")
    if (len(R), len(R[0])) != (len(C), len(C[0])):
        raise ValueError(
            f"dimension mismatch: R is {len(R)}x{len(R[0])}, C is {len(C)}x{len(C[0])}"
        )
    return BimatrixGame(R, C)


def _as_matrix(M, name):
    rows = [tuple(as_rational(x) for x in row) for row in M]
    if not rows or not rows[0]:
        raise ValueError(f"{name} is empty")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{name} is ragged: row {i} has {len(row)} entries, expected {width}")
    return tuple(rows)


@dataclass(frozen=True)
class MixedStrategy:
    """Probability vector over one player's strategies (sums to exactly 1)."""

    probs: tuple

    def __post_init__(self):
        probs = tuple(as_rational(p) for p in self.probs)
        if not probs:
            raise ValueError("mixed strategy is empty")
        if any(p < 0 for p in probs):
            raise ValueError("mixed strategy has a negative entry")
        if sum(probs) != 1:
            raise ValueError(f"mixed strategy sums to {sum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.probs) if p)

    @classmethod
    def pure(cls, size: int, index: int) -> "MixedStrategy":
        if not 0 <= index < size:
            raise IndexError(f"strategy {index} out of range for {size} strategies")
        return cls(tuple(Fraction(int(i == index)) for i in range(size)))

    @classmethod
    def uniform(cls, size: int, support: Sequence[int] | None = None) -> "MixedStrategy":
        support = range(size) if support is None else support
        support = set(support)
        if not support or min(support) < 0 or max(support) >= size:
            raise ValueError("uniform support must be a non-empty subset of the strategies")
        w = Fraction(1, len(support))
        return cls(tuple(w if i in support else Fraction(0) for i in range(size)))

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "MixedStrategy":
        total = sum(counts)
        if total <= 0:
            raise ValueError("counts must have a positive total")
        return cls(tuple(Fraction(c, total) for c in counts))


def _check_mix(mix, size, what):
    if not isinstance(mix, MixedStrategy):
        mix = MixedStrategy(tuple(mix))
    if len(mix) != size:
        raise ValueError(f"{what} has length {len(mix)}, expected {size}")
    return mix


def payoff_vector(game: BimatrixGame, player: int, opp_mix) -> list[Fraction]:
    """Exact payoff of each of ``player``'s pure strategies against ``opp_mix``."""
    M = game.matrix(player)
    if player == ROW:
        q = _check_mix(opp_mix, game.n, "column mix")
        sup = q.support
        return [sum((q[j] * M[i][j] for j in sup), Fraction(0)) for i in range(game.m)]
    p = _check_mix(opp_mix, game.m, "row mix")
    sup = p.support
    return [sum((p[i] * M[i][j] for i in sup), Fraction(0)) for j in range(game.n)]


def expected_payoff(game: BimatrixGame, player: int, row_mix, col_mix) -> Fraction:
    """Bilinear expected payoff ``sum_ij row_mix[i] col_mix[j] M[i][j]``."""
    M = game.matrix(player)
    p = _check_mix(row_mix, game.m, "row mix")
    q = _check_mix(col_mix, game.n, "column mix")
    return sum(
        (p[i] * q[j] * M[i][j] for i in p.support for j in q.support), Fraction(0)
    )


def best_response_set(game: BimatrixGame, player: int, opp_mix) -> tuple[int, ...]:
    """All pure best responses, ascending. Ties are reported, never broken."""
    values = payoff_vector(game, player, opp_mix)
    top = max(values)
    return tuple(i for i, v in enumerate(values) if v == top)


def regret(game: BimatrixGame, player: int, own_mix, opp_mix) -> tuple[Fraction, Fraction]:
    """Return ``(raw, normalized)`` regret of ``own_mix`` against ``opp_mix``.

    ``raw`` is the best-response payoff minus the payoff of ``own_mix``;
    ``normalized`` divides it by the width of the player's payoff range
    (zero width gives zero).
    """
    values = payoff_vector(game, player, opp_mix)
    own = _check_mix(own_mix, len(values), "own mix")
    raw = max(values) - sum((own[i] * values[i] for i in own.support), Fraction(0))
    lo, hi = game.payoff_range(player)
    return raw, (raw / (hi - lo) if hi != lo else Fraction(0))


def profile_epsilon(game: BimatrixGame, row_mix, col_mix, normalized: bool = False) -> Fraction:
    """Smallest epsilon for which ``(row_mix, col_mix)`` is an epsilon-Nash equilibrium."""
    k = 1 if normalized else 0
    return max(
        regret(game, ROW, row_mix, col_mix)[k],
        regret(game, COL, col_mix, row_mix)[k],
    )


def normalize_to_unit(game: BimatrixGame) -> BimatrixGame:
    """Map each player's payoffs affinely onto ``[0, 1]`` using its own min and max."""

    def scale(M, rng):
        lo, hi = rng
        if lo == hi:
            return tuple(tuple(Fraction(0) for _ in row) for row in M)
        w = hi - lo
        return tuple(tuple((x - lo) / w for x in row) for row in M)

    return BimatrixGame(scale(game.R, game.row_range), scale(game.C, game.col_range))


def pure_nash_equilibria(game: BimatrixGame) -> list[tuple[int, int]]:
    """Exhaustive scan for pure-strategy Nash equilibria."""
    col_max = [max(game.R[i][j] for i in range(game.m)) for j in range(game.n)]
    row_max = [max(game.C[i]) for i in range(game.m)]
    return [
        (i, j)
        for i in range(game.m)
        for j in range(game.n)
        if game.R[i][j] == col_max[j] and game.C[i][j] == row_max[i]
    ]
