"""Game constructors and the ``.fpg`` text format.

The lower-bound family ``G_n`` is a ``4n x 4n`` game whose column matrix is
the transpose of the row matrix. It is parametrized here by a rational ``k``
with ``alpha = 1 + 1/k`` and ``beta = 1 - 1/k**2`` so that every payoff stays
exact.
"""

from __future__ import annotations

import io
import math
import os
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from ._validation import as_rational, parse_rational
from .core import BimatrixGame, make_game

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GnParams:
    n: int
    alpha: Fraction
    beta: Fraction
    k: Fraction | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.k is not None and (
            self.alpha != 1 + 1 / self.k or self.beta != 1 - 1 / self.k**2
        ):
            raise ValueError("alpha/beta are inconsistent with k")

    @property
    def rho(self) -> Fraction:
        """Growth ratio ``(alpha - beta) / (alpha - 1)`` of consecutive block counts."""
        return (self.alpha - self.beta) / (self.alpha - 1)

    @property
    def rb(self) -> Fraction:
        return self.beta / (self.alpha - 1)

    @property
    def delta_equiv(self) -> float | None:
        if self.k is None:
            return None
        return 1 - math.log(self.k) / math.log(self.n)

    @property
    def cycling_condition(self) -> bool:
        """Whether ``rho**(n-1) * beta >= 1``, the inequality the cycling argument relies on."""
        return self.rho ** (self.n - 1) * self.beta >= 1

    def banner(self) -> str:
        text = f"n={self.n} alpha={self.alpha} beta={self.beta} rho={self.rho} rb={self.rb}"
        if self.k is not None:
            text += f" k={self.k} delta_equiv={self.delta_equiv:.6g}"
        return text


def gn_params(n: int, k) -> GnParams:
    """Coupled parameters ``alpha = 1 + 1/k``, ``beta = 1 - 1/k**2`` (requires ``k > 1``)."""
    k = as_rational(k)
    if k <= 1:
        raise ValueError(f"k must exceed 1, got {k}")
    return GnParams(n=int(n), alpha=1 + 1 / k, beta=1 - 1 / k**2, k=k)


def gn_params_override(n: int, alpha, beta) -> GnParams:
    """Free ``(alpha, beta)``; warns when the cycling inequality fails."""
    params = GnParams(n=int(n), alpha=as_rational(alpha), beta=as_rational(beta))
    if not params.cycling_condition:
        warnings.warn(
            f"rho^(n-1)*beta < 1 for {params.banner()}; the cyclic lower-bound argument does not apply",
            stacklevel=2,
        )
    return params


def gn_entry(i: int, j: int, params: GnParams):
    """Row-player payoff at 1-based cell ``(i, j)``; rules tried in order, first match wins."""
    n, alpha, beta = params.n, params.alpha, params.beta
    if (2 <= i <= n and j == i - 1) or (n + 1 <= i <= 4 * n and j == i):
        return Fraction(1)
    if (n + 1 <= i <= 4 * n and j == i - 1) or (i == 2 * n + 1 and j == 4 * n):
        return alpha
    if i > j and j <= 2 * n:
        return beta
    if i > j and i - j <= n:
        return beta
    if 3 * n + 1 <= j <= 4 * n and 2 * n + 1 <= i <= j - n:
        return beta
    return Fraction(0)


def build_gn(params: GnParams) -> BimatrixGame:
    size = 4 * params.n
    R = tuple(
        tuple(gn_entry(i, j, params) for j in range(1, size + 1)) for i in range(1, size + 1)
    )
    C = tuple(zip(*R))
    return BimatrixGame(R, C)


def infer_gn_params(game: BimatrixGame) -> GnParams | None:
    """Recover ``G_n`` parameters from a game, or ``None`` if it is not a member of the family."""
    if game.m != game.n or game.m % 4 or game.m < 8:
        return None
    n = game.m // 4
    alpha, beta = game.R[2 * n][4 * n - 1], game.R[2][0]
    try:
        params = GnParams(n=n, alpha=alpha, beta=beta)
    except ValueError:
        return None
    k = 1 / (alpha - 1)
    if beta == 1 - 1 / k**2:
        params = GnParams(n=n, alpha=alpha, beta=beta, k=k)
    return params if build_gn(params) == game else None


def build_shapley() -> BimatrixGame:
    return make_game(
        [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
        [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    )


def build_matching_pennies() -> BimatrixGame:
    return make_game([[1, 0], [0, 1]], [[0, 1], [1, 0]])


class SplitMix64:
    """splitmix64 with the standard constants; identical output on every platform."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection (no modulo bias)."""
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next()
            if x < limit:
                return x % bound


def build_random(seed: int, m: int, n: int, denom_bits: int) -> BimatrixGame:
    """Random game with entries ``k / 2**denom_bits``, ``k`` uniform in ``[0, 2**denom_bits]``.

    Draw order: ``R`` row-major, then ``C`` row-major.
    """
    if m < 1 or n < 1:
        raise ValueError(f"game size must be positive, got {m}x{n}")
    if not 1 <= denom_bits <= 30:
        raise ValueError(f"denom_bits must lie in [1, 30], got {denom_bits}")
    rng = SplitMix64(seed)
    den = 1 << denom_bits

    def draw():
        return tuple(tuple(Fraction(rng.below(den + 1), den) for _ in range(n)) for _ in range(m))

    R = draw()
    C = draw()
    return BimatrixGame(R, C)


# --- .fpg text format -------------------------------------------------------

MAGIC = "fpg 1"


class GameFormatError(ValueError):
    """Malformed game file; carries 1-based ``line`` and ``column``."""

    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = f"line {line}" + (f", column {column}" if column else "") if line else "input"
        super().__init__(f"{where}: {message}")


def _format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def dumps_game(game: BimatrixGame) -> str:
    out = [MAGIC, f"{game.m} {game.n}"]
    for M in (game.R, game.C):
        out.extend(" ".join(_format_rational(x) for x in row) for row in M)
    return "\n".join(out) + "\n"


def write_game(game: BimatrixGame, destination) -> None:
    """Write ``game`` to a path or text stream."""
    text = dumps_game(game)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        destination.write(text)


def _tokens(line: str) -> Iterator[tuple[int, str]]:
    col = 0
    for piece in line.split():
        col = line.index(piece, col)
        yield col + 1, piece
        col += len(piece)


def loads_game(text: str) -> BimatrixGame:
    lines = [
        (no, line)
        for no, line in enumerate(text.split("\n"), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines or lines[0][1].strip() != MAGIC:
        raise GameFormatError(f"expected magic line {MAGIC!r}", lines[0][0] if lines else None)
    if len(lines) < 2:
        raise GameFormatError("missing dimension line")
    no, dims = lines[1]
    parts = dims.split()
    if len(parts) != 2 or not all(p.isdigit() and int(p) > 0 for p in parts):
        raise GameFormatError(f"bad dimension line {dims.strip()!r}", no)
    m, n = map(int, parts)
    body = lines[2:]
    if len(body) != 2 * m:
        raise GameFormatError(f"expected {2 * m} matrix rows, found {len(body)}", no)
    matrices = []
    for start in (0, m):
        rows = []
        for no, line in body[start:start + m]:
            toks = list(_tokens(line))
            if len(toks) != n:
                raise GameFormatError(f"expected {n} entries, found {len(toks)}", no)
            row = []
            for col, tok in toks:
                try:
                    row.append(parse_rational(tok))
                except (ValueError, ZeroDivisionError) as exc:
                    raise GameFormatError(f"bad token {tok!r}: {exc}", no, col) from None
            rows.append(row)
        matrices.append(rows)
    return make_game(*matrices)


def read_game(source) -> BimatrixGame:
    """Read a game from a path or text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return loads_game(fh.read())
    if isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        return loads_game(source.read())
    raise TypeError(f"cannot read a game from {type(source).__name__}")
