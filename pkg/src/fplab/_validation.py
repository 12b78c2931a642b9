"""Input validation helpers shared across the package."""

from __future__ import annotations

import numbers
from fractions import Fraction


def as_rational(x) -> Fraction:
    """Coerce ``x`` to a Fraction; floats and non-finite values are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not payoffs")
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}: {x!r}")


def parse_rational(token: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` with an optional sign on ``p``; ``q`` must be positive."""
    num, sep, den = token.strip().partition("/")
    try:
        p = int(num)
        q = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"malformed rational {token!r}") from None
    if sep and (not den.strip().isdigit()):
        raise ValueError(f"malformed denominator in {token!r}")
    if q == 0:
        raise ZeroDivisionError(f"zero denominator in {token!r}")
    return Fraction(p, q)


def check_player(player) -> int:
    if player not in (0, 1):
        raise ValueError(f"player must be 0 (row) or 1 (column), got {player!r}")
    return player


def check_index(index, size, what="strategy") -> int:
    if isinstance(index, bool) or not isinstance(index, numbers.Integral):
        raise TypeError(f"{what} index must be an integer, got {index!r}")
    if not 0 <= index < size:
        raise IndexError(f"{what} index {index} out of range [0, {size})")
    return int(index)


def check_game(game):
    """Return ``game`` if it is a :class:`~fplab.core.BimatrixGame`, else raise."""
    from .core import BimatrixGame

    if not isinstance(game, BimatrixGame):
        raise TypeError(f"expected a BimatrixGame, got {type(game).__name__}")
    return game


def check_unit_range(game):
    """Raise unless every payoff of both players lies in ``[0, 1]``."""
    for name, (lo, hi) in (("row", game.row_range), ("column", game.col_range)):
        if lo < 0 or hi > 1:
            raise ValueError(
                f"{name} payoffs span [{lo}, {hi}], outside [0, 1]; normalize the game first"
            )
    return game
