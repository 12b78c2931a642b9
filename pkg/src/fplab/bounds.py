"""Upper-bound machinery: last-occurrence scores, the block transform, minimization of
the score, and the resulting regret guarantee for FP on ``[0, 1]`` games.

Sequences are plain Python sequences of hashable labels; positions are 1-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from ._validation import check_unit_range
from .core import COL, ROW, BimatrixGame
from .engine import Trace

BLOCK_LIMITS = (40, 8)
EXHAUSTIVE_LIMITS = (10, 4)


@dataclass(frozen=True)
class SequenceStats:
    seq: tuple
    f: tuple
    S: int


@dataclass(frozen=True)
class MinSResult:
    t: int
    n: int
    min_S: int
    argmin_compositions: tuple
    minimizers: tuple = ()
    all_block_form: bool | None = None

    def to_csv(self) -> str:
        rows = ["t,n,min_S,composition"]
        rows += [f"{self.t},{self.n},{self.min_S}," + "-".join(map(str, c)) for c in self.argmin_compositions]
        return "\n".join(rows) + "\n"


def last_occurrences(seq: Sequence) -> tuple[int, ...]:
    """``f[k]``: last 1-based position holding the same value as position ``k``."""
    if not seq:
        raise ValueError("sequence is empty")
    last = {v: pos for pos, v in enumerate(seq, start=1)}
    return tuple(last[v] for v in seq)


def sum_S(seq: Sequence) -> int:
    return sum(last_occurrences(seq))


def sequence_stats(seq: Sequence) -> SequenceStats:
    f = last_occurrences(seq)
    return SequenceStats(tuple(seq), f, sum(f))


def msbound(seq: Sequence, t: int | None = None) -> Fraction:
    """Regret bound ``1 + 1/t - S/t**2`` for a player whose FP sequence is ``seq``."""
    t = len(seq) if t is None else t
    if len(seq) != t:
        raise ValueError(f"sequence has length {len(seq)}, expected {t}")
    return 1 + Fraction(1, t) - Fraction(sum_S(seq), t * t)


def transform(seq: Sequence) -> tuple:
    """Regroup ``seq`` into blocks ordered by each value's last occurrence."""
    if not seq:
        raise ValueError("sequence is empty")
    last = {v: pos for pos, v in enumerate(seq)}
    counts: dict = {}
    for v in seq:
        counts[v] = counts.get(v, 0) + 1
    out: list = []
    for v in sorted(last, key=last.__getitem__):
        out.extend([v] * counts[v])
    return tuple(out)


def block_sequence(composition: Sequence[int]) -> tuple[int, ...]:
    """``1`` repeated ``c_1`` times, then ``2`` repeated ``c_2`` times, and so on."""
    return tuple(v for v, c in enumerate(composition, start=1) for _ in range(c))


def composition_S(composition: Sequence[int]) -> int:
    end = 0
    total = 0
    for c in composition:
        end += c
        total += c * end
    return total


def canonical_labels(seq: Sequence) -> tuple[int, ...]:
    """Relabel values 1, 2, ... in order of first appearance."""
    names: dict = {}
    return tuple(names.setdefault(v, len(names) + 1) for v in seq)


def block_composition(seq: Sequence) -> tuple[int, ...] | None:
    """Block lengths if every value occupies one contiguous stretch, else ``None``."""
    comp: list[int] = []
    seen = set()
    prev = object()
    for v in seq:
        if v == prev:
            comp[-1] += 1
            continue
        if v in seen:
            return None
        seen.add(v)
        comp.append(1)
        prev = v
    return tuple(comp)


def brute_force_min_S(t: int, n: int, mode: str = "block-compositions") -> MinSResult:
    """Exact minimum of ``S`` over length-``t`` sequences with at most ``n`` values.

    ``block-compositions`` searches every split of ``t`` into exactly
    ``min(n, t)`` positive block lengths (memoized over the suffix, still
    exhaustive). ``all-sequences`` scans all ``n**t`` sequences and reports
    minimizers up to relabeling.
    """
    if t < 1 or n < 1:
        raise ValueError("t and n must be positive")
    if mode == "block-compositions":
        if t > BLOCK_LIMITS[0] or n > BLOCK_LIMITS[1]:
            raise ValueError(f"block mode limited to t <= {BLOCK_LIMITS[0]}, n <= {BLOCK_LIMITS[1]}")
        return _min_blocks(t, n)
    if mode == "all-sequences":
        if t > EXHAUSTIVE_LIMITS[0] or n > EXHAUSTIVE_LIMITS[1]:
            raise ValueError(
                f"exhaustive mode limited to t <= {EXHAUSTIVE_LIMITS[0]}, n <= {EXHAUSTIVE_LIMITS[1]}"
            )
        return _min_all(t, n)
    raise ValueError(f"unknown mode {mode!r}")


def _min_blocks(t: int, n: int) -> MinSResult:
    k = min(n, t)

    @lru_cache(maxsize=None)
    def best(start: int, left: int) -> tuple[int, tuple]:
        # blocks still to place cover positions start+1 .. t
        remaining = t - start
        if left == 1:
            return remaining * t, ((remaining,),)
        top, tails = None, []
        for c in range(1, remaining - left + 2):
            sub, subs = best(start + c, left - 1)
            total = c * (start + c) + sub
            if top is None or total < top:
                top, tails = total, [(c,) + s for s in subs]
            elif total == top:
                tails.extend((c,) + s for s in subs)
        return top, tuple(tails)

    value, comps = best(0, k)
    return MinSResult(t, n, value, tuple(sorted(comps)), all_block_form=True)


def _min_all(t: int, n: int) -> MinSResult:
    top = None
    found: set = set()
    for seq in itertools.product(range(n), repeat=t):
        s = sum_S(seq)
        if top is None or s < top:
            top, found = s, {canonical_labels(seq)}
        elif s == top:
            found.add(canonical_labels(seq))
    minimizers = tuple(sorted(found))
    comps = [block_composition(m) for m in minimizers]
    return MinSResult(
        t,
        n,
        top,
        tuple(sorted(c for c in comps if c is not None)),
        minimizers,
        all(c is not None for c in comps),
    )


def epsilon_star(n: int, t: int) -> Fraction:
    """Guarantee ``1/2 + 1/t - 1/(2n)`` for FP after ``t`` steps; requires ``n | t``."""
    if n < 1 or t < 1:
        raise ValueError("n and t must be positive")
    if t % n:
        lower = t - t % n
        near = [x for x in (lower, lower + n) if x >= 1]
        raise ValueError(f"n={n} does not divide t={t}; nearest valid t: {' or '.join(map(str, near))}")
    return Fraction(1, 2) + Fraction(1, t) - Fraction(1, 2 * n)


def epsilon_star_limit(n: int) -> Fraction:
    return Fraction(1, 2) - Fraction(1, 2 * n)


@dataclass
class BoundCertificate:
    passed: bool
    checked: int
    failures: list = field(default_factory=list)
    worst_margin_msbound: Fraction | None = None
    worst_margin_epsilon_star: Fraction | None = None


class _PlayerScore:
    """Incremental ``S`` of one player's own sequence prefix."""

    def __init__(self):
        self.count: dict = {}
        self.last: dict = {}
        self.S = 0

    def extend(self, action, length, t_end):
        c = self.count.get(action, 0)
        self.S += (c + length) * t_end - c * self.last.get(action, 0)
        self.count[action] = c + length
        self.last[action] = t_end


def certify_trace_bound(game: BimatrixGame, trace: Trace, times=None) -> BoundCertificate:
    """Check exact regret against both upper bounds along an engine trace.

    At each checked ``t`` and for each player: ``eps_t <= msbound(own prefix)``,
    and ``eps_t <= epsilon_star(n_own, t)`` whenever ``n_own`` divides ``t``.
    Default ``times``: every multiple of either strategy count plus every run end.
    """
    check_unit_range(game)
    m, n = game.shape
    T = trace.total_t
    if times is None:
        want = {t for t in range(1, T + 1) if t % m == 0 or t % n == 0}
        end = 0
        for _, _, length in trace.runs:
            end += length
            want.add(end)
    else:
        want = {t for t in times if 1 <= t <= T}
    stops = sorted(want)

    # payoff sums against the opponent's prefix, scaled to integers
    dr = math.lcm(*(x.denominator for row in game.R for x in row))
    dc = math.lcm(*(x.denominator for row in game.C for x in row))
    R = [[int(x * dr) for x in row] for row in game.R]
    C = [[int(x * dc) for x in row] for row in game.C]
    vs_row = [0] * m
    vs_col = [0] * n
    cnt_row = [0] * m
    cnt_col = [0] * n
    scores = (_PlayerScore(), _PlayerScore())
    cert = BoundCertificate(True, 0)
    t = 0
    runs = list(trace.runs)
    pos = 0
    rest = runs[0][2] if runs else 0
    for stop in stops:
        while t < stop:
            a, b, _ = runs[pos]
            take = min(rest, stop - t)
            for r in range(m):
                vs_row[r] += take * R[r][b]
            for c in range(n):
                vs_col[c] += take * C[a][c]
            cnt_row[a] += take
            cnt_col[b] += take
            t += take
            scores[0].extend(a, take, t)
            scores[1].extend(b, take, t)
            rest -= take
            if rest == 0 and pos + 1 < len(runs):
                pos += 1
                rest = runs[pos][2]
        for player, vs, cnt, d, size in ((ROW, vs_row, cnt_row, dr, m), (COL, vs_col, cnt_col, dc, n)):
            eps = Fraction(t * max(vs) - sum(c * v for c, v in zip(cnt, vs) if c), d * t * t)
            mb = 1 + Fraction(1, t) - Fraction(scores[player].S, t * t)
            margin = mb - eps
            if cert.worst_margin_msbound is None or margin < cert.worst_margin_msbound:
                cert.worst_margin_msbound = margin
            if margin < 0:
                cert.failures.append((t, player, "msbound", eps, mb))
            if t % size == 0:
                es = epsilon_star(size, t)
                margin = es - eps
                if cert.worst_margin_epsilon_star is None or margin < cert.worst_margin_epsilon_star:
                    cert.worst_margin_epsilon_star = margin
                if margin < 0:
                    cert.failures.append((t, player, "epsilon_star", eps, es))
        cert.checked += 1
    cert.passed = not cert.failures
    return cert
