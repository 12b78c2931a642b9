"""Deterministic Fictitious Play with exact integer bookkeeping.

Both players update simultaneously from the same length ``t-1`` history.
Payoff matrices are scaled by the LCM of their denominators, so every
accumulator is a Python ``int`` (arbitrary precision, cannot overflow).

``run`` does not iterate step by step: while the joint action ``(a, b)`` is
unchanged every accumulator moves along a straight line, so the exact number
of steps until either player's choice changes is solved for directly and the
whole run is applied at once. ``step`` is the literal one-step update and
``oracle_run`` recomputes best responses from scratch; both are used to
cross-check ``run``.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from ._validation import check_game, check_index, check_player
from .core import COL, ROW, BimatrixGame, MixedStrategy

SNAPSHOT_VERSION = 1

TIE_RULES = {
    "lowest": "lowest",
    "lowest-index": "lowest",
    "highest": "highest",
    "highest-index": "highest",
    "incumbent": "incumbent",
    "incumbent-then-lowest": "incumbent",
}

SCHEDULES = {
    "blocks": frozenset({"blocks"}),
    "powers-of-two": frozenset({"pow2"}),
    "pow2": frozenset({"pow2"}),
    "every-step": frozenset({"all"}),
    "all": frozenset({"all"}),
    "none": frozenset(),
    "blocks+pow2": frozenset({"blocks", "pow2"}),
    "default": frozenset({"blocks", "pow2"}),
}


class NumericError(ArithmeticError):
    """Exact arithmetic could not be carried out."""


class SnapshotError(ValueError):
    """A checkpoint could not be restored."""


@dataclass(frozen=True)
class FPConfig:
    tie_rule: str = "lowest"
    initial_row: int = 0
    initial_col: int = 0
    epsilon_schedule: str = "default"

    def __post_init__(self):
        if self.tie_rule not in TIE_RULES:
            raise ValueError(f"unknown tie rule {self.tie_rule!r}; choose from {sorted(TIE_RULES)}")
        if self.epsilon_schedule not in SCHEDULES:
            raise ValueError(
                f"unknown epsilon schedule {self.epsilon_schedule!r}; choose from {sorted(SCHEDULES)}"
            )

    @property
    def rule(self) -> str:
        return TIE_RULES[self.tie_rule]


@dataclass(frozen=True)
class StepRecord:
    t: int
    row_action: int
    col_action: int
    row_tie: bool
    col_tie: bool


class Trace:
    """Run-length encoded joint action sequence; actions are 0-based."""

    __slots__ = ("runs", "total_t")

    def __init__(self, runs: Iterable[tuple[int, int, int]] = ()):
        self.runs: list[tuple[int, int, int]] = []
        self.total_t = 0
        for a, b, length in runs:
            self.append(a, b, length)

    def append(self, a: int, b: int, length: int = 1) -> None:
        if length < 1:
            raise ValueError(f"run length must be positive, got {length}")
        if self.runs and self.runs[-1][0] == a and self.runs[-1][1] == b:
            self.runs[-1] = (a, b, self.runs[-1][2] + length)
        else:
            self.runs.append((a, b, length))
        self.total_t += length

    def __eq__(self, other):
        return isinstance(other, Trace) and self.runs == other.runs

    def __len__(self):
        return self.total_t

    def __repr__(self):
        return f"Trace({len(self.runs)} runs, t={self.total_t})"

    def copy(self) -> "Trace":
        out = Trace()
        out.runs = list(self.runs)
        out.total_t = self.total_t
        return out

    def prefix(self, t: int) -> "Trace":
        out = Trace()
        for a, b, length in self.runs:
            if out.total_t >= t:
                break
            out.append(a, b, min(length, t - out.total_t))
        return out

    def steps(self) -> Iterator[tuple[int, int]]:
        for a, b, length in self.runs:
            for _ in range(length):
                yield a, b

    def player_runs(self, player: int) -> list[tuple[int, int]]:
        """RLE ``(action, length)`` of one player's own sequence."""
        k = check_player(player)
        out: list[tuple[int, int]] = []
        for run in self.runs:
            act, length = run[k], run[2]
            if out and out[-1][0] == act:
                out[-1] = (act, out[-1][1] + length)
            else:
                out.append((act, length))
        return out

    def to_csv(self) -> str:
        lines = ["row_action,col_action,length"]
        lines += [f"{a + 1},{b + 1},{length}" for a, b, length in self.runs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Trace":
        rows = [line for line in text.split("\n") if line.strip()]
        if not rows or rows[0].strip() != "row_action,col_action,length":
            raise ValueError("trace CSV must start with header 'row_action,col_action,length'")
        out = cls()
        for no, line in enumerate(rows[1:], start=2):
            try:
                a, b, length = (int(x) for x in line.split(","))
            except ValueError:
                raise ValueError(f"line {no}: malformed trace row {line!r}") from None
            if a < 1 or b < 1:
                raise ValueError(f"line {no}: actions are 1-based")
            out.append(a - 1, b - 1, length)
        return out


def _scaled(M) -> tuple[int, list[list[int]]]:
    scale = math.lcm(*(x.denominator for row in M for x in row))
    return scale, [[int(x * scale) for x in row] for row in M]


@dataclass(eq=False)
class FPState:
    """Mutable FP bookkeeping owned by a single caller.

    ``acc_row[i]`` is ``scale_row * sum_s R[i][b_s]`` and ``acc_col[j]`` is
    ``scale_col * sum_s C[a_s][j]`` over the ``t`` steps played so far.
    """

    game: BimatrixGame
    config: FPConfig
    t: int
    counts_row: list
    counts_col: list
    acc_row: list
    acc_col: list
    last_row: int
    last_col: int
    scale_row: int
    scale_col: int
    trace: Trace
    ties_row: int = 0
    ties_col: int = 0
    tie_steps: int = 0
    first_tie_t: int | None = None
    _r_cols: list = field(default=None, repr=False)
    _c_rows: list = field(default=None, repr=False)

    def __post_init__(self):
        if self._r_cols is None:
            _, R = _scaled(self.game.R)
            _, C = _scaled(self.game.C)
            self._r_cols = [list(col) for col in zip(*R)]
            self._c_rows = C

    @property
    def ties(self) -> int:
        return self.tie_steps


def init(game: BimatrixGame, config: FPConfig | None = None) -> FPState:
    """Step 1: both players are assigned their initial actions."""
    check_game(game)
    config = config or FPConfig()
    a = check_index(config.initial_row, game.m, "initial row")
    b = check_index(config.initial_col, game.n, "initial column")
    scale_row, R = _scaled(game.R)
    scale_col, C = _scaled(game.C)
    r_cols = [list(col) for col in zip(*R)]
    counts_row = [0] * game.m
    counts_col = [0] * game.n
    counts_row[a] = counts_col[b] = 1
    trace = Trace()
    trace.append(a, b, 1)
    return FPState(
        game=game,
        config=config,
        t=1,
        counts_row=counts_row,
        counts_col=counts_col,
        acc_row=list(r_cols[b]),
        acc_col=list(C[a]),
        last_row=a,
        last_col=b,
        scale_row=scale_row,
        scale_col=scale_col,
        trace=trace,
        _r_cols=r_cols,
        _c_rows=C,
    )


def _choose(acc: list, incumbent: int, rule: str) -> tuple[int, bool]:
    top = max(acc)
    tie = acc.count(top) > 1
    if rule == "highest":
        return len(acc) - 1 - acc[::-1].index(top), tie
    if rule == "incumbent" and acc[incumbent] == top:
        return incumbent, tie
    return acc.index(top), tie


def _hold(acc: list, slope: list, a: int, rule: str) -> tuple[int | None, list, bool]:
    """How long ``a`` stays chosen while ``acc`` grows by ``slope`` per step.

    Returns ``(L, tie_offsets, always_tied)``: the choice at offset ``s`` is
    ``a`` exactly for ``0 <= s < L`` (``L`` is ``None`` if forever), and the
    argmax set has several elements at the listed offsets (or at every offset).
    """
    xa, da = acc[a], slope[a]
    best = None
    ties = []
    always = False
    for j in range(len(acc)):
        if j == a:
            continue
        gap = xa - acc[j]
        delta = slope[j] - da
        if delta > 0:
            q, r = divmod(gap, delta)
            if r == 0:
                ties.append(q)
            wins_tie = (rule == "lowest" and j < a) or (rule == "highest" and j > a)
            s = (q if r == 0 else q + 1) if wins_tie else q + 1
            if s < 1:
                raise NumericError(f"strategy {j} already beats the chosen {a}")
            if best is None or s < best:
                best = s
        elif gap == 0:
            if delta == 0:
                always = True
            else:
                ties.append(0)
    return best, ties, always


def step(state: FPState) -> StepRecord:
    """Advance one FP step; returns the actions played at the new ``t``."""
    rule = state.config.rule
    a, row_tie = _choose(state.acc_row, state.last_row, rule)
    b, col_tie = _choose(state.acc_col, state.last_col, rule)
    _advance(state, a, b, 1)
    if row_tie:
        state.ties_row += 1
    if col_tie:
        state.ties_col += 1
    if row_tie or col_tie:
        state.tie_steps += 1
        if state.first_tie_t is None:
            state.first_tie_t = state.t
    return StepRecord(state.t, a, b, row_tie, col_tie)


def _advance(state: FPState, a: int, b: int, length: int) -> None:
    state.t += length
    state.counts_row[a] += length
    state.counts_col[b] += length
    acc, col = state.acc_row, state._r_cols[b]
    for i in range(len(acc)):
        acc[i] += length * col[i]
    acc, row = state.acc_col, state._c_rows[a]
    for j in range(len(acc)):
        acc[j] += length * row[j]
    state.last_row, state.last_col = a, b
    state.trace.append(a, b, length)


def _offsets_below(ties: list, always: bool, limit: int) -> set | None:
    if always:
        return None
    return {s for s in ties if s < limit}


def run(state: FPState, T: int, recorder: "Recorder | None" = None) -> Trace:
    """Advance ``state`` to ``t = T`` and return the full trace so far."""
    if T < state.t:
        raise ValueError(f"cannot run backwards from t={state.t} to T={T}")
    rule = state.config.rule
    if recorder is not None:
        recorder.start(state)
    while state.t < T:
        a, _ = _choose(state.acc_row, state.last_row, rule)
        b, _ = _choose(state.acc_col, state.last_col, rule)
        if recorder is not None and (a, b) != (state.last_row, state.last_col):
            # the run ending at state.t is complete (matters for t=1 and resumed runs)
            recorder.observe(state, block_end=True)
        la, ties_a, always_a = _hold(state.acc_row, state._r_cols[b], a, rule)
        lb, ties_b, always_b = _hold(state.acc_col, state._c_rows[a], b, rule)
        held = min((x for x in (la, lb) if x is not None), default=None)
        length = T - state.t
        if held is not None:
            length = min(length, held)
        if recorder is not None:
            stop = recorder.next_stop(state.t)
            if stop is not None:
                length = min(length, stop - state.t)
        _count_ties(state, length, ties_a, always_a, ties_b, always_b)
        _advance(state, a, b, length)
        if recorder is not None:
            recorder.observe(state, block_end=(length == held))
    if recorder is not None:
        recorder.finish(state)
    return state.trace


def _count_ties(state, length, ties_a, always_a, ties_b, always_b):
    sa = _offsets_below(ties_a, always_a, length)
    sb = _offsets_below(ties_b, always_b, length)
    na = length if sa is None else len(sa)
    nb = length if sb is None else len(sb)
    if not (na or nb):
        return
    state.ties_row += na
    state.ties_col += nb
    if sa is None or sb is None:
        union = length
        first = 0
    else:
        both = sa | sb
        union = len(both)
        first = min(both)
    state.tie_steps += union
    if state.first_tie_t is None:
        state.first_tie_t = state.t + 1 + first


@dataclass(frozen=True)
class EpsilonSample:
    t: int
    row_raw: Fraction
    row_norm: Fraction
    col_raw: Fraction
    col_norm: Fraction

    @property
    def raw(self) -> Fraction:
        return max(self.row_raw, self.col_raw)

    @property
    def normalized(self) -> Fraction:
        return max(self.row_norm, self.col_norm)


def fast_regret(state: FPState, player: int) -> tuple[Fraction, Fraction]:
    """Exact regret of the empirical mixes from the accumulators alone.

    With ``acc[i] = D * t * u(i, opponent mix)`` the regret is
    ``(t * max(acc) - sum_i counts[i] * acc[i]) / (D * t**2)``.
    """
    if player == ROW:
        acc, counts, scale, (lo, hi) = state.acc_row, state.counts_row, state.scale_row, state.game.row_range
    else:
        acc, counts, scale, (lo, hi) = state.acc_col, state.counts_col, state.scale_col, state.game.col_range
    t = state.t
    own = sum(c * x for c, x in zip(counts, acc) if c)
    raw = Fraction(t * max(acc) - own, scale * t * t)
    return raw, (raw / (hi - lo) if hi != lo else Fraction(0))


class Recorder:
    """Collects epsilon samples (and optionally count snapshots) during ``run``.

    ``schedule`` is a name from :data:`SCHEDULES` or an iterable of explicit
    times. Samples are taken at most once per ``t``.
    """

    def __init__(self, schedule="default", keep_counts: bool = False):
        if isinstance(schedule, str):
            if schedule not in SCHEDULES:
                raise ValueError(f"unknown epsilon schedule {schedule!r}")
            self.kinds = SCHEDULES[schedule]
            self.times = None
        else:
            self.kinds = frozenset({"times"})
            self.times = sorted(set(int(t) for t in schedule))
            self._time_set = set(self.times)
        self.keep_counts = keep_counts
        self.samples: list[EpsilonSample] = []
        self.snapshots: list[tuple[int, tuple, tuple]] = []
        self._last_t = None
        self._cursor = 0

    def start(self, state: FPState) -> None:
        if self._last_t is None and self._wants(state.t, False):
            self._take(state)

    def next_stop(self, t: int) -> int | None:
        if "all" in self.kinds:
            return t + 1
        stops = []
        if "pow2" in self.kinds:
            stops.append(1 << t.bit_length())
        if self.times is not None:
            while self._cursor < len(self.times) and self.times[self._cursor] <= t:
                self._cursor += 1
            if self._cursor < len(self.times):
                stops.append(self.times[self._cursor])
        return min(stops) if stops else None

    def _wants(self, t: int, block_end: bool) -> bool:
        k = self.kinds
        return (
            "all" in k
            or ("blocks" in k and block_end)
            or ("pow2" in k and t & (t - 1) == 0)
            or (self.times is not None and t in self._time_set)
        )

    def observe(self, state: FPState, block_end: bool) -> None:
        if self._wants(state.t, block_end):
            self._take(state)

    def finish(self, state: FPState) -> None:
        if self.kinds & {"blocks", "pow2", "all"} and self._last_t != state.t:
            self._take(state)

    def _take(self, state: FPState) -> None:
        if self._last_t == state.t:
            return
        self._last_t = state.t
        r = fast_regret(state, ROW)
        c = fast_regret(state, COL)
        self.samples.append(EpsilonSample(state.t, r[0], r[1], c[0], c[1]))
        if self.keep_counts:
            self.snapshots.append((state.t, tuple(state.counts_row), tuple(state.counts_col)))


def state_probabilities(state: FPState, player: int) -> MixedStrategy:
    counts = state.counts_row if check_player(player) == ROW else state.counts_col
    return MixedStrategy.from_counts(counts)


def accumulators_consistent(state: FPState) -> bool:
    """Recompute both accumulators from the counts and compare exactly."""
    game = state.game
    row = [
        state.scale_row * sum((c * game.R[i][j] for j, c in enumerate(state.counts_col) if c), Fraction(0))
        for i in range(game.m)
    ]
    col = [
        state.scale_col * sum((c * game.C[i][j] for i, c in enumerate(state.counts_row) if c), Fraction(0))
        for j in range(game.n)
    ]
    return row == state.acc_row and col == state.acc_col and sum(state.counts_row) == state.t == sum(state.counts_col)


# --- reference implementation -------------------------------------------------


def oracle_run(game: BimatrixGame, config: FPConfig | None, T: int) -> Trace:
    """Naive FP: every step recomputes all pure-strategy payoffs from the counts.

    Uses its own common-denominator integer matrices and a matrix-vector
    product per step; shares no state or update logic with :func:`run`.
    """
    config = config or FPConfig()
    rule = config.rule
    m, n = game.shape
    den_r = math.lcm(*(x.denominator for row in game.R for x in row))
    den_c = math.lcm(*(x.denominator for row in game.C for x in row))
    big = max(abs(x) * den_r for row in game.R for x in row) * T
    big = max(big, max(abs(x) * den_c for row in game.C for x in row) * T)
    dtype = np.int64 if big < 2**62 else object
    R = np.array([[int(x * den_r) for x in row] for row in game.R], dtype=dtype)
    CT = np.array([[int(game.C[i][j] * den_c) for i in range(m)] for j in range(n)], dtype=dtype)
    counts_row = np.zeros(m, dtype=dtype)
    counts_col = np.zeros(n, dtype=dtype)
    a = check_index(config.initial_row, m, "initial row")
    b = check_index(config.initial_col, n, "initial column")
    counts_row[a] += 1
    counts_col[b] += 1
    trace = Trace()
    trace.append(a, b, 1)

    def pick(values, incumbent):
        best = np.flatnonzero(values == values.max())
        if rule == "highest":
            return int(best[-1])
        if rule == "incumbent" and incumbent in best:
            return incumbent
        return int(best[0])

    for _ in range(1, T):
        a, b = pick(R.dot(counts_col), a), pick(CT.dot(counts_row), b)
        counts_row[a] += 1
        counts_col[b] += 1
        trace.append(a, b, 1)
    return trace


# --- checkpoints ---------------------------------------------------------------


def checkpoint(state: FPState) -> bytes:
    """Serialize ``state`` (game included) to self-checking bytes."""
    from .generators import dumps_game

    payload = {
        "version": SNAPSHOT_VERSION,
        "game": dumps_game(state.game),
        "config": [state.config.tie_rule, state.config.initial_row, state.config.initial_col,
                   state.config.epsilon_schedule],
        "t": state.t,
        "counts_row": state.counts_row,
        "counts_col": state.counts_col,
        "acc_row": [str(x) for x in state.acc_row],
        "acc_col": [str(x) for x in state.acc_col],
        "last": [state.last_row, state.last_col],
        "ties": [state.ties_row, state.ties_col, state.tie_steps, state.first_tie_t],
        "runs": state.trace.runs,
    }
    body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    digest = hashlib.sha256(body).hexdigest()
    return json.dumps({"sha256": digest, "body": base64.b64encode(body).decode()}).encode()


def restore(snapshot: bytes) -> FPState:
    from .generators import loads_game

    try:
        outer = json.loads(snapshot)
        body = base64.b64decode(outer["body"], validate=True)
        digest = outer["sha256"]
    except (ValueError, KeyError, TypeError) as exc:
        raise SnapshotError(f"unreadable snapshot: {exc}") from None
    if hashlib.sha256(body).hexdigest() != digest:
        raise SnapshotError("snapshot checksum mismatch")
    payload = json.loads(body)
    if payload.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(f"snapshot version {payload.get('version')} != {SNAPSHOT_VERSION}")
    game = loads_game(payload["game"])
    tie_rule, r0, c0, sched = payload["config"]
    state = init(game, FPConfig(tie_rule, r0, c0, sched))
    state.t = payload["t"]
    state.counts_row = list(payload["counts_row"])
    state.counts_col = list(payload["counts_col"])
    state.acc_row = [int(x) for x in payload["acc_row"]]
    state.acc_col = [int(x) for x in payload["acc_col"]]
    state.last_row, state.last_col = payload["last"]
    state.ties_row, state.ties_col, state.tie_steps, state.first_tie_t = payload["ties"]
    state.trace = Trace(tuple(r) for r in payload["runs"])
    if state.trace.total_t != state.t:
        raise SnapshotError("snapshot trace length disagrees with t")
    return state


def simulate(game: BimatrixGame, T: int, config: FPConfig | None = None,
             recorder: Recorder | None = None) -> FPState:
    """Convenience: ``init`` followed by ``run`` to ``T``."""
    state = init(game, config)
    run(state, T, recorder)
    return state
