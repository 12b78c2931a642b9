"""Structural certification of FP runs on ``G_n`` and regret trajectories.

Actions are 0-based throughout, so the last block of ``G_n`` (strategies
``2n+1..4n`` in 1-based terms) is ``range(2n, 4n)`` here. JSON reports use
1-based actions to match the trace CSV.

Analyses only look at run-length blocks. Counts at any time are rebuilt by
walking the blocks, so a ``10**7``-step run costs a few dozen iterations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .core import COL, ROW, BimatrixGame, MixedStrategy, pure_nash_equilibria, regret
from .engine import Trace
from .generators import GnParams


@dataclass(frozen=True)
class Block:
    action: int
    start_t: int
    length: int

    @property
    def end_t(self) -> int:
        return self.start_t + self.length - 1


@dataclass
class CheckReport:
    name: str
    passed: bool
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class FirstPassReport:
    t_star: int
    t_last: tuple
    ell_at_t_star: tuple


@dataclass(frozen=True)
class EpsilonPoint:
    t: int
    eps_row_raw: Fraction
    eps_row_norm: Fraction
    eps_col_raw: Fraction
    eps_col_norm: Fraction

    @property
    def normalized(self) -> Fraction:
        return max(self.eps_row_norm, self.eps_col_norm)

    @property
    def raw(self) -> Fraction:
        return max(self.eps_row_raw, self.eps_col_raw)


@dataclass(frozen=True)
class RatioProfile:
    ratios: dict
    min_ratio: Fraction
    max_ratio: Fraction


def extract_blocks(trace: Trace) -> list[Block]:
    """Blocks of the shared action sequence; both players must agree at every step."""
    blocks: list[Block] = []
    t = 1
    for a, b, length in trace.runs:
        if a != b:
            raise ValueError(f"trace is not symmetric at t={t}: row plays {a + 1}, column plays {b + 1}")
        if blocks and blocks[-1].action == a:
            last = blocks[-1]
            blocks[-1] = Block(a, last.start_t, last.length + length)
        else:
            blocks.append(Block(a, t, length))
        t += length
    return blocks


def walk_counts(blocks: Sequence[Block], size: int) -> Iterator[tuple[Block, list]]:
    """Yield each block with the action counts at its last step (shared list, do not keep)."""
    counts = [0] * size
    for block in blocks:
        counts[block.action] += block.length
        yield block, counts


def check_ascending_structure(blocks: Sequence[Block], n: int) -> CheckReport:
    """Transitions go up by one (or wrap ``4n -> 2n+1``); the first ``n`` actions appear once each,
    for one step, and no action below ``2n+1`` ever comes back."""
    violations = []
    if blocks and blocks[0].action != 0:
        violations.append(f"first block plays {blocks[0].action + 1}, not 1")
    for prev, cur in zip(blocks, blocks[1:]):
        ok = cur.action == prev.action + 1 or (prev.action == 4 * n - 1 and cur.action == 2 * n)
        if not ok:
            violations.append(f"t={cur.start_t}: transition {prev.action + 1} -> {cur.action + 1}")
    seen: dict[int, list[Block]] = {}
    for block in blocks:
        seen.setdefault(block.action, []).append(block)
    for a in range(n):
        got = seen.get(a, [])
        if len(got) != 1 or got[0].length != 1:
            violations.append(
                f"action {a + 1} appears in {len(got)} block(s) of lengths {[b.length for b in got]}"
            )
    for a in range(n, 2 * n):
        if len(seen.get(a, [])) > 1:
            violations.append(f"action {a + 1} reappears at t={seen[a][1].start_t}")
    return CheckReport("structure", not violations, violations)


def first_pass(blocks: Sequence[Block], n: int) -> FirstPassReport:
    """Locate ``t*``, the last step of the first block of action ``4n``, and the first-pass counts."""
    size = 4 * n
    t_last: list = [None] * size
    for idx, (block, counts) in enumerate(walk_counts(blocks, size)):
        if t_last[block.action] is None:
            t_last[block.action] = block.end_t
        if block.action == size - 1:
            if idx + 1 >= len(blocks):
                raise ValueError("first pass incomplete: the trace ends inside the first block of 4n")
            return FirstPassReport(block.end_t, tuple(t_last), tuple(counts))
    raise ValueError("first pass incomplete: action 4n never played")


def check_count_recurrences(report: FirstPassReport, params: GnParams) -> CheckReport:
    """Exact first-pass count recurrences between consecutive strategies.

    For 1-based ``i`` in ``n+1..3n``: ``rho*l(i-1) <= l(i) <= 1 + rho*l(i-1)``; for ``i`` in
    ``3n+1..4n-1`` the upper bound gains ``rb*l(i-n)``. Also ``l(4n-1) >= rho**(3n-1)``.
    """
    n, rho, rb = params.n, params.rho, params.rb
    ell = report.ell_at_t_star
    violations = []
    for i in range(n + 1, 4 * n):
        cur, prev = ell[i - 1], ell[i - 2]
        lo = rho * prev
        hi = 1 + rho * prev + (rb * ell[i - n - 1] if i > 3 * n else 0)
        if not lo <= cur <= hi:
            violations.append(f"strategy {i}: l={cur} outside [{lo}, {hi}]")
    chain = rho ** (3 * n - 1)
    if not ell[4 * n - 2] >= chain:
        violations.append(f"l(4n-1)={ell[4 * n - 2]} < rho^(3n-1)={chain}")
    return CheckReport(
        "recurrences",
        not violations,
        violations,
        {"chain_bound": chain, "ell_4n_minus_1": ell[4 * n - 2]},
    )


def _circ_prev(i: int, n: int) -> int:
    return 4 * n - 1 if i == 2 * n else i - 1


def _circ_next(i: int, n: int) -> int:
    return 2 * n if i == 4 * n - 1 else i + 1


def ratio_profile(counts: Sequence[int], n: int, current_action: int) -> RatioProfile:
    """Exact ``p(i)/p(i-1)`` around the last block (circular), with the minimum taken over
    ``i`` other than the current action and its successor and the maximum over all ``i``."""
    block = range(2 * n, 4 * n)
    if any(counts[i] == 0 for i in block):
        raise ValueError("a strategy of the last block has zero count")
    ratios = {i: Fraction(counts[i], counts[_circ_prev(i, n)]) for i in block}
    skip = {current_action, _circ_next(current_action, n)}
    return RatioProfile(
        ratios,
        min(r for i, r in ratios.items() if i not in skip),
        max(ratios.values()),
    )


def tail_mass(counts: Sequence[int], cutoff: int) -> Fraction:
    """Total empirical probability of the first ``cutoff`` strategies."""
    return Fraction(sum(counts[:cutoff]), sum(counts))


def count_cycles(blocks: Sequence[Block], n: int, t_star: int) -> int:
    """Completed passes over the last block that start after ``t*``.

    A pass is complete once its block of action ``4n`` has ended, which the
    trace only shows if another block follows it.
    """
    return sum(
        1
        for b, nxt in zip(blocks, blocks[1:])
        if b.start_t > t_star and b.action == 4 * n - 1 and nxt.action == 2 * n
    )


def check_tail_and_ratios(blocks: Sequence[Block], n: int, params: GnParams) -> CheckReport:
    """Tail mass and circular ratios at every ``t >= t*``.

    Within a block only the current action's count moves, so the minimum ratio
    is constant and the maximum is attained at the block's first or last step;
    evaluating both ends covers every ``t`` exactly.
    """
    fp = first_pass(blocks, n)
    size = 4 * n
    lower = 1 + 1 / params.k if params.k is not None else params.rho
    upper = 1 + 3 / params.k if params.k is not None else None
    violations = []
    min_ratio = max_ratio = None
    prev_tail = None
    points = 0
    for block, counts in walk_counts(blocks, size):
        if block.end_t < fp.t_star:
            continue
        ends = [tuple(counts)]
        if block.start_t > fp.t_star and block.length > 1:
            first = list(counts)
            first[block.action] -= block.length - 1
            ends.insert(0, tuple(first))
        for snap in ends:
            t = sum(snap)
            prof = ratio_profile(snap, n, block.action)
            tail = tail_mass(snap, 2 * n)
            points += 1
            min_ratio = prof.min_ratio if min_ratio is None else min(min_ratio, prof.min_ratio)
            max_ratio = prof.max_ratio if max_ratio is None else max(max_ratio, prof.max_ratio)
            if prof.min_ratio < lower:
                violations.append(f"t={t}: min ratio {prof.min_ratio} < {lower}")
            if prev_tail is not None and tail > prev_tail:
                violations.append(f"t={t}: tail mass increased")
            prev_tail = tail
    return CheckReport(
        "tail_ratios",
        not violations,
        violations,
        {
            "t_star": fp.t_star,
            "points": points,
            "min_ratio": min_ratio,
            "max_ratio": max_ratio,
            "lower_bound": lower,
            "upper_bound": upper,
            "upper_bound_holds": None if upper is None else max_ratio <= upper,
            "tail_mass_at_t_star": tail_mass(fp.ell_at_t_star, 2 * n),
            "final_tail_mass": prev_tail,
        },
    )


def _sample_times(trace: Trace, schedule) -> list[int]:
    T = trace.total_t
    if not isinstance(schedule, str):
        return sorted({t for t in schedule if 1 <= t <= T})
    times = set()
    if schedule in ("blocks", "default", "blocks+pow2"):
        t = 0
        for _, _, length in trace.runs:
            t += length
            times.add(t)
    if schedule in ("powers-of-two", "pow2", "default", "blocks+pow2"):
        p = 1
        while p <= T:
            times.add(p)
            p *= 2
    if schedule in ("every-step", "all"):
        times = set(range(1, T + 1))
    times.add(T)
    return sorted(times)


def counts_at(trace: Trace, times: Iterable[int], m: int, n: int) -> Iterator[tuple[int, list, list]]:
    """Yield ``(t, row_counts, col_counts)`` at each requested ``t`` (ascending)."""
    runs = iter(trace.runs)
    cr, cc = [0] * m, [0] * n
    t = 0
    pending = None
    for target in times:
        while t < target:
            if pending is None:
                pending = list(next(runs))
            a, b, length = pending
            take = min(length, target - t)
            cr[a] += take
            cc[b] += take
            t += take
            pending = None if take == length else [a, b, length - take]
        yield t, cr, cc


def epsilon_trajectory(game: BimatrixGame, trace: Trace, schedule="default") -> list[EpsilonPoint]:
    """Exact regrets of both empirical mixes at the scheduled times, computed with :mod:`fplab.core`."""
    out = []
    for t, cr, cc in counts_at(trace, _sample_times(trace, schedule), game.m, game.n):
        p, q = MixedStrategy.from_counts(cr), MixedStrategy.from_counts(cc)
        rr = regret(game, ROW, p, q)
        rc = regret(game, COL, q, p)
        out.append(EpsilonPoint(t, rr[0], rr[1], rc[0], rc[1]))
    return out


def early_phase_bound(params: GnParams, i: int) -> Fraction:
    """Lower bound on normalized regret while the 1-based action ``i <= n`` is being played."""
    return 1 / params.alpha - params.beta / params.alpha * Fraction(i - 1, 2 * i)


def check_early_phase(game: BimatrixGame, trace: Trace, params: GnParams) -> CheckReport:
    violations = []
    values = {}
    times = range(1, min(params.n, trace.total_t) + 1)
    for point, (t, cr, _) in zip(
        epsilon_trajectory(game, trace, times), counts_at(trace, times, game.m, game.n)
    ):
        i = max(a for a, c in enumerate(cr) if c) + 1
        bound = early_phase_bound(params, i)
        values[t] = (point.eps_row_norm, bound)
        if point.eps_row_norm < bound or point.eps_col_norm < bound:
            violations.append(f"t={t}: eps={point.normalized} < {bound}")
    return CheckReport("early_phase", not violations, violations, {"values": values})


@dataclass(frozen=True)
class UniformBlockResult:
    is_ne: bool
    value: Fraction
    no_pure_ne: bool
    regrets: tuple


def check_uniform_block_ne(game: BimatrixGame) -> UniformBlockResult:
    """Regret of the uniform profile on the last block, and an exhaustive pure-NE scan."""
    if game.m != game.n or game.m % 4:
        raise ValueError("expected a 4n x 4n game")
    n = game.m // 4
    mix = MixedStrategy.uniform(4 * n, range(2 * n, 4 * n))
    rr = regret(game, ROW, mix, mix)[0]
    rc = regret(game, COL, mix, mix)[0]
    from .core import expected_payoff

    value = expected_payoff(game, ROW, mix, mix)
    return UniformBlockResult(rr == 0 and rc == 0, value, not pure_nash_equilibria(game), (rr, rc))


def uniform_block_value(params: GnParams) -> Fraction:
    return (1 + params.alpha + (params.n - 1) * params.beta) / (2 * params.n)


def _q(x) -> dict | None:
    if x is None:
        return None
    x = Fraction(x)
    return {"exact": f"{x.numerator}/{x.denominator}", "float": float(x)}


def analysis_report(game: BimatrixGame, trace: Trace, params: GnParams | None = None,
                    checks: Iterable[str] = ("structure", "recurrences", "ratios", "tailmass", "ne")) -> dict:
    """Assemble the JSON-ready analysis report for one run."""
    checks = list(checks)
    T = trace.total_t
    final = epsilon_trajectory(game, trace, [T])[0]
    report: dict = {
        "t": T,
        "t_star": None,
        "epsilon_row": _q(final.eps_row_raw),
        "epsilon_col": _q(final.eps_col_raw),
        "epsilon_row_normalized": _q(final.eps_row_norm),
        "epsilon_col_normalized": _q(final.eps_col_norm),
        "blocks": [],
        "ratio_min": None,
        "ratio_max": None,
        "tail_mass": None,
        "checks": {},
    }
    try:
        blocks = extract_blocks(trace)
    except ValueError:
        blocks = None
    if blocks is not None:
        report["blocks"] = [
            {"action": b.action + 1, "start": b.start_t, "len": b.length} for b in blocks
        ]
    if params is None or blocks is None:
        return report
    n = params.n
    res = report["checks"]
    if "structure" in checks:
        res["structure"] = "pass" if check_ascending_structure(blocks, n) else "fail"
    try:
        fp = first_pass(blocks, n)
    except ValueError:
        fp = None
    if fp is not None:
        report["t_star"] = fp.t_star
        report["cycles_after_t_star"] = count_cycles(blocks, n, fp.t_star)
        if "recurrences" in checks:
            res["recurrences"] = "pass" if check_count_recurrences(fp, params) else "fail"
        if "ratios" in checks or "tailmass" in checks:
            tr = check_tail_and_ratios(blocks, n, params)
            report["ratio_min"] = _q(tr.details["min_ratio"])
            report["ratio_max"] = _q(tr.details["max_ratio"])
            report["tail_mass"] = _q(tr.details["final_tail_mass"])
            if "ratios" in checks:
                res["ratio_lower"] = "pass" if not any("ratio" in v for v in tr.violations) else "fail"
                res["ratio_upper"] = "measured"
            if "tailmass" in checks:
                res["tail_mass_monotone"] = "pass" if not any("tail" in v for v in tr.violations) else "fail"
    if "ne" in checks:
        ne = check_uniform_block_ne(game)
        res["uniform_block_ne"] = "pass" if ne.is_ne and ne.no_pure_ne else "fail"
    return report
