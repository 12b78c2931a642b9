"""Self-contained property suites behind ``fplab verify``.

Each check returns ``(name, status, detail)`` with status ``"pass"``,
``"fail"`` or ``"measured"``; only ``"fail"`` affects the exit code.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import analysis, bounds, core, engine, generators
from .core import COL, ROW, MixedStrategy


def _check(name, ok, detail=""):
    return name, "pass" if ok else "fail", detail


def _random_mix(rng, size):
    w = [rng.randint(0, 5) for _ in range(size)]
    if not any(w):
        w[rng.randrange(size)] = 1
    return MixedStrategy.from_counts(w)


def suite_core(quick=True):
    out = []
    g5 = generators.build_gn(generators.gn_params(5, 2))
    mp = generators.build_matching_pennies()
    u = MixedStrategy.uniform(20, range(10, 20))
    out.append(_check("G5 uniform block payoff 11/20",
                      core.expected_payoff(g5, ROW, u, u) == Fraction(11, 20)))
    out.append(_check("G5 best response to column 1 is {2}",
                      core.best_response_set(g5, ROW, MixedStrategy.pure(20, 0)) == (1,)))
    out.append(_check("G5 pure (1,1) regret 1, normalized 2/3",
                      core.regret(g5, ROW, MixedStrategy.pure(20, 0), MixedStrategy.pure(20, 0))
                      == (1, Fraction(2, 3))))
    half = MixedStrategy.uniform(2)
    out.append(_check("matching pennies uniform is exact Nash",
                      core.profile_epsilon(mp, half, half) == 0))
    rng = random.Random(7)
    bad = 0
    for seed in range(10 if quick else 100):
        g = generators.build_random(seed, 4, 3, 6)
        scale, shift = Fraction(rng.randint(1, 9), rng.randint(1, 9)), Fraction(rng.randint(-9, 9), 7)
        h = core.make_game([[scale * x + shift for x in row] for row in g.R],
                           [[scale * x + shift for x in row] for row in g.C])
        q, p = _random_mix(rng, 3), _random_mix(rng, 4)
        bad += core.best_response_set(g, ROW, q) != core.best_response_set(h, ROW, q)
        bad += core.best_response_set(g, COL, p) != core.best_response_set(h, COL, p)
    out.append(_check("argmax invariant under positive affine maps", bad == 0, f"{bad} mismatches"))
    return out


def suite_gn(quick=True):
    out = []
    for n in range(2, 9):
        for k in (2, 3, 4):
            p = generators.gn_params(n, k)
            g = generators.build_gn(p)
            R = g.R
            ok = (
                g.transpose_symmetric()
                and all(R[i][i] == 1 and R[i][i - 1] == p.alpha for i in range(n, 4 * n))
                and R[2 * n][4 * n - 1] == p.alpha
                and {x for row in R for x in row} <= {0, p.beta, 1, p.alpha}
            )
            out.append(_check(f"G_{n} k={k} generator invariants", ok))
    T = 10**6 if quick else 10**7
    p = generators.gn_params(5, 2)
    g = generators.build_gn(p)
    state = engine.simulate(g, T)
    blocks = analysis.extract_blocks(state.trace)
    out.append(_check(f"G5 structure T={T}", analysis.check_ascending_structure(blocks, 5).passed))
    fp = analysis.first_pass(blocks, 5)
    out.append(_check("G5 count recurrences", analysis.check_count_recurrences(fp, p).passed,
                      f"t*={fp.t_star}"))
    tr = analysis.check_tail_and_ratios(blocks, 5, p)
    out.append(_check("G5 tail mass monotone, min ratio >= 1+1/k", tr.passed,
                      f"min={tr.details['min_ratio']} max={tr.details['max_ratio']}"))
    out.append(("G5 tie steps (exact ties occur at k=2)", "measured", str(state.tie_steps)))
    ne = analysis.check_uniform_block_ne(g)
    out.append(_check("G5 uniform block NE, no pure NE", ne.is_ne and ne.no_pure_ne, str(ne.value)))
    return out


def suite_bounds(quick=True):
    out = []
    ok = True
    for n in range(1, 5):
        for t in range(n, 17, n):
            r = bounds.brute_force_min_S(t, n)
            ok &= r.argmin_compositions == ((t // n,) * n,)
            ok &= bounds.msbound(bounds.block_sequence((t // n,) * n)) == bounds.epsilon_star(n, t)
    out.append(_check("block minimizer uniform and matches epsilon*", ok))
    out.append(_check("t=5 n=2 minimizers (2,3),(3,2)",
                      bounds.brute_force_min_S(5, 2).argmin_compositions == ((2, 3), (3, 2))))
    rng = random.Random(11)
    bad = 0
    for _ in range(200 if quick else 1000):
        seq = tuple(rng.randrange(4) for _ in range(rng.randint(1, 12)))
        tr = bounds.transform(seq)
        if tr != seq and not bounds.sum_S(tr) < bounds.sum_S(seq):
            bad += 1
    out.append(_check("transform strictly lowers S", bad == 0))
    fails = 0
    for seed in range(20 if quick else 200):
        g = core.normalize_to_unit(generators.build_random(seed, 5, 5, 20))
        st = engine.simulate(g, 1000)
        fails += not bounds.certify_trace_bound(g, st.trace).passed
    out.append(_check("random 5x5 traces respect both bounds", fails == 0, f"{fails} failures"))
    return out


SUITES = {"core": suite_core, "gn": suite_gn, "bounds": suite_bounds}


def run_suites(names, quick=True):
    results = []
    for name in names:
        results.extend((name,) + r for r in SUITES[name](quick))
    return results
