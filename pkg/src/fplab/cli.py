"""Command-line front end: ``fplab {gen,run,analyze,bounds,verify,sweep}``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import analysis, bounds, engine, generators
from ._validation import parse_rational

log = logging.getLogger("fplab")

EXPAND_CAP = 10**6


class UsageError(Exception):
    pass


def _q(x):
    x = Fraction(x)
    return {"exact": f"{x.numerator}/{x.denominator}", "float": float(x)}


def _dump_json(obj, dest):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _write_text(text, dest):
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_trace(path):
    with open(path, encoding="utf-8") as fh:
        return engine.Trace.from_csv(fh.read())


def _rational(text):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _rational_list(text):
    return [_rational(x) for x in text.split(",") if x]


# --- gen ---------------------------------------------------------------------


def cmd_gen(args):
    if args.family == "gn":
        if args.n is None or (args.k is None and (args.alpha is None or args.beta is None)):
            raise UsageError("gn needs --n and either --k or both --alpha and --beta")
        try:
            if args.k is not None:
                params = generators.gn_params(args.n, args.k)
            else:
                params = generators.gn_params_override(args.n, args.alpha, args.beta)
        except ValueError as exc:
            raise UsageError(str(exc))
        game = generators.build_gn(params)
        print(params.banner())
    elif args.family == "shapley":
        game = generators.build_shapley()
    elif args.family == "mp":
        game = generators.build_matching_pennies()
    else:
        if args.seed is None or args.size is None:
            raise UsageError("random needs --seed and --size MxN")
        try:
            m, n = (int(x) for x in args.size.lower().split("x"))
            game = generators.build_random(args.seed, m, n, args.denom_bits)
        except ValueError as exc:
            raise UsageError(str(exc))
        print(f"seed={args.seed} size={m}x{n} denom_bits={args.denom_bits}")
    generators.write_game(game, args.output)
    print(f"wrote {game.m}x{game.n} game to {args.output}")
    return 0


# --- run ---------------------------------------------------------------------

TIE_FLAGS = {"lowest": "lowest", "highest": "highest", "incumbent": "incumbent"}


def _parse_start(text, game):
    try:
        r, c = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--start expects R,C, got {text!r}")
    if not (1 <= r <= game.m and 1 <= c <= game.n):
        raise UsageError(f"--start {text} out of range for a {game.m}x{game.n} game")
    return r - 1, c - 1


def _stats(state, recorder):
    r = engine.fast_regret(state, 0)
    c = engine.fast_regret(state, 1)
    return {
        "t": state.t,
        "ties": {
            "steps": state.tie_steps,
            "row": state.ties_row,
            "col": state.ties_col,
            "first_t": state.first_tie_t,
        },
        "runs": len(state.trace.runs),
        "epsilon_row": _q(r[0]),
        "epsilon_col": _q(c[0]),
        "epsilon_row_normalized": _q(r[1]),
        "epsilon_col_normalized": _q(c[1]),
        "samples": [
            {"t": s.t, "row": _q(s.row_raw), "col": _q(s.col_raw),
             "row_normalized": _q(s.row_norm), "col_normalized": _q(s.col_norm)}
            for s in recorder.samples
        ],
    }


def cmd_run(args):
    game = _load_game(args.game)
    start = _parse_start(args.start, game)
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    if args.expand and args.steps > EXPAND_CAP:
        raise UsageError(f"--expand is limited to --steps <= {EXPAND_CAP}")
    config = engine.FPConfig(TIE_FLAGS[args.tie_break], start[0], start[1], args.eps_schedule)
    recorder = engine.Recorder(args.eps_schedule)
    state = engine.init(game, config)
    engine.run(state, args.steps, recorder)
    if args.trace_out:
        _write_text(state.trace.to_csv(), args.trace_out)
    if args.expand:
        lines = ["t,row_action,col_action"]
        lines += [f"{t},{a + 1},{b + 1}" for t, (a, b) in enumerate(state.trace.steps(), start=1)]
        _write_text("\n".join(lines) + "\n", args.expand)
    stats = _stats(state, recorder)
    if args.stats_out:
        _dump_json(stats, args.stats_out)
    print(f"t={state.t} runs={len(state.trace.runs)} ties={state.tie_steps} "
          f"epsilon_row={stats['epsilon_row']['exact']} epsilon_col={stats['epsilon_col']['exact']}",
          file=sys.stderr if args.stats_out == "-" else sys.stdout)
    return 0


def _load_game(path):
    try:
        return generators.read_game(path)
    except OSError as exc:
        raise UsageError(f"cannot read game: {exc}")
    except ValueError as exc:
        raise UsageError(str(exc))


# --- analyze -----------------------------------------------------------------


def cmd_analyze(args):
    game = _load_game(args.game)
    try:
        trace = _read_trace(args.trace)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read trace: {exc}")
    params = generators.infer_gn_params(game)
    checks = [c for c in args.checks.split(",") if c]
    report = analysis.analysis_report(game, trace, params, checks)
    _dump_json(report, args.report)
    return 0


# --- bounds ------------------------------------------------------------------


def cmd_bounds(args):
    if args.epsilon_star:
        if args.t is None or args.n is None:
            raise UsageError("--epsilon-star needs --t and --n")
        try:
            value = bounds.epsilon_star(args.n, args.t)
        except ValueError as exc:
            raise UsageError(str(exc))
        print(f"{value.numerator}/{value.denominator} ({float(value)!r})")
        return 0
    if args.min_s:
        if args.t is None or args.n is None:
            raise UsageError("--min-s needs --t and --n")
        mode = "all-sequences" if args.exhaustive else "block-compositions"
        try:
            result = bounds.brute_force_min_S(args.t, args.n, mode)
        except ValueError as exc:
            raise UsageError(str(exc))
        sys.stdout.write(result.to_csv())
        return 0
    if args.certify:
        if not (args.game and args.trace):
            raise UsageError("--certify needs --game and --trace")
        game = _load_game(args.game)
        trace = _read_trace(args.trace)
        try:
            cert = bounds.certify_trace_bound(game, trace)
        except ValueError as exc:
            raise UsageError(str(exc))
        _dump_json({
            "passed": cert.passed,
            "checked": cert.checked,
            "failures": [[t, p, kind, str(e), str(b)] for t, p, kind, e, b in cert.failures],
            "worst_margin_msbound": _q(cert.worst_margin_msbound) if cert.worst_margin_msbound is not None else None,
            "worst_margin_epsilon_star": (
                _q(cert.worst_margin_epsilon_star) if cert.worst_margin_epsilon_star is not None else None
            ),
        }, args.report)
        return 0 if cert.passed else 1
    raise UsageError("choose one of --epsilon-star, --min-s, --certify")


# --- verify ------------------------------------------------------------------


def cmd_verify(args):
    from . import verify

    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    for suite, name, status, detail in verify.run_suites(names, quick=args.quick):
        failed += status == "fail"
        print(f"[{suite}] {status.upper():8s} {name}" + (f"  ({detail})" if detail else ""))
    print(f"{'FAILED' if failed else 'OK'}: {failed} failing check(s)")
    return 1 if failed else 0


# --- sweep -------------------------------------------------------------------


def _sweep_task(task):
    n, k, steps = task
    params = generators.gn_params(n, k)
    game = generators.build_gn(params)
    state = engine.simulate(game, steps)
    report = analysis.analysis_report(game, state.trace, params)
    report["params"] = {"n": n, "k": str(k), "alpha": str(params.alpha), "beta": str(params.beta)}
    report["ties"] = state.tie_steps
    return report


def cmd_sweep(args):
    if args.family != "gn":
        raise UsageError("only --family gn is supported")
    if args.jobs < 1 or not args.n_list or not args.k_list:
        raise UsageError("--jobs must be >= 1 and the lists non-empty")
    for k in args.k_list:
        if k <= 1:
            raise UsageError(f"k must exceed 1, got {k}")
    tasks = [(n, k, args.steps) for n in args.n_list for k in args.k_list]
    if args.jobs == 1:
        reports = list(map(_sweep_task, tasks))
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_sweep_task, tasks))
    os.makedirs(args.output, exist_ok=True)
    index = []
    for (n, k, _), report in zip(tasks, reports):
        name = f"gn_n{n}_k{str(k).replace('/', '_')}.json"
        _dump_json(report, os.path.join(args.output, name))
        index.append({"n": n, "k": str(k), "file": name, "t_star": report["t_star"],
                      "checks": report["checks"]})
    _dump_json({"family": "gn", "steps": args.steps, "configs": index},
               os.path.join(args.output, "index.json"))
    return 0


# --- entry -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="fplab", description="Exact Fictitious Play laboratory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a game file")
    p.add_argument("--family", choices=["gn", "shapley", "mp", "random"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=_rational)
    p.add_argument("--alpha", type=_rational)
    p.add_argument("--beta", type=_rational)
    p.add_argument("--seed", type=int)
    p.add_argument("--size")
    p.add_argument("--denom-bits", type=int, default=20)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run Fictitious Play")
    p.add_argument("--game", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--tie-break", choices=sorted(TIE_FLAGS), default="lowest")
    p.add_argument("--start", default="1,1")
    p.add_argument("--eps-schedule", choices=["blocks", "pow2", "all", "none", "default"], default="default")
    p.add_argument("--trace-out")
    p.add_argument("--stats-out")
    p.add_argument("--expand", metavar="FILE", help=f"also write the per-step CSV (T <= {EXPAND_CAP})")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="analyze a trace")
    p.add_argument("--game", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--checks", default="structure,recurrences,ratios,tailmass,ne")
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bounds", help="upper-bound tools")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--min-s", action="store_true")
    mode.add_argument("--epsilon-star", action="store_true")
    mode.add_argument("--certify", action="store_true")
    p.add_argument("--t", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--game")
    p.add_argument("--trace")
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run built-in property suites")
    p.add_argument("--suite", choices=["core", "gn", "bounds", "all"], default="all")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="analyze G_n over a parameter grid")
    p.add_argument("--family", default="gn")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--k-list", type=_rational_list, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fplab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (engine.NumericError, OverflowError, ZeroDivisionError) as exc:
        print(f"fplab {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
