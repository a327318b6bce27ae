"""Command line entry point: ``qlattice <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

import numpy as np

from . import harness
from .baselines import backtrack_cost
from .coefficients import solve_coefficients, unitarity_residuals
from .problems import (
    generate_soluble_3sat,
    generate_unstructured,
    load_problem,
    save_problem,
    theory,
    constraint_count,
)
from .simulator import PhasePolicy, run_trial


def parse_grid(text: str) -> list[float]:
    """``"0:6:0.25"`` (inclusive range) or ``"1,2,3"``."""
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        count = int(round((hi - lo) / step)) + 1
        return [round(lo + k * step, 10) for k in range(count)]
    return [float(x) for x in text.split(",") if x]


def parse_ints(text: str) -> list[int]:
    return [int(x) for x in parse_grid(text)]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)


def _gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=("unstructured", "sat3"), default="unstructured")
    p.add_argument("--N", type=int, help="items (unstructured)")
    p.add_argument("--beta", type=float, help="constraints per item (unstructured)")
    p.add_argument("--n", type=int, help="variables (sat3)")
    p.add_argument("--c", type=int, help="clauses (sat3)")


def _problem_from(args):
    if getattr(args, "problem", None):
        return load_problem(args.problem)
    if args.kind == "unstructured":
        if args.N is None or args.beta is None:
            raise SystemExit("need --problem or --N and --beta")
        return generate_unstructured(args.N, args.beta, args.seed)
    if args.n is None or args.c is None:
        raise SystemExit("need --problem or --n and --c")
    return generate_soluble_3sat(args.n, args.c, args.seed)[0]


def cmd_coeffs(args) -> str:
    c = solve_coefficients(args.n, args.level)
    res = float(np.max(np.abs(unitarity_residuals(c.N, c.i, c.a))))
    rows = [{"N": c.N, "i": c.i, "k": k, "a_k": a, "residual_max": res} for k, a in enumerate(c.a)]
    return harness.format_table(rows, args.format)


def cmd_gen(args) -> str:
    p = _problem_from(args)
    if args.out:
        save_problem(p, args.out)
        return ""
    import json

    return json.dumps(p.to_dict(), indent=1) + "\n"


def cmd_simulate(args) -> str:
    p = _problem_from(args)
    policy = PhasePolicy(args.policy)
    rows = []
    trials = args.trials if policy.variant == "random" else 1
    for t in range(trials):
        r = run_trial(p, policy, seed=harness.derive_seed(args.seed, t), method=args.method)
        row = {"seed": args.seed, "trial": t, "p_soln": r.p_soln, "norm_residual": r.norm_residual}
        if args.trace_levels:
            for j, v in enumerate(r.goods_prob_by_level, start=p.K):
                row[f"goods_L{j}"] = v
        rows.append(row)
    return harness.format_table(rows, args.format)


def cmd_backtrack(args) -> str:
    s = backtrack_cost(_problem_from(args))
    row = {
        "nodes_visited": s.nodes_visited,
        "consistent_nodes": s.consistent_nodes,
        "found_solution": s.found_solution,
        "solution": " ".join(map(str, s.solution.items)) if s.solution else "",
    }
    return harness.format_table([row], args.format)


def _config(args, family: str) -> harness.SweepConfig:
    return harness.SweepConfig(
        family=family,
        sizes=parse_ints(args.sizes),
        params=parse_grid(args.params),
        samples=args.samples,
        trials=args.trials,
        policy=args.policy,
        seed=args.seed,
        method=args.method,
        workers=args.workers,
        trace_levels=getattr(args, "trace_levels", False),
    )


def _sweep_output(res: harness.SweepResult, args) -> str:
    if args.instances:
        with open(args.instances, "w") as fh:
            fh.write(harness.format_table(res.instances, args.format))
    return harness.format_table(res.points, args.format)


def cmd_sweep_beta(args) -> str:
    return _sweep_output(harness.sweep_beta(_config(args, "unstructured")), args)


def cmd_sweep_size(args) -> str:
    return _sweep_output(harness.sweep_size(_config(args, "unstructured")), args)


def cmd_sweep_3sat(args) -> str:
    return _sweep_output(harness.sweep_3sat(_config(args, "sat3")), args)


def cmd_variance(args) -> str:
    res = harness.variance_curve(_config(args, "unstructured"), policies=args.policies.split(","))
    rows = [
        {k: getattr(p, k) for k in ("size", "param", "policy", "samples", "trials", "seed", "mean_T", "std_T", "stderr_T")}
        for p in res.points
    ]
    return harness.format_table(rows, args.format)


def cmd_sweep_backtrack(args) -> str:
    pts = harness.sweep_backtrack(_config(args, "unstructured"))
    return harness.format_table([asdict(p) for p in pts], args.format)


def cmd_theory(args) -> str:
    L = args.L if args.L is not None else args.N // 2
    m = args.m if args.m is not None else constraint_count(args.N, args.beta or 0.0)
    b = args.b if args.b is not None else args.N / L
    rep = theory(args.N, L, m, b)
    row = {"N": args.N, "L": L, "m": m, "b": b, **asdict(rep)}
    return harness.format_table([row], args.format)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlattice", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="solve the level map coefficients")
    _common(p)
    p.add_argument("--n", type=int, required=True, help="item count N")
    p.add_argument("--level", type=int, required=True, help="source level i")
    p.set_defaults(fn=cmd_coeffs)

    p = sub.add_parser("gen", help="generate a problem file")
    _common(p)
    _gen_flags(p)
    p.set_defaults(fn=cmd_gen)

    def sim_like(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        _gen_flags(p)
        p.add_argument("--problem", help="problem JSON file")
        p.set_defaults(fn=fn)
        return p

    p = sim_like("simulate", cmd_simulate, "run the quantum search on one problem")
    p.add_argument("--policy", choices=("invert", "random"), default="invert")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--method", choices=("auto", "direct", "shadow"), default="auto")
    p.add_argument("--trace-levels", action="store_true")

    sim_like("backtrack", cmd_backtrack, "chronological backtracking cost")

    def sweep_like(name, fn, help_, sizes, params):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--sizes", default=sizes, help="N (or n for 3SAT) grid")
        p.add_argument("--params", default=params, help="beta (or c/n for 3SAT) grid, lo:hi:step or a,b,c")
        p.add_argument("--samples", type=int, default=100)
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--policy", choices=("invert", "random"), default="invert")
        p.add_argument("--method", choices=("auto", "direct", "shadow"), default="auto")
        p.set_defaults(fn=fn)
        return p

    instance_help = "also write per-instance rows here"
    p = sweep_like("sweep-beta", cmd_sweep_beta, "<T> vs beta", "10", "0:3.5:0.25")
    p.add_argument("--instances", default=None, help=instance_help)
    p = sweep_like("sweep-size", cmd_sweep_size, "p_soln scaling vs N", "6,8,10,12,14,16", "1,2")
    p.add_argument("--instances", default=None, help=instance_help)
    p = sweep_like("sweep-3sat", cmd_sweep_3sat, "random 3SAT vs c/n", "5", "0:8:0.5")
    p.add_argument("--instances", default=None, help=instance_help)
    p.add_argument("--trace-levels", action="store_true")
    p = sweep_like("variance", cmd_variance, "std of T vs beta per policy", "10", "0:3.5:0.25")
    p.add_argument("--policies", default="invert,random")
    sweep_like("sweep-backtrack", cmd_sweep_backtrack, "backtrack cost vs beta", "10", "0:3.5:0.25")

    p = sub.add_parser("theory", help="solubility transition estimates")
    _common(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--L", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--b", type=float)
    p.set_defaults(fn=cmd_theory)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.fn(args)
        if args.command != "gen" or not args.out:
            _emit(text, args.out)
    except SystemExit:
        raise
    except Exception as exc:  # reported on stderr with nonzero exit
        print(f"qlattice {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
