#!/usr/bin/env python3
"""Write the data behind each figure-style experiment as CSV files.

Usage: python3 scripts/reproduce_figures.py --out results/ [--quick] [--workers 4]

--quick shrinks sample counts so the whole set runs in about a minute.
"""

from __future__ import annotations

import argparse
import csv
import math
from dataclasses import asdict
from pathlib import Path

from qlattice.coefficients import scaled_b, solve_coefficients
from qlattice.harness import (
    SweepConfig,
    format_table,
    sweep_3sat,
    sweep_backtrack,
    sweep_beta,
    sweep_size,
    variance_curve,
)
from qlattice.problems import generate_3sat, make_problem
from qlattice.simulator import PhasePolicy, run_ideal_map, run_trial


def feasible_betas(N: int, step: float = 0.25, top: float = 6.0) -> list[float]:
    eligible = math.comb(N, 2) - math.comb(N // 2, 2)
    return [b for b in (step * k for k in range(int(top / step) + 1)) if round(b * N) <= eligible]


def write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    S = 20 if args.quick else 1000
    common = dict(seed=args.seed, workers=args.workers)

    # scaled coefficients b_k per level
    rows = []
    for i in range(0, 5):
        c = solve_coefficients(10, i)
        rows += [{"N": 10, "i": i, "k": k, "b_k": b} for k, b in enumerate(scaled_b(c))]
    write(out / "scaled_coefficients.csv", format_table(rows))

    # backtracking cost vs beta
    pts = sweep_backtrack(SweepConfig(sizes=(10,), params=feasible_betas(10), samples=S, **common))
    write(out / "backtrack_vs_beta.csv", format_table([asdict(p) for p in pts]))

    # <T> vs beta for both policies, and its spread
    for N in (6, 8, 10):
        cfg = SweepConfig(sizes=(N,), params=feasible_betas(N), samples=S, **common)
        res = variance_curve(cfg)
        write(out / f"T_vs_beta_N{N}.csv", format_table(res.points))

    # scaling with N at fixed beta
    sizes = (6, 8, 10, 12) if args.quick else (6, 8, 10, 12, 14, 16)
    n_size = max(S // 10, 10)
    res = sweep_size(SweepConfig(sizes=sizes, params=(1.0, 2.0), samples=n_size, **common))
    # beta=4 needs N >= 12 to leave enough pairs outside the planted solution
    res4 = sweep_size(SweepConfig(sizes=[N for N in sizes if N >= 12], params=(4.0,), samples=n_size, **common))
    write(out / "p_soln_vs_N.csv", format_table(res.points + res4.points))

    # random 3SAT vs c/n
    ratios = [0.5 * k for k in range(17)]
    for n in ((5,) if args.quick else (5, 8)):
        cfg = SweepConfig(family="sat3", sizes=(n,), params=ratios, samples=max(S // 10, 5), trace_levels=True, **common)
        write(out / f"sat3_n{n}.csv", format_table(sweep_3sat(cfg).points))

    # per-level goods probability with no clauses
    rows = []
    for n in range(5, 11 if args.quick else 13):
        tr = run_trial(generate_3sat(n, 0, 0), PhasePolicy("invert")).goods_prob_by_level
        rows += [{"n": n, "level": 3 + j, "goods_prob": v} for j, v in enumerate(tr)]
    write(out / "sat3_goods_by_level.csv", format_table(rows))

    # idealised superset map: nogood amplitude growth
    N = 12
    p = make_problem(N, 6, 2, [[a, b] for b in range(1, N + 1) for a in range(1, b)])
    recs = [run_ideal_map(p, s) for s in range(100 if args.quick else 1000)]
    rows, prev = [], None
    for j in range(2, 7):
        m = sum(r.nogood_mean[j] for r in recs) / len(recs)
        ratio = m / prev if prev else ""
        rows.append({"level": j, "mean_nogood_magnitude": m, "growth_ratio": ratio, "sqrt_j": math.sqrt(j)})
        prev = m
    write(out / "ideal_map_growth.csv", format_table(rows))


if __name__ == "__main__":
    main()
