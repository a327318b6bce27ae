"""Seeded batch experiments over problem ensembles.

Every work item is a (size, parameter, instance index) triple whose seed is
derived from the base seed and those values alone, so any row can be
regenerated in isolation and results do not depend on worker scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .baselines import backtrack_cost, random_assignment_p, random_selection_p
from .problems import (
    ProblemError,
    constraint_count,
    enumerate_solutions,
    generate_soluble_3sat,
    generate_unstructured,
    max_clauses,
)
from .simulator import PhasePolicy, run_trial

DEFAULT_BETAS = tuple(0.25 * k for k in range(25))
DEFAULT_RATIOS = tuple(0.5 * k for k in range(17))
DEFAULT_SIZES = (6, 8, 10, 12, 14, 16)


@dataclass
class SweepConfig:
    family: str = "unstructured"  # or "sat3"
    sizes: Sequence[int] = (10,)  # N for unstructured, n for sat3
    params: Sequence[float] = DEFAULT_BETAS  # beta, or c/n for sat3
    samples: int = 100
    trials: int = 10  # per instance, random policy only
    policy: str = "invert"
    seed: int = 0
    method: str = "auto"
    workers: int = 1
    p_floor: float = 1e-12
    trace_levels: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.sizes or not self.params:
            raise ValueError("parameter grids must be nonempty")
        if self.family not in ("unstructured", "sat3"):
            raise ValueError(f"unknown family {self.family!r}")


def derive_seed(*parts: int) -> int:
    """Stable 63-bit seed from a tuple of integers."""
    state = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts]).generate_state(2)
    return int((int(state[0]) << 31) ^ int(state[1])) & ((1 << 63) - 1)


def _param_key(x: float) -> int:
    return int(round(x * 1_000_000))


def instance_seed(base: int, size: int, param: float, index: int) -> int:
    return derive_seed(base, size, _param_key(param), index)


@dataclass
class InstanceRecord:
    family: str
    size: int
    param: float
    policy: str
    index: int
    instance_seed: int
    N: int
    constraints: int  # m or c
    n_solutions: int
    p_soln: float
    T: float
    clipped: bool
    rand_select_p: float
    rand_assign_p: Optional[float] = None
    rejections: int = 0
    norm_residual: float = 0.0
    goods_trace: Optional[list] = None


@dataclass
class PointStats:
    family: str
    size: int
    param: float
    policy: str
    samples: int
    trials: int
    seed: int
    mean_T: float
    std_T: Optional[float]
    stderr_T: Optional[float]
    mean_p: float
    mean_rand_select_p: float
    ratio_select: float  # mean_p / mean_rand_select_p
    mean_ratio_select: float  # mean over instances of p / rand_select_p
    mean_rand_assign_p: Optional[float] = None
    ratio_assign: Optional[float] = None
    clipped: int = 0
    rejections: int = 0
    goods_trace: Optional[list] = None


def _make_problem(cfg: SweepConfig, size: int, param: float, seed: int):
    if cfg.family == "unstructured":
        return generate_unstructured(size, param, seed), 0
    c = int(math.floor(param * size + 0.5))
    return generate_soluble_3sat(size, c, seed)


def run_instance(cfg: SweepConfig, size: int, param: float, index: int) -> InstanceRecord:
    seed = instance_seed(cfg.seed, size, param, index)
    try:
        p, rejections = _make_problem(cfg, size, param, seed)
    except ProblemError as exc:
        raise SweepError(f"grid point (size={size}, param={param}), instance {index}: {exc}") from exc
    sols = enumerate_solutions(p)
    policy = PhasePolicy(cfg.policy)
    n_trials = cfg.trials if policy.variant == "random" else 1
    results = [
        run_trial(p, policy, seed=derive_seed(seed, t), method=cfg.method, solutions=sols)
        for t in range(n_trials)
    ]
    p_soln = float(np.mean([r.p_soln for r in results]))
    clipped = p_soln < cfg.p_floor
    trace = None
    if cfg.trace_levels:
        trace = [float(x) for x in np.mean([r.goods_prob_by_level for r in results], axis=0)]
    return InstanceRecord(
        family=cfg.family,
        size=size,
        param=param,
        policy=cfg.policy,
        index=index,
        instance_seed=p.seed,
        N=p.N,
        constraints=p.m if cfg.family == "unstructured" else p.c,
        n_solutions=len(sols),
        p_soln=p_soln,
        T=1.0 / min(max(p_soln, cfg.p_floor), 1.0),
        clipped=clipped,
        rand_select_p=random_selection_p(p, sols),
        rand_assign_p=random_assignment_p(p, sols) if p.kind == "sat3" else None,
        rejections=rejections,
        norm_residual=max(r.norm_residual for r in results),
        goods_trace=trace,
    )


class SweepError(ValueError):
    pass


def _check_point(cfg: SweepConfig, size: int, param: float) -> None:
    try:
        if cfg.family == "unstructured":
            generate_unstructured(size, param, 0)
        else:
            c = int(math.floor(param * size + 0.5))
            if not 0 <= c <= max_clauses(size):
                raise ProblemError(f"c={c} outside 0..{max_clauses(size)}")
    except ProblemError as exc:
        raise SweepError(f"grid point (size={size}, param={param}): {exc}") from exc


def _run_item(args):
    cfg, size, param, index = args
    return run_instance(cfg, size, param, index)


def _map(fn, items: list, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def aggregate(cfg: SweepConfig, records: Sequence[InstanceRecord]) -> PointStats:
    r0 = records[0]
    Ts = [r.T for r in records]
    ps = [r.p_soln for r in records]
    sel = [r.rand_select_p for r in records]
    n = len(records)
    std = statistics.stdev(Ts) if n > 1 else None
    mean_p = statistics.fmean(ps)
    mean_sel = statistics.fmean(sel)
    stats = PointStats(
        family=r0.family,
        size=r0.size,
        param=r0.param,
        policy=r0.policy,
        samples=n,
        trials=cfg.trials if r0.policy == "random" else 1,
        seed=cfg.seed,
        mean_T=statistics.fmean(Ts),
        std_T=std,
        stderr_T=std / math.sqrt(n) if std is not None else None,
        mean_p=mean_p,
        mean_rand_select_p=mean_sel,
        ratio_select=mean_p / mean_sel,
        mean_ratio_select=statistics.fmean(p / s for p, s in zip(ps, sel)),
        clipped=sum(r.clipped for r in records),
        rejections=sum(r.rejections for r in records),
    )
    if r0.rand_assign_p is not None:
        stats.mean_rand_assign_p = statistics.fmean(r.rand_assign_p for r in records)
        stats.ratio_assign = mean_p / stats.mean_rand_assign_p
    if r0.goods_trace is not None:
        stats.goods_trace = [float(x) for x in np.mean([r.goods_trace for r in records], axis=0)]
    return stats


@dataclass
class SweepResult:
    points: list[PointStats] = field(default_factory=list)
    instances: list[InstanceRecord] = field(default_factory=list)


def _sweep(cfg: SweepConfig, grid: Iterable[tuple[int, float]]) -> SweepResult:
    grid = list(grid)
    for size, param in grid:
        _check_point(cfg, size, param)
    items = [(cfg, size, param, k) for size, param in grid for k in range(cfg.samples)]
    records = _map(_run_item, items, cfg.workers)
    out = SweepResult(instances=records)
    for g in range(len(grid)):
        out.points.append(aggregate(cfg, records[g * cfg.samples : (g + 1) * cfg.samples]))
    return out


def sweep_beta(cfg: SweepConfig) -> SweepResult:
    """Expected repetitions vs constraint density, one curve per N."""
    if cfg.family != "unstructured":
        raise ValueError("sweep_beta needs the unstructured family")
    return _sweep(cfg, ((N, b) for N in cfg.sizes for b in cfg.params))


def sweep_size(cfg: SweepConfig) -> SweepResult:
    """Solution probability and enhancement over random selection vs N, one curve per beta."""
    if cfg.family != "unstructured":
        raise ValueError("sweep_size needs the unstructured family")
    return _sweep(cfg, ((N, b) for b in cfg.params for N in cfg.sizes))


def sweep_3sat(cfg: SweepConfig) -> SweepResult:
    if cfg.family != "sat3":
        raise ValueError("sweep_3sat needs the sat3 family")
    return _sweep(cfg, ((n, r) for n in cfg.sizes for r in cfg.params))


def variance_curve(cfg: SweepConfig, policies: Sequence[str] = ("invert", "random")) -> SweepResult:
    """Spread of T vs beta for each phase policy."""
    out = SweepResult()
    for pol in policies:
        sub = sweep_beta(SweepConfig(**{**asdict(cfg), "policy": pol}))
        out.points += sub.points
        out.instances += sub.instances
    return out


@dataclass
class BacktrackPoint:
    N: int
    beta: float
    m: int
    samples: int
    seed: int
    mean_nodes: float
    std_nodes: Optional[float]
    stderr_nodes: Optional[float]
    mean_consistent_nodes: float
    solved: int


def _backtrack_item(args):
    base, N, beta, k = args
    # a fixed planted solution {1..L} would be the first path tried
    p = generate_unstructured(N, beta, instance_seed(base, N, beta, k), planted="random")
    return backtrack_cost(p)


def sweep_backtrack(cfg: SweepConfig) -> list[BacktrackPoint]:
    """Classical chronological backtracking cost vs beta."""
    points = []
    for N in cfg.sizes:
        for beta in cfg.params:
            _check_point(cfg, N, beta)
            items = [(cfg.seed, N, beta, k) for k in range(cfg.samples)]
            stats = _map(_backtrack_item, items, cfg.workers)
            nodes = [s.nodes_visited for s in stats]
            std = statistics.stdev(nodes) if len(nodes) > 1 else None
            points.append(
                BacktrackPoint(
                    N=N,
                    beta=beta,
                    m=constraint_count(N, beta),
                    samples=len(nodes),
                    seed=cfg.seed,
                    mean_nodes=statistics.fmean(nodes),
                    std_nodes=std,
                    stderr_nodes=std / math.sqrt(len(nodes)) if std is not None else None,
                    mean_consistent_nodes=statistics.fmean(s.consistent_nodes for s in stats),
                    solved=sum(s.found_solution for s in stats),
                )
            )
    return points


# -- output ----------------------------------------------------------------


def flatten(row) -> dict:
    d = asdict(row) if not isinstance(row, dict) else dict(row)
    trace = d.pop("goods_trace", None)
    if trace is not None:
        start = 3 if d.get("family") == "sat3" else 2
        for j, v in enumerate(trace):
            d[f"goods_L{start + j}"] = v
    return d


def format_table(rows: Sequence, fmt: str = "csv") -> str:
    dicts = [flatten(r) for r in rows]
    if fmt == "json":
        return json.dumps(dicts, indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    fields: list[str] = []
    for d in dicts:
        fields += [k for k in d if k not in fields]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, restval="", lineterminator="\n")
    w.writeheader()
    for d in dicts:
        w.writerow({k: ("" if v is None else v) for k, v in d.items()})
    return buf.getvalue()
