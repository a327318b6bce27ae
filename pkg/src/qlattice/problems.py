"""Problem instances expressed as nogoods on the subset lattice.

Two ensembles are provided: unstructured problems (random size-2 nogoods that
avoid a prespecified solution) and random 3SAT, where each variable ``v``
becomes items ``2v - 1`` (true) and ``2v`` (false).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .lattice import MAX_ITEMS, ItemSet, LevelIndex, binomial, level_masks, unrank


class ProblemError(ValueError):
    pass


class InsolubleInstance(ProblemError):
    """A generated 3SAT instance has no satisfying assignment."""


@dataclass(frozen=True)
class Problem:
    kind: str  # "unstructured" | "sat3" | "custom"
    N: int
    L: int
    K: int
    nogoods: tuple[ItemSet, ...]
    seed: Optional[int] = None
    n: Optional[int] = None  # sat3 variable count
    c: Optional[int] = None  # sat3 clause count
    m: Optional[int] = None  # unstructured constraint count
    beta: Optional[float] = None
    planted: Optional[ItemSet] = None  # protected solution of the unstructured ensemble

    def __post_init__(self):
        if not 1 <= self.N <= MAX_ITEMS:
            raise ProblemError(f"N={self.N} outside 1..{MAX_ITEMS}")
        if not 0 <= self.K <= self.L <= self.N:
            raise ProblemError(f"need 0 <= K <= L <= N, got K={self.K}, L={self.L}, N={self.N}")
        if self.L > math.ceil(self.N / 2):
            raise ProblemError(f"L={self.L} exceeds ceil(N/2) for N={self.N}")
        full = (1 << self.N) - 1
        for g in self.nogoods:
            if g.bits & ~full:
                raise ProblemError(f"nogood {g} has items beyond N={self.N}")
            if not 1 <= g.size <= self.L:
                raise ProblemError(f"nogood {g} must have size 1..L")

    @cached_property
    def nogood_bits(self) -> np.ndarray:
        return np.array([g.bits for g in self.nogoods], dtype=np.int64)

    def nogood_mask(self, masks: np.ndarray) -> np.ndarray:
        """Vectorised consistency test: True where a set contains some nogood."""
        masks = np.asarray(masks, dtype=np.int64)
        bad = np.zeros(masks.shape, dtype=bool)
        for g in self.nogood_bits:
            bad |= (masks & g) == g
        return bad

    def good_masks(self, level: int) -> np.ndarray:
        masks = level_masks(self.N, level)
        return masks[~self.nogood_mask(masks)]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "N": self.N, "L": self.L, "K": self.K, "seed": self.seed}
        for key in ("n", "c", "m", "beta"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        if self.planted is not None:
            d["planted"] = list(self.planted.items)
        d["nogoods"] = [list(g.items) for g in self.nogoods]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Problem":
        return cls(
            kind=d["kind"],
            N=int(d["N"]),
            L=int(d["L"]),
            K=int(d["K"]),
            nogoods=_canonical(ItemSet.from_items(g) for g in d["nogoods"]),
            seed=d.get("seed"),
            n=d.get("n"),
            c=d.get("c"),
            m=d.get("m"),
            beta=d.get("beta"),
            planted=ItemSet.from_items(d["planted"]) if d.get("planted") is not None else None,
        )


def _canonical(nogoods: Iterable[ItemSet]) -> tuple[ItemSet, ...]:
    return tuple(sorted(set(nogoods), key=lambda g: (g.size, g.items)))


def make_problem(N: int, L: int, K: int, nogoods: Iterable[Iterable[int]], kind: str = "custom") -> Problem:
    return Problem(kind, N, L, K, _canonical(ItemSet.from_items(g) for g in nogoods))


def save_problem(p: Problem, path) -> None:
    Path(path).write_text(json.dumps(p.to_dict(), indent=1) + "\n")


def load_problem(path) -> Problem:
    return Problem.from_dict(json.loads(Path(path).read_text()))


def is_nogood(p: Problem, s: ItemSet) -> bool:
    return any(g.bits & s.bits == g.bits for g in p.nogoods)


def enumerate_solutions(p: Problem) -> list[ItemSet]:
    """All good level-L sets, by depth-first consistent extension."""
    nogoods = [g.bits for g in p.nogoods]
    out: list[int] = []

    def extend(bits: int, size: int, next_item: int) -> None:
        if size == p.L:
            out.append(bits)
            return
        # leave room for the remaining L - size items
        for item in range(next_item, p.N - (p.L - size) + 1):
            child = bits | (1 << item)
            if any(child & g == g for g in nogoods):
                continue
            extend(child, size + 1, item + 1)

    if not any(g == 0 for g in nogoods):
        extend(0, 0, 0)
    return [ItemSet(b) for b in sorted(out)]


# -- unstructured ensemble -------------------------------------------------


def constraint_count(N: int, beta: float) -> int:
    """m = beta * N rounded half up."""
    return int(math.floor(beta * N + 0.5 + 1e-9))


def generate_unstructured(N: int, beta: float, seed: int, planted=None) -> Problem:
    """Random size-2 nogoods avoiding a prespecified solution.

    The protected solution is {1..N/2} by default.  ``planted="random"`` draws
    it uniformly from the same seeded stream instead, which matters only for
    order-dependent methods such as chronological backtracking.
    """
    if N < 4 or N % 2:
        raise ProblemError(f"unstructured problems need even N >= 4, got {N}")
    if beta < 0:
        raise ProblemError("beta must be nonnegative")
    L = N // 2
    m = constraint_count(N, beta)
    rng = np.random.default_rng(seed)
    if planted is None:
        sol = ItemSet((1 << L) - 1)
    elif planted == "random":
        sol = ItemSet.from_items(int(x) + 1 for x in rng.permutation(N)[:L])
    else:
        sol = planted if isinstance(planted, ItemSet) else ItemSet.from_items(planted)
        if sol.size != L or sol.max_item() > N:
            raise ProblemError(f"planted solution {sol} must be an {L}-subset of 1..{N}")
    eligible = [
        (x, y) for y in range(1, N + 1) for x in range(1, y) if not (x in sol and y in sol)
    ]
    if m > len(eligible):
        raise ProblemError(f"m={m} exceeds the {len(eligible)} pairs outside the solution")
    order = rng.permutation(len(eligible))[:m]
    nogoods = _canonical(ItemSet.of(*eligible[j]) for j in order)
    return Problem("unstructured", N, L, 2, nogoods, seed=seed, m=m, beta=beta, planted=sol)


# -- random 3SAT -----------------------------------------------------------


def sat_item(var: int, value: bool) -> int:
    return 2 * var - 1 if value else 2 * var


def clause_nogood(clause: Iterable[int]) -> ItemSet:
    """The triple of variable-value pairs falsifying a clause of signed literals."""
    return ItemSet.from_items(sat_item(abs(lit), lit < 0) for lit in clause)


def necessary_nogoods(n: int) -> list[ItemSet]:
    return [ItemSet.of(2 * v - 1, 2 * v) for v in range(1, n + 1)]


def max_clauses(n: int) -> int:
    return binomial(n, 3) * 8


def _decode_clause(index: int, n: int) -> tuple[int, int, int]:
    triple, signs = divmod(index, 8)
    vars_ = unrank(LevelIndex(3, triple), n).items
    return tuple(v if (signs >> b) & 1 else -v for b, v in enumerate(vars_))


def random_clauses(n: int, c: int, rng: np.random.Generator) -> list[tuple[int, int, int]]:
    idx = rng.choice(max_clauses(n), size=c, replace=False)
    return [_decode_clause(int(j), n) for j in idx]


def generate_3sat(n: int, c: int, seed: int) -> Problem:
    """Random 3SAT with ``c`` distinct clauses; raises InsolubleInstance if unsatisfiable."""
    if n < 3:
        raise ProblemError("3SAT needs n >= 3")
    if not 0 <= c <= max_clauses(n):
        raise ProblemError(f"c={c} outside 0..{max_clauses(n)}")
    rng = np.random.default_rng(seed)
    clauses = random_clauses(n, c, rng)
    nogoods = _canonical(necessary_nogoods(n) + [clause_nogood(cl) for cl in clauses])
    p = Problem("sat3", 2 * n, n, 3, nogoods, seed=seed, n=n, c=c)
    from .baselines import backtrack_cost

    if not backtrack_cost(p).found_solution:
        raise InsolubleInstance(f"n={n}, c={c}, seed={seed} has no solution")
    return p


def generate_soluble_3sat(n: int, c: int, seed: int, max_tries: int = 10_000) -> tuple[Problem, int]:
    """Retry with seed, seed+1, ... until soluble; returns the problem and the rejection count."""
    for k in range(max_tries):
        try:
            return generate_3sat(n, c, seed + k), k
        except InsolubleInstance:
            continue
    raise ProblemError(f"no soluble instance for n={n}, c={c} in {max_tries} tries")


def assignment_set(values: Iterable[bool]) -> ItemSet:
    return ItemSet.from_items(sat_item(v, val) for v, val in enumerate(values, start=1))


# -- worked examples -------------------------------------------------------


def three_item_example() -> Problem:
    """N=3, start at the empty set, item 3 and its supersets nogood."""
    return make_problem(3, 2, 0, [[3]], kind="custom")


def four_item_example() -> Problem:
    """N=4, L=2 with items 1 and 3 ruled out; only {2,4} is good."""
    return make_problem(4, 2, 0, [[1], [3]], kind="custom")


# -- theory ----------------------------------------------------------------


@dataclass(frozen=True)
class TheoryReport:
    rho_L: float
    expected_solutions: float
    beta_crit: float
    beta_poly: float


def entropy(x: float) -> float:
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log(x) - (1 - x) * math.log(1 - x)


def beta_crit(b: float) -> float:
    return entropy(1 / b) / -math.log(1 - 1 / b**2)


def beta_poly(b: float) -> float:
    return (b * b - 1) / (2 * b) * math.log(b - 1)


def solution_probability(N: int, L: int, m: int) -> Fraction:
    pairs = binomial(N, 2)
    if m > pairs:
        raise ProblemError(f"m={m} exceeds C(N,2)={pairs}")
    return Fraction(binomial(pairs - binomial(L, 2), m), binomial(pairs, m))


def theory(N: int, L: int, m: int, b: float) -> TheoryReport:
    if b <= 1:
        raise ProblemError("b must exceed 1")
    rho = solution_probability(N, L, m)
    return TheoryReport(
        rho_L=float(rho),
        expected_solutions=float(binomial(N, L) * rho),
        beta_crit=beta_crit(b),
        beta_poly=beta_poly(b),
    )
