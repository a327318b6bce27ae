"""Classical comparison methods."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lattice import ItemSet, binomial


@dataclass(frozen=True)
class BacktrackStats:
    nodes_visited: int  # every generated and tested set, root and pruned sets included
    consistent_nodes: int  # tested sets that were good
    found_solution: bool
    solution: Optional[ItemSet] = None


def backtrack_cost(p) -> BacktrackStats:
    """Chronological backtracking from the empty set, extending by increasing item index."""
    nogoods = [g.bits for g in p.nogoods]
    visited = 0
    consistent = 0

    def good(bits: int) -> bool:
        return not any(bits & g == g for g in nogoods)

    def search(bits: int, size: int, next_item: int) -> Optional[int]:
        nonlocal visited, consistent
        if size == p.L:
            return bits
        for item in range(next_item, p.N):
            child = bits | (1 << item)
            visited += 1
            if not good(child):
                continue
            consistent += 1
            found = search(child, size + 1, item + 1)
            if found is not None:
                return found
        return None

    visited += 1
    if not good(0):
        return BacktrackStats(visited, 0, False)
    consistent += 1
    found = search(0, 0, 0)
    if found is None:
        return BacktrackStats(visited, consistent, False)
    return BacktrackStats(visited, consistent, True, ItemSet(found))


def random_selection_p(p, solutions=None) -> float:
    """Chance that a uniformly random level-L set is a solution."""
    from .problems import enumerate_solutions

    if solutions is None:
        solutions = enumerate_solutions(p)
    return len(solutions) / binomial(p.N, p.L)


def random_assignment_p(p, solutions=None) -> float:
    """Chance that a uniformly random complete truth assignment satisfies a 3SAT problem."""
    if p.kind != "sat3":
        raise ValueError(f"random_assignment_p needs a sat3 problem, got {p.kind!r}")
    from .problems import enumerate_solutions

    if solutions is None:
        solutions = enumerate_solutions(p)
    return len(solutions) / 2 ** p.n
