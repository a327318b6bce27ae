from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qlattice.baselines import backtrack_cost, random_assignment_p, random_selection_p
from qlattice.lattice import ItemSet, binomial
from qlattice.problems import (
    enumerate_solutions,
    generate_3sat,
    generate_soluble_3sat,
    generate_unstructured,
    make_problem,
    three_item_example,
)


def test_three_item_trace():
    s = backtrack_cost(three_item_example())
    # {}, {1}, {1,2}
    assert s.nodes_visited == 3 and s.found_solution and s.solution == ItemSet.of(1, 2)


@pytest.mark.parametrize("N", [4, 6, 10, 16])
def test_unconstrained_is_backtrack_free(N):
    s = backtrack_cost(generate_unstructured(N, 0, seed=1))
    assert s.nodes_visited == N // 2 + 1 == s.consistent_nodes


def test_pruned_nodes_are_counted():
    # {1,2} is nogood: {} {1} {1,2}x {1,3} -> 4 tested, 3 consistent
    s = backtrack_cost(make_problem(4, 2, 0, [[1, 2]]))
    assert (s.nodes_visited, s.consistent_nodes) == (4, 3)
    assert s.solution == ItemSet.of(1, 3)


def test_exhausted_tree():
    p = make_problem(4, 2, 0, [[1], [2], [3]])
    s = backtrack_cost(p)
    assert not s.found_solution and s.solution is None
    assert enumerate_solutions(p) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(0, 60), st.integers(0, 10**6))
def test_found_solution_agrees_with_enumeration(n, c, seed):
    c = min(c, 8 * binomial(n, 3))
    from qlattice.problems import InsolubleInstance

    try:
        p = generate_3sat(max(n, 3), c, seed)
    except InsolubleInstance:
        return
    s = backtrack_cost(p)
    assert s.found_solution == bool(enumerate_solutions(p))
    assert s.nodes_visited >= p.L + 1
    assert s.solution in enumerate_solutions(p)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([6, 8, 10, 12]), st.floats(0, 2), st.integers(0, 10**6))
def test_backtrack_deterministic_and_bounded(N, beta, seed):
    p = generate_unstructured(N, beta, seed, planted="random")
    a, b = backtrack_cost(p), backtrack_cost(p)
    assert a == b and a.found_solution
    assert a.nodes_visited >= p.L + 1
    assert a.consistent_nodes <= a.nodes_visited


def test_random_selection_examples():
    assert random_selection_p(three_item_example()) == pytest.approx(1 / 3, abs=1e-15)
    assert random_selection_p(generate_unstructured(10, 0, 0)) == 1.0
    assert random_selection_p(generate_3sat(5, 0, 0)) == float(Fraction(32, 252))


def test_random_assignment_examples():
    assert random_assignment_p(generate_3sat(5, 0, 0)) == 1.0
    assert random_assignment_p(generate_3sat(3, 1, 7)) == 7 / 8
    with pytest.raises(ValueError):
        random_assignment_p(generate_unstructured(6, 1, 0))


def test_random_assignment_brute_force():
    import itertools

    from qlattice.problems import assignment_set, is_nogood

    for seed in range(5):
        try:
            p = generate_3sat(5, 21, seed)
        except Exception:
            continue
        sat = sum(
            not is_nogood(p, assignment_set(v)) for v in itertools.product([True, False], repeat=5)
        )
        assert random_assignment_p(p) == sat / 32


@pytest.mark.parametrize("n,c", [(3, 4), (4, 10), (5, 15), (6, 20)])
def test_selection_and_assignment_share_numerator(n, c):
    p = generate_soluble_3sat(n, c, 3)[0]
    lhs = random_assignment_p(p) * 2**n
    rhs = random_selection_p(p) * binomial(2 * n, n)
    assert lhs == pytest.approx(rhs, rel=1e-14)
