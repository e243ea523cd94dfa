from itertools import permutations

import numpy as np
import pytest

from hilbertot.errors import InvalidInputError
from hilbertot.measures import make_rng
from hilbertot.ot import solve_assignment, squared_distances


def brute_force_cost(x, y):
    """Exhaustive minimum over all permutations (the independent oracle)."""
    n = x.shape[0]
    cost = squared_distances(x, y)
    perms = np.array(list(permutations(range(n))))
    totals = cost[np.arange(n)[None, :], perms].sum(axis=1)
    return totals.min() / n, perms[int(np.argmin(totals))]


def test_identity_instance():
    x = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    c = solve_assignment(x, x)
    assert c.cost == 0.0
    assert np.array_equal(c.as_permutation(), np.arange(3))


def test_sorted_matching_1d_example():
    x = np.array([[0.1], [0.9], [0.5]])
    y = np.array([[0.2], [0.8], [0.4]])
    c = solve_assignment(x, y)
    perm = c.as_permutation()
    # 0.1 -> 0.2, 0.9 -> 0.8, 0.5 -> 0.4
    assert np.array_equal(perm, np.array([0, 1, 2]))
    expected, _ = brute_force_cost(x, y)
    assert c.cost == pytest.approx(expected, rel=1e-12)


def test_matches_brute_force_oracle():
    rng = make_rng(2024)
    for trial in range(50):
        x = rng.standard_normal((7, 3))
        y = rng.standard_normal((7, 3))
        c = solve_assignment(x, y)
        expected, _ = brute_force_cost(x, y)
        assert c.cost == pytest.approx(expected, rel=1e-12), f"trial {trial}"


def test_1d_is_monotone_rearrangement():
    rng = make_rng(31)
    for _ in range(50):
        n = int(rng.integers(2, 8))
        x = rng.standard_normal((n, 1))
        y = rng.standard_normal((n, 1))
        c = solve_assignment(x, y)
        perm = c.as_permutation()
        xs = np.argsort(x[:, 0])
        ys = np.argsort(y[:, 0])
        assert np.array_equal(perm[xs], ys), "sorted points must pair in order"
        expected, _ = brute_force_cost(x, y)
        assert c.cost == pytest.approx(expected, rel=1e-12)


def test_translation_equivariance():
    rng = make_rng(63)
    x = rng.standard_normal((6, 2))
    y = rng.standard_normal((6, 2))
    shift = np.array([3.5, -1.25])
    base = solve_assignment(x, y)
    moved = solve_assignment(x + shift, y + shift)
    assert np.array_equal(base.as_permutation(), moved.as_permutation())
    assert moved.cost == pytest.approx(base.cost, abs=1e-9)


def test_size_mismatch_rejected():
    with pytest.raises(InvalidInputError):
        solve_assignment(np.zeros((3, 2)), np.zeros((4, 2)))


def test_duplicate_points_rejected():
    x = np.array([[0.0], [0.0], [1.0]])
    y = np.array([[0.5], [0.6], [0.7]])
    with pytest.raises(InvalidInputError):
        solve_assignment(x, y)
