"""Dense direct solver with constraint elimination."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vmsdg.linsolve import LinearSystem, SingularSystemError, solve


def test_matches_numpy_on_generic_system():
    rng = np.random.default_rng(7)
    matrix = rng.standard_normal((8, 8)) + 8.0 * np.eye(8)
    rhs = rng.standard_normal(8)
    sol = solve(LinearSystem(matrix, rhs))
    np.testing.assert_allclose(sol.values, np.linalg.solve(matrix, rhs), rtol=1e-12)
    assert sol.residual_norm <= 1e-12 * np.linalg.norm(rhs)
    assert sol.condition_estimate >= 1.0


def test_constraints_are_honored_exactly():
    rng = np.random.default_rng(11)
    matrix = rng.standard_normal((6, 6)) + 6.0 * np.eye(6)
    rhs = rng.standard_normal(6)
    sol = solve(LinearSystem(matrix, rhs, constraints=[(0, 2.5), (5, -1.0)]))
    assert sol.values[0] == 2.5
    assert sol.values[5] == -1.0
    # remaining rows of the original system hold with the pinned values
    residual = matrix @ sol.values - rhs
    np.testing.assert_allclose(residual[1:5], 0.0, atol=1e-12)


def test_fully_constrained_system():
    matrix = np.zeros((3, 3))  # singular, but every dof is pinned
    rhs = np.zeros(3)
    sol = solve(LinearSystem(matrix, rhs, constraints=[(0, 1.0), (1, 2.0), (2, 3.0)]))
    np.testing.assert_allclose(sol.values, [1.0, 2.0, 3.0])


def test_singular_matrix_raises():
    with pytest.raises(SingularSystemError):
        solve(LinearSystem(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0])))
    with pytest.raises(SingularSystemError):
        solve(LinearSystem(np.zeros((3, 3)), np.ones(3)))


def test_near_singular_pivot_raises():
    matrix = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-16]])
    with pytest.raises(SingularSystemError):
        solve(LinearSystem(matrix, np.array([1.0, 1.0])))


def test_shape_validation():
    with pytest.raises(ValueError):
        LinearSystem(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        LinearSystem(np.ones((2, 2)), np.ones(3))


def test_deterministic_bitwise():
    rng = np.random.default_rng(13)
    matrix = rng.standard_normal((10, 10)) + 10.0 * np.eye(10)
    rhs = rng.standard_normal(10)
    first = solve(LinearSystem(matrix.copy(), rhs.copy(), constraints=[(3, 0.5)]))
    second = solve(LinearSystem(matrix.copy(), rhs.copy(), constraints=[(3, 0.5)]))
    assert np.array_equal(first.values, second.values)
    assert first.residual_norm == second.residual_norm
    assert first.condition_estimate == second.condition_estimate


def test_inputs_are_not_mutated():
    matrix = np.array([[2.0, 1.0], [1.0, 3.0]])
    rhs = np.array([1.0, 2.0])
    matrix_copy, rhs_copy = matrix.copy(), rhs.copy()
    solve(LinearSystem(matrix, rhs, constraints=[(0, 1.0)]))
    assert np.array_equal(matrix, matrix_copy)
    assert np.array_equal(rhs, rhs_copy)


def test_identity_condition_estimate_is_one():
    sol = solve(LinearSystem(np.eye(4), np.arange(4.0)))
    assert sol.condition_estimate == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(sol.values, np.arange(4.0))


@settings(deadline=None, max_examples=40)
@given(
    n=st.integers(1, 9),
    seed=st.integers(0, 2**31 - 1),
)
def test_random_diagonally_dominant_systems(n, seed):
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((n, n)) + 2.0 * n * np.eye(n)
    rhs = rng.standard_normal(n)
    sol = solve(LinearSystem(matrix, rhs))
    np.testing.assert_allclose(matrix @ sol.values, rhs, atol=1e-9 * max(1.0, np.abs(rhs).max()))
    assert np.isfinite(sol.condition_estimate)
    assert sol.condition_estimate >= 1.0
