"""Tests for the canonical structure matrices and their predicates."""

import numpy as np
import pytest
from src.core.canonical import (
    canonical_j0,
    canonical_jtilde,
    is_hamiltonian_matrix,
    is_symplectic_matrix,
    is_symplectic_rotation,
    max_norm,
)
from src.core.errors import InvalidDimensionError

DOF = range(1, 9)


def random_symmetric(rng, size):
    x = rng.uniform(-1.0, 1.0, size=(size, size))
    return 0.5 * (x + x.T)


def random_symplectic(rng, n):
    """Product of an upper and a lower symplectic shear."""
    eye, zero = np.eye(n), np.zeros((n, n))
    upper = np.block([[eye, random_symmetric(rng, n)], [zero, eye]])
    lower = np.block([[eye, zero], [random_symmetric(rng, n), eye]])
    return upper @ lower


class TestCanonicalMatrices:
    def test_j0_one_degree_of_freedom(self):
        np.testing.assert_array_equal(canonical_j0(1), [[0.0, 1.0], [-1.0, 0.0]])

    @pytest.mark.parametrize("n", DOF)
    def test_j0_squares_to_minus_identity(self, n):
        j0 = canonical_j0(n)
        np.testing.assert_array_equal(j0 @ j0, -np.eye(2 * n))

    @pytest.mark.parametrize("n", DOF)
    def test_j0_antisymmetric_and_orthogonal(self, n):
        j0 = canonical_j0(n)
        np.testing.assert_array_equal(j0.T, -j0)
        np.testing.assert_array_equal(j0.T @ j0, np.eye(2 * n))
        np.testing.assert_array_equal(j0[:n, n:], np.eye(n))

    def test_jtilde_blocks(self):
        j0 = canonical_j0(1)
        expected = np.zeros((4, 4))
        expected[:2, :2] = j0
        expected[2:, 2:] = -j0
        np.testing.assert_array_equal(canonical_jtilde(1), expected)

    @pytest.mark.parametrize("n", DOF)
    def test_jtilde_properties(self, n):
        jt = canonical_jtilde(n)
        np.testing.assert_array_equal(jt.T, -jt)
        np.testing.assert_array_equal(jt @ jt, -np.eye(4 * n))
        np.testing.assert_array_equal(jt[2 * n :, 2 * n :], -canonical_j0(n))

    @pytest.mark.parametrize("factory", [canonical_j0, canonical_jtilde])
    def test_zero_dimension_rejected(self, factory):
        with pytest.raises(InvalidDimensionError):
            factory(0)


class TestHamiltonianMatrix:
    def test_euler_b_matrix_is_hamiltonian(self):
        ok, residual = is_hamiltonian_matrix(0.5 * np.diag([1.0, -1.0]))
        assert ok
        assert residual == 0.0

    def test_zero_matrix_is_hamiltonian(self):
        ok, _ = is_hamiltonian_matrix(np.zeros((4, 4)))
        assert ok

    def test_identity_is_not_hamiltonian(self):
        ok, residual = is_hamiltonian_matrix(np.eye(2))
        assert not ok
        assert residual == pytest.approx(2.0)

    def test_odd_size_rejected(self):
        with pytest.raises(InvalidDimensionError):
            is_hamiltonian_matrix(np.eye(3))

    @pytest.mark.parametrize("n", [1, 2, 5, 8])
    def test_invariant_under_symplectic_similarity(self, n):
        rng = np.random.default_rng(n)
        j0 = canonical_j0(n)
        for _ in range(20):
            s = random_symplectic(rng, n)
            assert is_symplectic_matrix(s, j0, tol=1e-10)[0]
            b = j0 @ random_symmetric(rng, 2 * n)
            assert is_hamiltonian_matrix(b)[0]
            ok, residual = is_hamiltonian_matrix(np.linalg.solve(s, b @ s), tol=1e-9)
            assert ok, residual

    @pytest.mark.parametrize("n", [1, 3])
    def test_non_hamiltonian_survives_similarity(self, n):
        rng = np.random.default_rng(10 + n)
        s = random_symplectic(rng, n)
        b = canonical_j0(n) @ random_symmetric(rng, 2 * n) + 0.3 * np.eye(2 * n)
        ok, residual = is_hamiltonian_matrix(np.linalg.solve(s, b @ s))
        assert not ok
        assert residual == pytest.approx(0.6, abs=1e-9)


class TestSymplecticMatrix:
    def test_identity(self):
        ok, residual = is_symplectic_matrix(np.eye(4), canonical_j0(2))
        assert ok
        assert residual == 0.0

    def test_j0_preserves_itself(self):
        j0 = canonical_j0(1)
        assert is_symplectic_matrix(j0, j0)[0]

    def test_stretch_fails_with_unit_residual(self):
        ok, residual = is_symplectic_matrix(np.diag([2.0, 1.0]), canonical_j0(1))
        assert not ok
        assert residual == pytest.approx(1.0)

    def test_size_mismatch(self):
        with pytest.raises(InvalidDimensionError):
            is_symplectic_matrix(np.eye(2), canonical_j0(2))


class TestSymplecticRotation:
    def test_identity(self):
        ok, orth, symp = is_symplectic_rotation(np.eye(4), 1)
        assert ok
        assert orth == 0.0 and symp == 0.0

    def test_stretch_is_not_orthogonal(self):
        ok, orth, _ = is_symplectic_rotation(np.diag([2.0, 1.0, 1.0, 1.0]), 1)
        assert not ok
        assert orth == pytest.approx(3.0)

    def test_wrong_size(self):
        with pytest.raises(InvalidDimensionError):
            is_symplectic_rotation(np.eye(4), 2)


def test_max_norm():
    assert max_norm([[1.0, -3.0], [2.0, 0.5]]) == 3.0
    assert max_norm(np.zeros(0)) == 0.0
