"""Canonical symplectic linear algebra on phase space R^2n and product space R^4n.

All residuals use the max-abs-entry norm so tolerances read directly as
entrywise errors.
"""

from __future__ import annotations

import numpy as np

from src.config import DEFAULT_TOL

from .errors import InvalidDimensionError


def as_square_matrix(matrix, name: str = "matrix") -> np.ndarray:
    """
    Convert input to a float64 square matrix and validate it.

    Args:
        matrix: Array-like with two equal dimensions
        name: Label used in error messages

    Returns:
        numpy array of dtype float64

    Raises:
        InvalidDimensionError: If the input is not a non-empty square matrix
        ValueError: If any entry is NaN or infinite
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidDimensionError(
            f"{name} must be a non-empty square matrix, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def max_norm(matrix) -> float:
    """Largest absolute entry of a matrix or vector (0.0 when empty)."""
    arr = np.asarray(matrix, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def _check_dof(n: int) -> None:
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"degrees of freedom n must be a positive integer, got {n}")


def _even_half(size: int, name: str) -> int:
    if size % 2 != 0:
        raise InvalidDimensionError(f"{name} must have even size, got {size}")
    return size // 2


def canonical_j0(n: int) -> np.ndarray:
    """
    Canonical symplectic matrix J0 = [[0, I], [-I, 0]] on R^2n.

    Args:
        n: Degrees of freedom

    Returns:
        2n x 2n matrix

    Example:
        >>> canonical_j0(1)
        array([[ 0.,  1.],
               [-1.,  0.]])
    """
    _check_dof(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def canonical_jtilde(n: int) -> np.ndarray:
    """
    Complex structure of the product space, J~ = diag(J0, -J0), on R^4n.

    The sign flip on the second copy encodes omega_minus = pi1*omega - pi2*omega.
    """
    j0 = canonical_j0(n)
    zero = np.zeros_like(j0)
    return np.block([[j0, zero], [zero, -j0]])


def is_hamiltonian_matrix(b, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """
    Test whether b^T J0 + J0 b = 0, i.e. whether J0 b is symmetric.

    Args:
        b: 2n x 2n matrix
        tol: Acceptance threshold on the max-norm residual

    Returns:
        (verdict, residual)
    """
    b = as_square_matrix(b, "b")
    n = _even_half(b.shape[0], "b")
    j0 = canonical_j0(n)
    residual = max_norm(b.T @ j0 + j0 @ b)
    return residual <= tol, residual


def is_symplectic_matrix(m, j, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """
    Test whether m^T j m = j.

    Args:
        m: Square matrix under test
        j: Structure matrix of the same even size
        tol: Acceptance threshold on the max-norm residual

    Returns:
        (verdict, residual)
    """
    m = as_square_matrix(m, "M")
    j = as_square_matrix(j, "J")
    if m.shape != j.shape:
        raise InvalidDimensionError(f"M has shape {m.shape} but J has shape {j.shape}")
    _even_half(m.shape[0], "M")
    residual = max_norm(m.T @ j @ m - j)
    return residual <= tol, residual


def is_symplectic_rotation(r, n: int, tol: float = DEFAULT_TOL) -> tuple[bool, float, float]:
    """
    Test whether r is both orthogonal and symplectic for J~ on R^4n.

    Args:
        r: 4n x 4n matrix
        n: Degrees of freedom per copy
        tol: Acceptance threshold applied to both residuals

    Returns:
        (verdict, orthogonality_residual, symplectic_residual)
    """
    r = as_square_matrix(r, "R")
    _check_dof(n)
    if r.shape[0] != 4 * n:
        raise InvalidDimensionError(f"R must be {4 * n}x{4 * n} for n={n}, got {r.shape}")
    jt = canonical_jtilde(n)
    orth = max_norm(r.T @ r - np.eye(4 * n))
    symp = max_norm(r.T @ jt @ r - jt)
    return (orth <= tol and symp <= tol), orth, symp
