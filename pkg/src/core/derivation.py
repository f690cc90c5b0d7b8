"""The four-step method of Liouvillian forms for constant-coefficient forms.

Step 1 is the choice of form (see forms.py). The remaining steps are linear:

2. vertical space: the hat functions (q^, p^, Q^, P^)(Z) = A Z
3. tangent space: J~^T A, projected onto each copy and summed into
   rho(z0, zh) = P0 z0 + Ph zh
4. diagonal check: rho(z, z) = z, i.e. P0 + Ph = I

The scheme zh = z0 + h X_H(rho(z0, zh)) is classified symplectic when, in
addition, b = (Ph - P0)/2 is a Hamiltonian matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import null_space

from src.config import DEFAULT_TOL

from .canonical import as_square_matrix, canonical_jtilde, is_hamiltonian_matrix, max_norm
from .errors import InvalidDimensionError
from .forms import LiouvillianFormMatrix

SYMPLECTIC = "symplectic"
NON_SYMPLECTIC = "non_symplectic"
NULL_MAP = "null_map"
VERDICTS = (SYMPLECTIC, NON_SYMPLECTIC, NULL_MAP)


@dataclass(frozen=True, eq=False)
class ImplicitMapPair:
    """Linear implicit map rho(z0, zh) = P0 z0 + Ph zh."""

    n: int
    p0: np.ndarray
    ph: np.ndarray

    def __post_init__(self):
        size = 2 * self.n
        for name, block in (("P0", self.p0), ("Ph", self.ph)):
            if block.shape != (size, size):
                raise InvalidDimensionError(
                    f"{name} must be {size}x{size} for n={self.n}, got {block.shape}"
                )
            if not np.all(np.isfinite(block)):
                raise ValueError(f"{name} has non-finite entries")

    @classmethod
    def from_blocks(cls, p0, ph) -> ImplicitMapPair:
        """Build a pair from raw matrices, bypassing any form (used for control schemes)."""
        p0 = as_square_matrix(p0, "P0").copy()
        ph = as_square_matrix(ph, "Ph").copy()
        if p0.shape[0] % 2 != 0:
            raise InvalidDimensionError(f"P0 must have even size, got {p0.shape[0]}")
        return cls(p0.shape[0] // 2, p0, ph)

    def __call__(self, z0, zh) -> np.ndarray:
        return self.p0 @ np.asarray(z0, dtype=float) + self.ph @ np.asarray(zh, dtype=float)


@dataclass(frozen=True, eq=False)
class SymplecticityReport:
    """Residuals and verdict of the symplecticity criterion for one form."""

    n: int
    p0: np.ndarray
    ph: np.ndarray
    identity_residual: float
    b: np.ndarray
    hamiltonian_residual: float
    verdict: str
    rho_is_zero: bool
    is_liouvillian: bool = True


def vertical_coefficients(form: LiouvillianFormMatrix) -> np.ndarray:
    """
    Coefficients V of the vertical space, hats(Z) = V Z.

    Row i of A already holds the dZ_i coefficient, so V is A itself.
    """
    return np.array(form.matrix)


def tangent_coefficients(form: LiouvillianFormMatrix) -> np.ndarray:
    """
    Tangent-space coefficients J~^T A.

    Blockwise this maps the hats (q^, p^, Q^, P^) to (-p^, q^, P^, -Q^).
    """
    return canonical_jtilde(form.n).T @ vertical_coefficients(form)


def implicit_map(form: LiouvillianFormMatrix) -> ImplicitMapPair:
    """
    Project the tangent space onto both copies and sum: rho = [I | I] J~^T A Z.

    Example:
        >>> from src.core.forms import FormFamilySpec, make_family_form
        >>> pair = implicit_map(make_family_form(FormFamilySpec("poincare", 1)))
        >>> float(np.abs(pair.p0).max()), float(np.abs(pair.ph).max())
        (0.0, 0.0)
    """
    n = form.n
    t = tangent_coefficients(form)
    rho = t[: 2 * n] + t[2 * n :]
    return ImplicitMapPair(n, rho[:, : 2 * n], rho[:, 2 * n :])


def classify_pair(pair: ImplicitMapPair, tol: float = DEFAULT_TOL,
                  is_liouvillian: bool = True) -> SymplecticityReport:
    """
    Classify an implicit map against rho = (z0 + zh)/2 + b (zh - z0), b Hamiltonian.

    Verdict is null_map when both blocks vanish, symplectic when P0 + Ph = I and
    b = (Ph - P0)/2 is Hamiltonian, non_symplectic otherwise.
    """
    size = 2 * pair.n
    identity_residual = max_norm(pair.p0 + pair.ph - np.eye(size))
    b = 0.5 * (pair.ph - pair.p0)
    _, hamiltonian_residual = is_hamiltonian_matrix(b, tol)
    rho_is_zero = max_norm(pair.p0) <= tol and max_norm(pair.ph) <= tol

    if rho_is_zero:
        verdict = NULL_MAP
    elif identity_residual <= tol and hamiltonian_residual <= tol:
        verdict = SYMPLECTIC
    else:
        verdict = NON_SYMPLECTIC

    return SymplecticityReport(
        n=pair.n,
        p0=pair.p0,
        ph=pair.ph,
        identity_residual=identity_residual,
        b=b,
        hamiltonian_residual=hamiltonian_residual,
        verdict=verdict,
        rho_is_zero=rho_is_zero,
        is_liouvillian=is_liouvillian,
    )


def classify(form: LiouvillianFormMatrix, tol: float = DEFAULT_TOL) -> SymplecticityReport:
    """
    Run steps 2-4 on a form and classify the resulting scheme.

    Args:
        form: Constant-coefficient form (flagged non-Liouvillian forms are accepted
              and reported with is_liouvillian=False)
        tol: Max-norm tolerance for all residual tests

    Returns:
        SymplecticityReport
    """
    return classify_pair(implicit_map(form), tol, form.is_liouvillian)


def kernel_basis(form: LiouvillianFormMatrix, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """
    Orthonormal basis of the null space of A, the kernel of theta as a linear form.

    Singular values below tol times the largest one count as zero.
    """
    a = form.matrix
    if max_norm(a) == 0.0:
        return list(np.eye(a.shape[0]))
    basis = null_space(a, rcond=tol)
    return [basis[:, k].copy() for k in range(basis.shape[1])]


def diagonal_recovery(pair: ImplicitMapPair, z) -> float:
    """Residual of rho(z, z) = z at one state."""
    z = np.asarray(z, dtype=float)
    return max_norm(pair(z, z) - z)


def report_to_dict(
    report: SymplecticityReport, kernel_dimension: int | None = None
) -> dict[str, Any]:
    """JSON-ready view of a report, matrices as lists of rows."""
    data: dict[str, Any] = {
        "n": report.n,
        "P0": report.p0.tolist(),
        "Ph": report.ph.tolist(),
        "identity_residual": report.identity_residual,
        "b": report.b.tolist(),
        "hamiltonian_residual": report.hamiltonian_residual,
        "verdict": report.verdict,
        "rho_is_zero": bool(report.rho_is_zero),
        "is_liouvillian": bool(report.is_liouvillian),
    }
    if kernel_dimension is not None:
        data["kernel_dimension"] = int(kernel_dimension)
    return data
