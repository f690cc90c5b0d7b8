"""Constant-coefficient Liouvillian forms on the product phase space.

A form theta = dZ^T [A] Z on R^4n with Z = (q, p, Q, P) is stored as the 4n x 4n
matrix A: row i holds the coefficient of dZ_i as a linear function of Z.
A matrix is a valid Liouvillian form for omega_minus when A - A^T = J~.
"""

from __future__ import annotations

import json
import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from src.config import DEFAULT_TOL

from .canonical import as_square_matrix, canonical_j0, canonical_jtilde, max_norm
from .errors import (
    InvalidDimensionError,
    InvalidSpecError,
    InvalidTransformError,
    NotLiouvillianError,
)

VALID_FAMILIES = (
    "poincare",
    "theta_phi",
    "midpoint_canonical",
    "euler_a",
    "euler_b",
    "abc_family",
    "midpoint_family",
    "abc_plane",
    "custom_matrix",
)

# Keys each family requires in FormFamilySpec.params
FAMILY_PARAMS: dict[str, tuple[str, ...]] = {
    "poincare": (),
    "theta_phi": ("phi",),
    "midpoint_canonical": (),
    "euler_a": (),
    "euler_b": (),
    "abc_family": ("alpha", "beta", "gamma"),
    "midpoint_family": ("beta",),
    "abc_plane": ("alpha", "beta"),
    "custom_matrix": ("matrix",),
}

VECTOR_PARAMS = ("alpha", "beta", "gamma")

# Block positions in the (q, p, Q, P) ordering
Q, P, QH, PH = 0, 1, 2, 3

_ANGLE_PATTERN = re.compile(
    r"^\s*(?P<sign>[-+]?)\s*(?P<num>\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d*\.?\d+))?\s*$"
)


@dataclass(frozen=True, eq=False)
class LiouvillianFormMatrix:
    """Coefficient matrix of a constant 1-form on R^4n plus its exactness status."""

    n: int
    matrix: np.ndarray
    exactness_residual: float
    is_liouvillian: bool
    family: str = "custom_matrix"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class FormFamilySpec:
    """Named form family with its degrees of freedom and parameters."""

    family: str
    n: int
    params: Mapping[str, Any] = field(default_factory=dict)


class MatricialDecomposition(NamedTuple):
    antisymmetric_part: np.ndarray
    symmetric_part: np.ndarray
    # Only set for theta_phi forms: distance to the cos2phi/sin2phi reconstruction
    family_residual: float | None


def parse_angle(value) -> float:
    """
    Parse an angle in radians, accepting exact pi keywords.

    Args:
        value: float, or string such as "0.3", "pi", "pi/4", "3pi/2", "2*pi", "-pi/3"

    Returns:
        Angle in radians

    Raises:
        InvalidSpecError: If the string is not a number or a pi expression
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    text = str(value).strip().lower()
    try:
        return float(text)
    except ValueError:
        pass
    match = _ANGLE_PATTERN.match(text)
    if match is None:
        raise InvalidSpecError(f"Cannot parse angle '{value}'")
    num = float(match.group("num")) if match.group("num") not in ("", ".") else 1.0
    den = float(match.group("den")) if match.group("den") else 1.0
    if den == 0:
        raise InvalidSpecError(f"Zero denominator in angle '{value}'")
    angle = num * math.pi / den
    return -angle if match.group("sign") == "-" else angle


def _check_dof(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidDimensionError(f"degrees of freedom n must be a positive integer, got {n}")
    return int(n)


def _exactness_residual(matrix: np.ndarray, n: int) -> float:
    return max_norm(matrix - matrix.T - canonical_jtilde(n))


def _build(n: int, blocks: dict[tuple[int, int], np.ndarray | float]) -> np.ndarray:
    """Assemble a 4n x 4n matrix from diagonal n x n blocks keyed by (row, col)."""
    a = np.zeros((4 * n, 4 * n))
    for (row, col), coeff in blocks.items():
        diag = np.broadcast_to(np.asarray(coeff, dtype=float), (n,))
        a[row * n : (row + 1) * n, col * n : (col + 1) * n] = np.diag(diag)
    return a


def _wrap(
    n: int,
    matrix: np.ndarray,
    family: str,
    params: Mapping[str, Any],
    tol: float = DEFAULT_TOL,
) -> LiouvillianFormMatrix:
    residual = _exactness_residual(matrix, n)
    return LiouvillianFormMatrix(
        n=n,
        matrix=matrix,
        exactness_residual=residual,
        is_liouvillian=residual <= tol,
        family=family,
        params=dict(params),
    )


def form_from_matrix(n: int, matrix, tol: float = DEFAULT_TOL) -> LiouvillianFormMatrix:
    """
    Validate a raw coefficient matrix as a Liouvillian form.

    Args:
        n: Degrees of freedom per copy
        matrix: 4n x 4n array in (q, p, Q, P) ordering
        tol: Max-norm tolerance on A - A^T - J~

    Returns:
        LiouvillianFormMatrix with is_liouvillian=True

    Raises:
        InvalidDimensionError: If matrix is not 4n x 4n
        NotLiouvillianError: If the exactness residual exceeds tol
    """
    n = _check_dof(n)
    a = as_square_matrix(matrix, "A").copy()
    if a.shape[0] != 4 * n:
        raise InvalidDimensionError(f"A must be {4 * n}x{4 * n} for n={n}, got {a.shape}")
    residual = _exactness_residual(a, n)
    if residual > tol:
        raise NotLiouvillianError(
            f"A - A^T differs from J~ by {residual:.3e} (tol {tol:.1e})", residual
        )
    return LiouvillianFormMatrix(n, a, residual, True, "custom_matrix", {})


def _vector(params: Mapping[str, Any], key: str, n: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(params[key], dtype=float))
    if arr.ndim != 1:
        raise InvalidSpecError(f"'{key}' must be a vector, got shape {arr.shape}")
    if arr.size == 1 and n > 1:
        arr = np.full(n, arr[0])
    if arr.size != n:
        raise InvalidSpecError(f"'{key}' must have length n={n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidSpecError(f"'{key}' has non-finite entries")
    return arr


def validate_spec(spec: FormFamilySpec) -> dict[str, Any]:
    """
    Check family name and parameter arity, returning normalized parameters.

    Vector parameters come back as float arrays of length n, phi as a float
    radian value, and the custom matrix as a 4n x 4n array.
    """
    if spec.family not in VALID_FAMILIES:
        raise InvalidSpecError(f"family must be one of {VALID_FAMILIES}, got '{spec.family}'")
    try:
        n = _check_dof(spec.n)
    except (InvalidDimensionError, TypeError, ValueError) as exc:
        raise InvalidSpecError(str(exc)) from exc

    params = dict(spec.params or {})
    expected = set(FAMILY_PARAMS[spec.family])
    missing = expected - params.keys()
    extra = params.keys() - expected
    if missing or extra:
        raise InvalidSpecError(
            f"family '{spec.family}' takes params {sorted(expected)}; "
            f"missing {sorted(missing)}, unexpected {sorted(extra)}"
        )

    normalized: dict[str, Any] = {}
    for key in expected:
        if key in VECTOR_PARAMS:
            normalized[key] = _vector(params, key, n)
        elif key == "phi":
            normalized[key] = parse_angle(params[key])
        elif key == "matrix":
            try:
                a = as_square_matrix(params[key], "matrix")
            except ValueError as exc:
                raise InvalidSpecError(str(exc)) from exc
            if a.shape[0] != 4 * n:
                raise InvalidSpecError(f"matrix must be {4 * n}x{4 * n} for n={n}, got {a.shape}")
            normalized[key] = a
    return normalized


def _poincare(n: int) -> np.ndarray:
    # theta = 1/2 [(p-P)dq + (Q-q)dp + (p-P)dQ + (Q-q)dP]
    return _build(n, {
        (Q, P): 0.5, (Q, PH): -0.5,
        (P, Q): -0.5, (P, QH): 0.5,
        (QH, P): 0.5, (QH, PH): -0.5,
        (PH, Q): -0.5, (PH, QH): 0.5,
    })


def _theta_phi(n: int, phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return _build(n, {
        (Q, P): c * c, (Q, PH): -c * s,
        (P, Q): -s * s, (P, QH): c * s,
        (QH, P): c * s, (QH, PH): -s * s,
        (PH, Q): -c * s, (PH, QH): c * c,
    })


def _abc(n: int, alpha: np.ndarray, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    # (1/2+a)(p dq + Q dP) - (1/2-a)(q dp + P dQ) + b(p dQ + Q dp) - g(q dP + P dq)
    return _build(n, {
        (Q, P): 0.5 + alpha, (Q, PH): -gamma,
        (P, Q): -(0.5 - alpha), (P, QH): beta,
        (QH, P): beta, (QH, PH): -(0.5 - alpha),
        (PH, Q): -gamma, (PH, QH): 0.5 + alpha,
    })


def make_family_form(spec: FormFamilySpec, tol: float = DEFAULT_TOL) -> LiouvillianFormMatrix:
    """
    Build the coefficient matrix of a named form family.

    Args:
        spec: Family, degrees of freedom and parameters
        tol: Exactness tolerance recorded on the result

    Returns:
        LiouvillianFormMatrix tagged with the family and normalized params

    Raises:
        InvalidSpecError: Unknown family or parameter arity mismatch
        NotLiouvillianError: custom_matrix input failing exactness

    Example:
        >>> form = make_family_form(FormFamilySpec("theta_phi", 1, {"phi": "pi/4"}))
        >>> np.allclose(form.matrix, make_family_form(FormFamilySpec("poincare", 1)).matrix)
        True
    """
    params = validate_spec(spec)
    n = int(spec.n)
    family = spec.family

    if family == "poincare":
        a = _poincare(n)
    elif family == "theta_phi":
        a = _theta_phi(n, params["phi"])
    elif family == "midpoint_canonical":
        a = 0.5 * canonical_jtilde(n)
    elif family == "euler_b":
        # theta_phi at phi = 0: p dq + Q dP
        a = _build(n, {(Q, P): 1.0, (PH, QH): 1.0})
    elif family == "euler_a":
        # theta_phi at phi = pi/2: -q dp - P dQ
        a = _build(n, {(P, Q): -1.0, (QH, PH): -1.0})
    elif family == "abc_family":
        a = _abc(n, params["alpha"], params["beta"], params["gamma"])
    elif family == "midpoint_family":
        beta = params["beta"]
        a = _abc(n, beta, beta, -beta)
    elif family == "abc_plane":
        a = _abc(n, params["alpha"], params["beta"], -params["beta"])
    else:
        form = form_from_matrix(n, params["matrix"], tol)
        return LiouvillianFormMatrix(n, form.matrix, form.exactness_residual, True, family, params)

    return _wrap(n, a, family, params, tol)


def rotation_matrix(n: int, phi: float) -> np.ndarray:
    """
    Symplectic rotation R_phi of the product space.

    Block rows, each block a multiple of I_n:
        [ c,  0,  s,  0]
        [ 0,  c,  0, -s]
        [ 0, -s,  0, -c]
        [-s,  0,  c,  0]
    """
    n = _check_dof(n)
    c, s = math.cos(phi), math.sin(phi)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([
        [c * eye, zero, s * eye, zero],
        [zero, c * eye, zero, -s * eye],
        [zero, -s * eye, zero, -c * eye],
        [-s * eye, zero, c * eye, zero],
    ])


def e1_matrix(n: int) -> np.ndarray:
    """Map (q, p, Q, P) -> (x, X, y, Y) = (q, -Q, p, P) onto T*(Q1 x Q2)."""
    n = _check_dof(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([
        [eye, zero, zero, zero],
        [zero, zero, -eye, zero],
        [zero, eye, zero, zero],
        [zero, zero, zero, eye],
    ])


def psi_matrix(n: int, phi: float) -> np.ndarray:
    """Psi_phi = E1 R_phi, the curve of symplectic maps onto the cotangent bundle."""
    return e1_matrix(n) @ rotation_matrix(n, phi)


def tautological_form(n: int, tol: float = DEFAULT_TOL) -> LiouvillianFormMatrix:
    """
    Tautological form y dx + Y dX on T*(Q1 x Q2), coordinates (x, X, y, Y).

    Its antisymmetric part is the cotangent-bundle structure rather than J~, so the
    result is flagged non-Liouvillian for omega_minus; its pullbacks under Psi_phi are.
    """
    n = _check_dof(n)
    a = _build(n, {(0, 2): 1.0, (1, 3): 1.0})
    return _wrap(n, a, "tautological", {}, tol)


def pullback_form(transform, base: LiouvillianFormMatrix,
                  tol: float = DEFAULT_TOL) -> LiouvillianFormMatrix:
    """
    Pull a form back through the linear map Z -> T Z.

    The result has matrix T^T A T. Non-symplectic maps break exactness; the
    result is then returned with is_liouvillian=False instead of raising.

    Raises:
        InvalidDimensionError: If T does not match the form size
        InvalidTransformError: If T is singular
    """
    t = as_square_matrix(transform, "T")
    if t.shape != base.matrix.shape:
        raise InvalidDimensionError(f"T has shape {t.shape}, form has {base.matrix.shape}")
    det = float(np.linalg.det(t))
    if abs(det) <= tol:
        raise InvalidTransformError(f"T is singular (det = {det:.3e})")
    a = t.T @ base.matrix @ t
    return _wrap(base.n, a, "pullback", {"base": base.family}, tol)


def form_from_generator(transform, tol: float = DEFAULT_TOL) -> LiouvillianFormMatrix:
    """
    Form generated by a stacked pairing matrix.

    The top 2n rows W_up give the coefficient covector and the bottom 2n rows
    W_low the differentiated variable: theta = <W_up Z, d(W_low Z)>, so
    A = W_low^T W_up. Results that fail exactness are flagged, not rejected.
    """
    t = as_square_matrix(transform, "T")
    size = t.shape[0]
    if size % 4 != 0:
        raise InvalidDimensionError(f"generator size must be a multiple of 4, got {size}")
    n = size // 4
    w_up, w_low = t[: 2 * n], t[2 * n :]
    return _wrap(n, w_low.T @ w_up, "generator", {}, tol)


def pairing_generator(n: int, which: str = "alpha") -> np.ndarray:
    """
    Pairing matrices that all encode Poincare's form.

    Args:
        n: Degrees of freedom
        which: "alpha" ([[-J0, J0], [I/2, I/2]]), "alpha1" or "alpha4"
    """
    n = _check_dof(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    if which == "alpha":
        j0 = canonical_j0(n)
        half = 0.5 * np.eye(2 * n)
        return np.block([[-j0, j0], [half, half]])
    if which == "alpha1":
        return np.block([
            [zero, 0.5 * eye, zero, 0.5 * eye],
            [0.5 * eye, zero, 0.5 * eye, zero],
            [-eye, zero, eye, zero],
            [zero, -eye, zero, eye],
        ])
    if which == "alpha4":
        return np.block([
            [eye, zero, eye, zero],
            [zero, eye, zero, eye],
            [zero, eye, zero, -eye],
            [-eye, zero, eye, zero],
        ]) / math.sqrt(2.0)
    raise InvalidSpecError(f"which must be one of ('alpha', 'alpha1', 'alpha4'), got '{which}'")


def k1_matrix(n: int) -> np.ndarray:
    """Symmetric block matrix multiplying cos(2 phi)/2 in the theta_phi decomposition."""
    n = _check_dof(n)
    return _build(n, {(Q, P): 1.0, (P, Q): 1.0, (QH, PH): 1.0, (PH, QH): 1.0})


def k2_matrix(n: int) -> np.ndarray:
    """Symmetric block matrix [[0, -J0], [J0, 0]] multiplying sin(2 phi)/2."""
    j0 = canonical_j0(n)
    zero = np.zeros_like(j0)
    return np.block([[zero, -j0], [j0, zero]])


def matricial_decomposition(form: LiouvillianFormMatrix) -> MatricialDecomposition:
    """
    Split [A] into antisymmetric and symmetric parts.

    For a valid form the antisymmetric part is J~/2. For theta_phi forms the
    symmetric part is also compared against cos(2phi)/2 K1 + sin(2phi)/2 K2 and
    the max-norm difference is returned as family_residual.

    Example:
        >>> dec = matricial_decomposition(make_family_form(FormFamilySpec("midpoint_canonical", 1)))
        >>> float(np.abs(dec.symmetric_part).max())
        0.0
    """
    a = form.matrix
    anti = 0.5 * (a - a.T)
    sym = 0.5 * (a + a.T)
    family_residual = None
    if form.family == "theta_phi":
        phi = float(form.params["phi"])
        expected = (
            0.5 * math.cos(2 * phi) * k1_matrix(form.n)
            + 0.5 * math.sin(2 * phi) * k2_matrix(form.n)
        )
        family_residual = max_norm(sym - expected)
    return MatricialDecomposition(anti, sym, family_residual)


def rotation_family_coefficients(phi: float) -> tuple[float, float]:
    """Return (f, g) with f = -sin(phi)(cos(phi) - sin(phi)), g = cos(phi)(cos(phi) - sin(phi))."""
    c, s = math.cos(phi), math.sin(phi)
    return -s * (c - s), c * (c - s)


def s_parameter(alpha, beta) -> np.ndarray:
    """Line parameter s_i = alpha_i - beta_i on the plane beta + gamma = 0."""
    return np.asarray(alpha, dtype=float) - np.asarray(beta, dtype=float)


def form_spec_from_dict(data: Mapping[str, Any]) -> FormFamilySpec:
    """Build a FormFamilySpec from the parsed JSON form specification."""
    for key in ("n", "family"):
        if key not in data:
            raise InvalidSpecError(f"form specification is missing '{key}'")
    params = dict(data.get("params", {}))
    spec = FormFamilySpec(family=str(data["family"]), n=data["n"], params=params)
    validate_spec(spec)
    return spec


def load_form_spec(path: str | Path) -> FormFamilySpec:
    """
    Load a form specification file.

    Example file:
        {"n": 1, "family": "theta_phi", "params": {"phi": 0.785398163}}
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidSpecError(f"{path} must contain a JSON object")
    return form_spec_from_dict(data)


def form_to_dict(form: LiouvillianFormMatrix) -> dict[str, Any]:
    """JSON-ready view of a form."""
    return {
        "n": form.n,
        "family": form.family,
        "matrix": form.matrix.tolist(),
        "is_liouvillian": bool(form.is_liouvillian),
        "exactness_residual": form.exactness_residual,
    }
