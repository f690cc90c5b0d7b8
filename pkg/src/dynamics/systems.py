"""Benchmark Hamiltonian systems on R^2n with z = (q, p)."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.config import KEPLER_MIN_RADIUS
from src.core.errors import InvalidDimensionError, InvalidSpecError, SingularityError

VALID_SYSTEMS = ("harmonic", "pendulum", "kepler", "quadratic")

SYSTEM_PARAMS: dict[str, tuple[str, ...]] = {
    "harmonic": (),
    "pendulum": (),
    "kepler": ("mu",),
    "quadratic": ("matrix",),
}


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    """Autonomous Hamiltonian H(z) with analytic gradient and optional Hessian."""

    n: int
    name: str
    energy: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    params: Mapping[str, Any] = field(default_factory=dict)


def _state(system: HamiltonianSystem, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (2 * system.n,):
        raise InvalidDimensionError(
            f"state must have length {2 * system.n} for {system.name}, got shape {z.shape}"
        )
    if not np.all(np.isfinite(z)):
        raise ValueError(f"state has non-finite entries: {z}")
    return z


def hamiltonian_vector_field(system: HamiltonianSystem, z) -> np.ndarray:
    """
    Hamilton's equations X_H(z) = J0 grad H(z).

    Raises:
        InvalidDimensionError: If z does not have length 2n
        SingularityError: If z lies outside the domain of H
    """
    z = _state(system, z)
    grad = system.gradient(z)
    n = system.n
    # J0 g without forming J0: (dH/dp, -dH/dq)
    return np.concatenate([grad[n:], -grad[:n]])


def _harmonic(n: int) -> HamiltonianSystem:
    return HamiltonianSystem(
        n=n,
        name="harmonic",
        energy=lambda z: 0.5 * float(z @ z),
        gradient=lambda z: np.array(z, dtype=float),
        hessian=lambda z: np.eye(2 * n),
    )


def _pendulum(n: int) -> HamiltonianSystem:
    # Uncoupled pendula, H = |p|^2/2 - sum cos q_i
    def energy(z):
        q, p = z[:n], z[n:]
        return 0.5 * float(p @ p) - float(np.sum(np.cos(q)))

    def gradient(z):
        return np.concatenate([np.sin(z[:n]), z[n:]])

    def hessian(z):
        return np.diag(np.concatenate([np.cos(z[:n]), np.ones(n)]))

    return HamiltonianSystem(n, "pendulum", energy, gradient, hessian)


def _kepler(n: int, mu: float) -> HamiltonianSystem:
    def radius(q):
        r = float(np.sqrt(q @ q))
        if r < KEPLER_MIN_RADIUS:
            raise SingularityError(f"Kepler position too close to the origin (|q| = {r:.3e})")
        return r

    def energy(z):
        q, p = z[:n], z[n:]
        return 0.5 * float(p @ p) - mu / radius(q)

    def gradient(z):
        q, p = z[:n], z[n:]
        r = radius(q)
        return np.concatenate([mu * q / r**3, p])

    def hessian(z):
        q = z[:n]
        r = radius(q)
        h = np.eye(2 * n)
        h[:n, :n] = mu * (np.eye(n) / r**3 - 3.0 * np.outer(q, q) / r**5)
        return h

    return HamiltonianSystem(n, "kepler", energy, gradient, hessian, {"mu": mu})


def _quadratic(n: int, matrix) -> HamiltonianSystem:
    try:
        m = np.asarray(matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidSpecError(f"quadratic matrix must be numeric: {exc}") from exc
    if m.shape != (2 * n, 2 * n):
        raise InvalidSpecError(f"quadratic matrix must be {2 * n}x{2 * n}, got {m.shape}")
    if not np.all(np.isfinite(m)) or not np.allclose(m, m.T, rtol=0.0, atol=1e-14):
        raise InvalidSpecError("quadratic matrix must be finite and symmetric")
    m = m.copy()
    m.setflags(write=False)
    return HamiltonianSystem(
        n=n,
        name="quadratic",
        energy=lambda z: 0.5 * float(z @ m @ z),
        gradient=lambda z: m @ z,
        hessian=lambda z: np.array(m),
        params={"matrix": m},
    )


def check_gradient(system: HamiltonianSystem, points, epsilon: float = 1e-6,
                   rtol: float = 1e-6) -> float:
    """
    Compare the analytic gradient with central differences of the energy.

    Returns:
        Largest relative error over the points

    Raises:
        InvalidSpecError: If the error exceeds rtol
    """
    worst = 0.0
    for z in np.atleast_2d(points):
        z = _state(system, z)
        fd = np.empty_like(z)
        for j in range(z.size):
            step = np.zeros_like(z)
            step[j] = epsilon
            fd[j] = (system.energy(z + step) - system.energy(z - step)) / (2.0 * epsilon)
        grad = system.gradient(z)
        err = float(np.max(np.abs(fd - grad))) / max(1.0, float(np.max(np.abs(grad))))
        worst = max(worst, err)
    if worst > rtol:
        raise InvalidSpecError(
            f"{system.name} gradient disagrees with energy differences (rel err {worst:.2e})"
        )
    return worst


def builtin_system(
    name: str, n: int = 1, params: Mapping[str, Any] | None = None
) -> HamiltonianSystem:
    """
    Construct one of the benchmark systems.

    Args:
        name: "harmonic" (H = (|q|^2 + |p|^2)/2), "pendulum" (H = |p|^2/2 - sum cos q),
              "kepler" (H = |p|^2/2 - mu/|q|, n = 2) or "quadratic" (H = z^T M z / 2)
        n: Degrees of freedom
        params: {"mu": float} for kepler (default 1.0), {"matrix": M} for quadratic

    Returns:
        HamiltonianSystem with a gradient checked against central differences

    Raises:
        InvalidSpecError: Unknown name, wrong n or invalid parameters

    Example:
        >>> system = builtin_system("harmonic", 1)
        >>> hamiltonian_vector_field(system, [1.0, 2.0])
        array([ 2., -1.])
    """
    if name not in VALID_SYSTEMS:
        raise InvalidSpecError(f"system must be one of {VALID_SYSTEMS}, got '{name}'")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidSpecError(f"n must be a positive integer, got {n}")
    n = int(n)
    if params is not None and not isinstance(params, Mapping):
        raise InvalidSpecError(f"params must be a mapping, got {type(params).__name__}")
    params = dict(params or {})
    extra = params.keys() - set(SYSTEM_PARAMS[name])
    if extra:
        raise InvalidSpecError(f"{name} does not take params {sorted(extra)}")

    rng = np.random.default_rng(0)
    points = rng.uniform(-1.0, 1.0, size=(3, 2 * n))

    if name == "harmonic":
        system = _harmonic(n)
    elif name == "pendulum":
        system = _pendulum(n)
    elif name == "kepler":
        if n != 2:
            raise InvalidSpecError(f"kepler requires n=2, got {n}")
        try:
            mu = float(params.get("mu", 1.0))
        except (TypeError, ValueError) as exc:
            raise InvalidSpecError(f"kepler mu must be a number, got {params.get('mu')!r}") from exc
        if not np.isfinite(mu) or mu <= 0:
            raise InvalidSpecError(f"kepler requires mu > 0, got {mu}")
        system = _kepler(n, mu)
        # Keep the check points away from the singularity at q = 0
        points[:, :n] = np.sign(points[:, :n]) * (0.5 + np.abs(points[:, :n]))
    else:
        if "matrix" not in params:
            raise InvalidSpecError("quadratic requires a 'matrix' parameter")
        system = _quadratic(n, params["matrix"])

    check_gradient(system, points)
    return system
