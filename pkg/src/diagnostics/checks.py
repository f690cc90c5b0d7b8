"""Numerical checks on executed schemes: step Jacobians and energy drift."""

from __future__ import annotations

import numpy as np

from src.config import FD_EPSILON
from src.core.canonical import canonical_j0, is_symplectic_matrix
from src.core.errors import InvalidDimensionError
from src.dynamics.integrator import SchemeSpec, SolverOptions, Trajectory, step
from src.dynamics.systems import HamiltonianSystem


def step_jacobian(scheme: SchemeSpec, system: HamiltonianSystem, z, h: float,
                  fd_epsilon: float = FD_EPSILON,
                  opts: SolverOptions | None = None) -> np.ndarray:
    """
    Central-difference Jacobian of the one-step map z -> zh.

    Column j is (step(z + eps e_j) - step(z - eps e_j)) / (2 eps). With the
    default solver tolerance the entries are accurate to about 1e-7.
    """
    if not fd_epsilon > 0:
        raise ValueError(f"fd_epsilon must be positive, got {fd_epsilon}")
    z = np.asarray(z, dtype=float)
    size = z.size
    jac = np.empty((size, size))
    for j in range(size):
        offset = np.zeros(size)
        offset[j] = fd_epsilon
        plus, _ = step(scheme, system, z + offset, h, opts)
        minus, _ = step(scheme, system, z - offset, h, opts)
        jac[:, j] = (plus - minus) / (2.0 * fd_epsilon)
    return jac


def symplectic_residual(m) -> float:
    """Max-norm of M^T J0 M - J0."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
        raise InvalidDimensionError(f"M must be square with even size, got shape {m.shape}")
    _, residual = is_symplectic_matrix(m, canonical_j0(m.shape[0] // 2))
    return residual


def energy_drift(traj: Trajectory, system: HamiltonianSystem) -> tuple[float, float]:
    """
    Energy error along a trajectory.

    Returns:
        (max_k |H(z_k) - H(z_0)|, |H(z_K) - H(z_0)|)
    """
    if len(traj) == 0:
        raise ValueError("trajectory has no states")
    energies = np.array([system.energy(z) for z in traj.states])
    drift = np.abs(energies - energies[0])
    return float(drift.max()), float(drift[-1])


def bounded_drift(traj: Trajectory, system: HamiltonianSystem, window: int = 1000,
                  factor: float = 2.0) -> bool:
    """True when the final drift is within factor times the max drift of the first window steps."""
    energies = np.array([system.energy(z) for z in traj.states])
    drift = np.abs(energies - energies[0])
    early = float(drift[: window + 1].max())
    return float(drift[-1]) <= factor * max(early, np.finfo(float).eps)
