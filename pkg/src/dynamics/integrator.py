"""Generalized implicit Euler scheme zh = z0 + h X_H(P0 z0 + Ph zh)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.config import MAX_ITERATIONS, SOLVER_TOL
from src.core.canonical import canonical_j0, max_norm
from src.core.derivation import ImplicitMapPair, implicit_map
from src.core.errors import (
    InvalidDimensionError,
    InvalidSpecError,
    SingularityError,
    SolverFailureError,
    StepSingularError,
    UnsupportedMethodError,
)
from src.core.forms import FormFamilySpec, LiouvillianFormMatrix, make_family_form

from .systems import HamiltonianSystem

VALID_METHODS = ("fixed_point", "newton")


@dataclass(frozen=True)
class SchemeSpec:
    """Implicit map fed to the vector field, with a display label."""

    rho: ImplicitMapPair
    label: str


@dataclass(frozen=True)
class SolverOptions:
    method: str = "fixed_point"
    tolerance: float = SOLVER_TOL
    max_iterations: int = MAX_ITERATIONS

    def __post_init__(self):
        if self.method not in VALID_METHODS:
            raise InvalidSpecError(f"method must be one of {VALID_METHODS}, got '{self.method}'")
        if not self.tolerance > 0:
            raise InvalidSpecError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise InvalidSpecError(f"max_iterations must be at least 1, got {self.max_iterations}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States z_0..z_k with energies and the solver iterations spent on each step."""

    h: float
    states: np.ndarray
    energies: np.ndarray
    solver_iterations: np.ndarray

    def __len__(self) -> int:
        return len(self.states)


def scheme_from_form(form: LiouvillianFormMatrix, label: str | None = None) -> SchemeSpec:
    """Run the derivation pipeline on a form and wrap the implicit map as a scheme."""
    return SchemeSpec(implicit_map(form), label or form.family)


def midpoint_scheme(n: int) -> SchemeSpec:
    return scheme_from_form(make_family_form(FormFamilySpec("midpoint_canonical", n)), "midpoint")


def identity_scheme(n: int) -> SchemeSpec:
    """Null map derived from Poincare's form."""
    return scheme_from_form(make_family_form(FormFamilySpec("poincare", n)), "poincare-identity")


def euler_scheme(n: int, phi: float) -> SchemeSpec:
    """Symplectic Euler scheme at the rotation-family endpoints phi = 0 or phi = pi/2."""
    if math.isclose(phi, 0.0, abs_tol=1e-15):
        family, label = "euler_b", "euler-phi-0"
    elif math.isclose(phi, math.pi / 2, abs_tol=1e-15):
        family, label = "euler_a", "euler-phi-pi/2"
    else:
        raise InvalidSpecError(f"symplectic Euler schemes sit at phi = 0 or pi/2, got {phi}")
    return scheme_from_form(make_family_form(FormFamilySpec(family, n)), label)


def explicit_euler_scheme(n: int) -> SchemeSpec:
    """Forward Euler, P0 = I and Ph = 0 (not symplectic)."""
    size = 2 * n
    return SchemeSpec(ImplicitMapPair.from_blocks(np.eye(size), np.zeros((size, size))),
                      "explicit-euler")


def _check_scheme(scheme: SchemeSpec, system: HamiltonianSystem) -> None:
    if scheme.rho.n != system.n:
        raise InvalidDimensionError(
            f"scheme '{scheme.label}' has n={scheme.rho.n}, "
            f"system {system.name} has n={system.n}"
        )


def _field(system: HamiltonianSystem, w: np.ndarray) -> np.ndarray:
    # X_H without state validation, for the solver loops
    grad = system.gradient(w)
    return np.concatenate([grad[system.n :], -grad[: system.n]])


def _fixed_point(scheme, system, z0, h, opts):
    rho = scheme.rho
    anchor = rho.p0 @ z0
    z = z0.copy()
    change = math.inf
    for k in range(1, opts.max_iterations + 1):
        z_new = z0 + h * _field(system, anchor + rho.ph @ z)
        change = float(np.max(np.abs(z_new - z)))
        z = z_new
        if change <= opts.tolerance:
            return z, k
    raise SolverFailureError(
        f"fixed-point iteration did not converge in {opts.max_iterations} iterations "
        f"(last change {change:.3e}, h={h})",
        residual=change,
        iterations=opts.max_iterations,
    )


def _newton(scheme, system, z0, h, opts):
    if system.hessian is None:
        raise UnsupportedMethodError(f"newton needs a Hessian, {system.name} has none")
    rho = scheme.rho
    j0 = canonical_j0(system.n)
    eye = np.eye(2 * system.n)
    anchor = rho.p0 @ z0
    z = z0.copy()
    change = math.inf
    for k in range(1, opts.max_iterations + 1):
        arg = anchor + rho.ph @ z
        residual = z - z0 - h * _field(system, arg)
        jac = eye - h * j0 @ system.hessian(arg) @ rho.ph
        try:
            delta = np.linalg.solve(jac, residual)
        except np.linalg.LinAlgError as exc:
            raise StepSingularError(f"Newton Jacobian is singular at h={h}", h) from exc
        z = z - delta
        change = max_norm(delta)
        if change <= opts.tolerance:
            return z, k
    raise SolverFailureError(
        f"Newton iteration did not converge in {opts.max_iterations} iterations "
        f"(last change {change:.3e}, h={h})",
        residual=change,
        iterations=opts.max_iterations,
    )


def step(scheme: SchemeSpec, system: HamiltonianSystem, z0, h: float,
         opts: SolverOptions | None = None) -> tuple[np.ndarray, int]:
    """
    Advance one step of zh = z0 + h X_H(P0 z0 + Ph zh).

    fixed_point iterates from zh = z0; newton solves the residual with Jacobian
    I - h J0 Hess(rho) Ph. Both stop when the max-norm iterate change drops to
    opts.tolerance.

    Args:
        scheme: Implicit map and label
        system: Hamiltonian system of matching n
        z0: Current state of length 2n
        h: Time step (negative values step backwards)
        opts: Solver options (defaults from config)

    Returns:
        (zh, iterations)

    Raises:
        SolverFailureError: No convergence within opts.max_iterations
        UnsupportedMethodError: newton on a system without Hessian
    """
    opts = opts or SolverOptions()
    _check_scheme(scheme, system)
    if not math.isfinite(h) or h == 0:
        raise InvalidSpecError(f"h must be finite and nonzero, got {h}")
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (2 * system.n,):
        raise InvalidDimensionError(f"z0 must have length {2 * system.n}, got shape {z0.shape}")
    if not np.all(np.isfinite(z0)):
        raise ValueError(f"z0 has non-finite entries: {z0}")
    if opts.method == "newton":
        return _newton(scheme, system, z0, h, opts)
    return _fixed_point(scheme, system, z0, h, opts)


def integrate(scheme: SchemeSpec, system: HamiltonianSystem, z0, h: float, steps: int,
              opts: SolverOptions | None = None, debug: bool = False) -> Trajectory:
    """
    Repeat step() and record energy at each state.

    On solver failure or a domain violation the raised exception carries the
    partial Trajectory in its ``trajectory`` attribute. A singular Newton
    Jacobian counts as a solver failure.
    """
    if not h > 0:
        raise InvalidSpecError(f"h must be positive, got {h}")
    if steps < 0:
        raise InvalidSpecError(f"steps must be non-negative, got {steps}")
    z = np.asarray(z0, dtype=float).copy()
    if z.shape != (2 * system.n,):
        raise InvalidDimensionError(f"z0 must have length {2 * system.n}, got shape {z.shape}")
    states = [z]
    energies = [system.energy(z)]
    iterations = [0]

    def partial() -> Trajectory:
        return Trajectory(h, np.array(states), np.array(energies), np.array(iterations))

    report_every = max(1, steps // 10)
    for k in range(1, steps + 1):
        try:
            z, its = step(scheme, system, z, h, opts)
            energy = system.energy(z)
        except (SolverFailureError, SingularityError) as exc:
            exc.trajectory = partial()
            raise
        except StepSingularError as exc:
            failure = SolverFailureError(
                f"step {k}: {exc}", residual=math.inf, iterations=0
            )
            failure.trajectory = partial()
            raise failure from exc
        states.append(z)
        energies.append(energy)
        iterations.append(its)
        if debug and k % report_every == 0:
            print(f"{scheme.label}: step {k}/{steps}, H={energy:.16g}, iterations={its}")

    return partial()


def linear_step_matrix(scheme: SchemeSpec, m, h: float) -> np.ndarray:
    """
    Exact one-step map for H = z^T M z / 2: (I - h J0 M Ph)^-1 (I + h J0 M P0).

    Raises:
        StepSingularError: If I - h J0 M Ph is singular
    """
    rho = scheme.rho
    m = np.asarray(m, dtype=float)
    size = 2 * rho.n
    if m.shape != (size, size):
        raise InvalidDimensionError(f"M must be {size}x{size}, got {m.shape}")
    j0 = canonical_j0(rho.n)
    lhs = np.eye(size) - h * j0 @ m @ rho.ph
    rhs = np.eye(size) + h * j0 @ m @ rho.p0
    if np.linalg.cond(lhs) > 1.0 / np.finfo(float).eps:
        raise StepSingularError(f"I - h J0 M Ph is singular at h={h}", h)
    return np.linalg.solve(lhs, rhs)


def trajectory_to_frame(traj: Trajectory) -> pd.DataFrame:
    """
    Tabulate a trajectory as step, t, q1..qn, p1..pn, H, deltaH.

    Example:
        >>> frame = trajectory_to_frame(traj)
        >>> frame.to_csv("traj.csv", index=False, float_format="%.17g")
    """
    states = np.atleast_2d(traj.states)
    n = states.shape[1] // 2
    steps = np.arange(len(states))
    frame = pd.DataFrame({"step": steps, "t": steps * traj.h})
    for i in range(n):
        frame[f"q{i + 1}"] = states[:, i]
    for i in range(n):
        frame[f"p{i + 1}"] = states[:, n + i]
    frame["H"] = traj.energies
    frame["deltaH"] = traj.energies - traj.energies[0]
    return frame
