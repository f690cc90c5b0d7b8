"""Reproduction suite for the classification results and integrator properties.

Each item returns pass/fail with a short detail string. Items are independent
and run in the order of VERIFICATION_ITEMS.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.config import DEFAULT_SEED, DEFAULT_TOL
from src.core.canonical import canonical_jtilde, is_symplectic_rotation, max_norm
from src.core.derivation import NULL_MAP, SYMPLECTIC, classify, implicit_map
from src.core.forms import (
    FormFamilySpec,
    k1_matrix,
    k2_matrix,
    make_family_form,
    matricial_decomposition,
    psi_matrix,
    rotation_family_coefficients,
    rotation_matrix,
    tautological_form,
)
from src.dynamics.integrator import (
    SchemeSpec,
    euler_scheme,
    explicit_euler_scheme,
    identity_scheme,
    integrate,
    linear_step_matrix,
    midpoint_scheme,
    scheme_from_form,
)
from src.dynamics.systems import builtin_system

from .checks import bounded_drift, energy_drift, step_jacobian, symplectic_residual
from .sweeps import classify_abc_plane, sample_abc, sweep_theta_phi, theta_phi_symplectic_roots

# Betas per n integrated step by step in check_midpoint_family
MIDPOINT_STEPWISE_BETAS = 5


@dataclass(frozen=True)
class VerificationItem:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _random_symmetric(rng: np.random.Generator, size: int) -> np.ndarray:
    x = rng.uniform(-1.0, 1.0, size=(size, size))
    return 0.5 * (x + x.T)


def check_null_map(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """Poincare's form derives to rho = 0 and integrates to constant trajectories."""
    for n in (1, 2, 3):
        report = classify(make_family_form(FormFamilySpec("poincare", n)), tol)
        if np.any(report.p0 != 0.0) or np.any(report.ph != 0.0) or report.verdict != NULL_MAP:
            return False, f"n={n}: P0/Ph not exactly zero (verdict {report.verdict})"

    system = builtin_system("pendulum", 1)
    scheme = identity_scheme(1)
    worst = 0.0
    for z0 in rng.uniform(-2.0, 2.0, size=(20, 2)):
        traj = integrate(scheme, system, z0, 0.1, 100)
        worst = max(worst, float(np.max(np.abs(np.diff(traj.states, axis=0)))))
    if worst > 1e-15:
        return False, f"identity scheme moved the state by {worst:.3e} in one step"
    return True, "P0 = Ph = 0 for n in 1..3; 20 pendulum runs stayed constant"


def check_rotation_family(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """theta_phi on [0, pi/2] is symplectic exactly at the two endpoints."""
    grid = np.linspace(0.0, math.pi / 2, 10001)
    records = sweep_theta_phi(1, grid, tol)
    hits = [r for r in records if r.verdict == SYMPLECTIC]
    angles = sorted(r.parameters["phi"] for r in hits)
    if len(angles) != 2 or angles[0] != 0.0 or abs(angles[1] - math.pi / 2) > 1e-15:
        return False, f"symplectic at {angles}, expected [0, pi/2]"

    expected = {0.0: 0.5 * np.diag([1.0, -1.0]), angles[1]: 0.5 * np.diag([-1.0, 1.0])}
    for record in hits:
        err = max_norm(record.b - expected[record.parameters["phi"]])
        if err > 1e-14:
            return False, f"b at phi={record.parameters['phi']} off by {err:.3e}"
    null = [r.parameters["phi"] for r in records if r.verdict == NULL_MAP]
    if math.pi / 4 not in null:
        return False, "phi = pi/4 did not give the null map"
    return True, f"{len(records)} angles, symplectic only at 0 and pi/2"


def check_trig_identities(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """f + g = 1 - sin 2phi, f - g = -cos 2phi, and the pipeline reproduces diag(f, g)."""
    worst_identity = worst_pipeline = 0.0
    for phi in np.linspace(0.0, 2 * math.pi, 1000):
        f, g = rotation_family_coefficients(phi)
        worst_identity = max(
            worst_identity,
            abs(f + g - (1 - math.sin(2 * phi))),
            abs(f - g + math.cos(2 * phi)),
        )
        pair = implicit_map(make_family_form(FormFamilySpec("theta_phi", 1, {"phi": phi})))
        worst_pipeline = max(
            worst_pipeline,
            max_norm(pair.p0 - np.diag([f, g])),
            max_norm(pair.ph - np.diag([g, f])),
        )
    passed = worst_identity <= 1e-14 and worst_pipeline <= 1e-14
    return passed, f"identity error {worst_identity:.2e}, pipeline error {worst_pipeline:.2e}"


def midpoint_family_stepwise_error(n: int, betas, z0, h: float = 0.01,
                                   steps: int = 1000) -> float:
    """Largest state difference between midpoint_family(beta) and the midpoint rule.

    Both schemes run on the n-dof pendulum from z0 for the given number of steps.
    """
    system = builtin_system("pendulum", n)
    reference = integrate(midpoint_scheme(n), system, z0, h, steps).states
    worst = 0.0
    for beta in np.atleast_2d(betas):
        form = make_family_form(FormFamilySpec("midpoint_family", n, {"beta": beta}))
        states = integrate(scheme_from_form(form), system, z0, h, steps).states
        worst = max(worst, float(np.max(np.abs(states - reference))))
    return worst


def check_midpoint_family(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """Every beta gives rho = (z0 + zh)/2; the first few betas per n are also integrated."""
    worst_map = worst_traj = 0.0
    for n in (1, 2, 5):
        half = 0.5 * np.eye(2 * n)
        z0 = rng.uniform(-1.0, 1.0, size=2 * n)
        betas = rng.uniform(-1.0, 1.0, size=(100, n))
        for beta in betas:
            form = make_family_form(FormFamilySpec("midpoint_family", n, {"beta": beta}))
            pair = implicit_map(form)
            worst_map = max(worst_map, max_norm(pair.p0 - half), max_norm(pair.ph - half))
        stepwise = betas[:MIDPOINT_STEPWISE_BETAS]
        worst_traj = max(worst_traj, midpoint_family_stepwise_error(n, stepwise, z0))
    passed = worst_map <= 1e-14 and worst_traj <= 1e-12
    return passed, f"map error {worst_map:.2e}, trajectory error {worst_traj:.2e}"


def check_abc_plane(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """Symplectic verdict iff max_i |beta_i + gamma_i| <= tol on random samples."""
    seed = int(rng.integers(0, 2**32))
    records = classify_abc_plane(2, sample_abc(2, 1000, seed, plane_fraction=0.5), tol)
    mismatches = sum((r.verdict == SYMPLECTIC) != r.predicate for r in records)
    on_plane = sum(r.predicate for r in records)
    detail = f"{mismatches} mismatches over {len(records)} samples ({on_plane} on the plane)"
    return mismatches == 0, detail


def check_pullback(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """Pulling the tautological form back through Psi_phi gives theta_phi."""
    base = tautological_form(1).matrix
    worst = 0.0
    for phi in np.linspace(0.0, 2 * math.pi, 100):
        psi = psi_matrix(1, phi)
        theta = make_family_form(FormFamilySpec("theta_phi", 1, {"phi": phi})).matrix
        worst = max(worst, max_norm(psi.T @ base @ psi - theta))
    quarter = make_family_form(FormFamilySpec("theta_phi", 1, {"phi": "pi/4"})).matrix
    poincare = make_family_form(FormFamilySpec("poincare", 1)).matrix
    quarter_err = max_norm(quarter - poincare)
    passed = worst <= 1e-13 and quarter_err <= 1e-15
    return passed, f"pullback error {worst:.2e}, theta_(pi/4) vs Poincare {quarter_err:.2e}"


def check_decomposition(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """[A] = J~/2 + cos(2phi)/2 K1 + sin(2phi)/2 K2 across the rotation family."""
    jt, k1, k2 = canonical_jtilde(1), k1_matrix(1), k2_matrix(1)
    worst = 0.0
    for phi in np.linspace(0.0, 2 * math.pi, 100):
        form = make_family_form(FormFamilySpec("theta_phi", 1, {"phi": phi}))
        dec = matricial_decomposition(form)
        rebuilt = 0.5 * jt + 0.5 * math.cos(2 * phi) * k1 + 0.5 * math.sin(2 * phi) * k2
        worst = max(worst, max_norm(form.matrix - rebuilt), dec.family_residual or 0.0)
    return worst <= 1e-14, f"reconstruction error {worst:.2e}"


def check_rotation(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """R_phi is orthogonal and symplectic for J~."""
    worst_orth = worst_symp = 0.0
    for n in (1, 2):
        for phi in np.linspace(0.0, 2 * math.pi, 1000):
            _, orth, symp = is_symplectic_rotation(rotation_matrix(n, phi), n, 1e-13)
            worst_orth, worst_symp = max(worst_orth, orth), max(worst_symp, symp)
    passed = worst_orth <= 1e-13 and worst_symp <= 1e-13
    return passed, f"orthogonality {worst_orth:.2e}, symplecticity {worst_symp:.2e}"


def _unequal_scale_scheme() -> SchemeSpec:
    # beta_i + gamma_i differs between the two degrees of freedom
    spec = FormFamilySpec("abc_family", 2, {
        "alpha": [0.0, 0.0], "beta": [0.2, -0.1], "gamma": [0.2, -0.1],
    })
    return scheme_from_form(make_family_form(spec), "abc-unequal")


def check_linear_symplecticity(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """Exact one-step maps on quadratic H are symplectic; two controls are not."""
    worst = 0.0
    for n in (1, 2):
        schemes = [midpoint_scheme(n), euler_scheme(n, 0.0), euler_scheme(n, math.pi / 2)]
        for _ in range(10):
            m = _random_symmetric(rng, 2 * n)
            for scheme in schemes:
                for h in (1e-3, 1e-2, 1e-1, 0.5):
                    worst = max(worst, symplectic_residual(linear_step_matrix(scheme, m, h)))

    forward = symplectic_residual(linear_step_matrix(explicit_euler_scheme(1), np.eye(2), 0.1))
    coupled = np.eye(4)
    coupled[0, 1] = coupled[1, 0] = 0.5
    unequal = symplectic_residual(linear_step_matrix(_unequal_scale_scheme(), coupled, 0.1))
    passed = worst <= 1e-12 and forward >= 1e-3 and unequal >= 1e-3
    return passed, (
        f"max residual {worst:.2e}; controls: explicit Euler {forward:.2e}, "
        f"unequal beta+gamma {unequal:.2e}"
    )


def check_jacobian(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """Finite-difference step Jacobians on the pendulum are symplectic within 1e-5."""
    system = builtin_system("pendulum", 1)
    schemes = [midpoint_scheme(1), euler_scheme(1, 0.0), euler_scheme(1, math.pi / 2)]
    worst = 0.0
    for z in rng.uniform(-1.0, 1.0, size=(10, 2)):
        for scheme in schemes:
            worst = max(worst, symplectic_residual(step_jacobian(scheme, system, z, 0.01)))
    control = symplectic_residual(
        step_jacobian(explicit_euler_scheme(1), system, np.array([1.0, 0.5]), 0.05)
    )
    passed = worst <= 1e-5 and control >= 1e-3
    return passed, f"max residual {worst:.2e}; explicit Euler control {control:.2e}"


def check_energy(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """Long-run energy behavior of the midpoint rule against explicit Euler."""
    harmonic = builtin_system("harmonic", 1)
    pendulum = builtin_system("pendulum", 1)
    scheme = midpoint_scheme(1)

    traj = integrate(scheme, harmonic, [1.0, 0.0], 0.1, 100_000)
    harmonic_max, _ = energy_drift(traj, harmonic)

    traj = integrate(scheme, pendulum, [1.0, 0.5], 0.1, 100_000)
    pendulum_max, _ = energy_drift(traj, pendulum)
    bounded = bounded_drift(traj, pendulum)

    traj = integrate(explicit_euler_scheme(1), harmonic, [1.0, 0.0], 0.1, 1000)
    euler_max, _ = energy_drift(traj, harmonic)

    passed = harmonic_max <= 1e-8 and pendulum_max <= 0.01 and bounded and euler_max > 0.1
    return passed, (
        f"harmonic {harmonic_max:.2e}, pendulum {pendulum_max:.2e} "
        f"(bounded={bounded}), explicit Euler {euler_max:.2e}"
    )


def check_full_circle(tol: float, rng: np.random.Generator) -> tuple[bool, str]:
    """On [0, 2pi] the symplectic angles are the multiples of pi/2."""
    roots = theta_phi_symplectic_roots(0.0, 2 * math.pi)
    grid = np.union1d(np.linspace(0.0, 2 * math.pi, 1001), roots)
    records = sweep_theta_phi(1, grid, tol)
    hits = [r.parameters["phi"] for r in records if r.verdict == SYMPLECTIC]
    mismatches = sum((r.verdict == SYMPLECTIC) != r.predicate for r in records)
    far = [phi for phi in hits if min(abs(phi - root) for root in roots) > 1e-10]
    covered = all(any(abs(phi - root) <= 1e-10 for phi in hits) for root in roots)
    passed = mismatches == 0 and not far and covered
    return passed, f"{len(hits)} symplectic angles, {mismatches} predicate mismatches"


Check = Callable[[float, np.random.Generator], tuple[bool, str]]

VERIFICATION_ITEMS: dict[str, Check] = {
    "null_map": check_null_map,
    "rotation_family": check_rotation_family,
    "trig_identities": check_trig_identities,
    "midpoint_family": check_midpoint_family,
    "abc_plane": check_abc_plane,
    "pullback": check_pullback,
    "decomposition": check_decomposition,
    "rotation": check_rotation,
    "linear_symplecticity": check_linear_symplecticity,
    "jacobian": check_jacobian,
    "energy": check_energy,
    "full_circle": check_full_circle,
}

# Alternate name accepted by --only
ITEM_ALIASES = {
    "theorem1": "rotation_family",
}


def resolve_items(only: Sequence[str] | None) -> list[str]:
    if not only:
        return list(VERIFICATION_ITEMS)
    names = []
    for name in only:
        key = ITEM_ALIASES.get(name, name)
        if key not in VERIFICATION_ITEMS:
            raise ValueError(
                f"unknown verification item '{name}', expected one of "
                f"{sorted(VERIFICATION_ITEMS) + sorted(ITEM_ALIASES)}"
            )
        if key not in names:
            names.append(key)
    return names


def run_verification(only: Sequence[str] | None = None, tol: float = DEFAULT_TOL,
                     seed: int = DEFAULT_SEED, debug: bool = False) -> list[VerificationItem]:
    """
    Run the selected verification items.

    Args:
        only: Item names or aliases; None runs everything
        tol: Classification tolerance used for verdicts (the numeric thresholds of
             each item are fixed)
        seed: Seed for the random states, matrices and samples
        debug: Print each result as it completes

    Returns:
        One VerificationItem per selected item, in suite order
    """
    results = []
    for name in resolve_items(only):
        # Each item gets its own stream so filtering does not change the samples
        rng = np.random.default_rng([seed, list(VERIFICATION_ITEMS).index(name)])
        start = time.perf_counter()
        try:
            passed, detail = VERIFICATION_ITEMS[name](tol, rng)
        except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        item = VerificationItem(name, bool(passed), detail, time.perf_counter() - start)
        if debug:
            print(f"[{'PASS' if item.passed else 'FAIL'}] {name} ({item.seconds:.1f}s): {detail}")
        results.append(item)
    return results


def verification_report(items: Sequence[VerificationItem]) -> dict[str, Any]:
    """JSON-ready summary of a verification run."""
    return {
        "passed": all(item.passed for item in items),
        "items": [
            {"name": i.name, "passed": i.passed, "detail": i.detail, "seconds": round(i.seconds, 3)}
            for i in items
        ],
    }
