"""Parameter sweeps over the rotation family and the (alpha, beta, gamma) family."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.config import DEFAULT_TOL, THREADS
from src.core.derivation import classify
from src.core.forms import FormFamilySpec, make_family_form

# Exact angles added to rotation-family sweeps when they fall inside the grid
THETA_PHI_ANCHORS = (0.0, math.pi / 4, math.pi / 2)


@dataclass(frozen=True, eq=False)
class SweepRecord:
    """Classification of one parameter point."""

    family: str
    parameters: dict[str, float]
    identity_residual: float
    hamiltonian_residual: float
    verdict: str
    b: np.ndarray
    # Analytic expectation that the point is symplectic
    predicate: bool
    extra: dict[str, float] = field(default_factory=dict)


def _run(fn, items: Sequence, threads: int | None):
    workers = threads or THREADS
    if workers <= 1 or len(items) < 64:
        return [fn(item) for item in items]
    return Parallel(n_jobs=workers, prefer="threads")(delayed(fn)(item) for item in items)


def theta_phi_symplectic_roots(lo: float, hi: float) -> list[float]:
    """Multiples of pi/2 in [lo, hi]: the angles where sin(2 phi) vanishes."""
    first = math.ceil(lo / (math.pi / 2) - 1e-12)
    last = math.floor(hi / (math.pi / 2) + 1e-12)
    return [k * math.pi / 2 for k in range(first, last + 1)]


def sweep_theta_phi(n: int, grid, tol: float = DEFAULT_TOL, threads: int | None = None,
                    include_anchors: bool = True, debug: bool = False) -> list[SweepRecord]:
    """
    Classify theta_phi at every grid angle.

    Args:
        n: Degrees of freedom
        grid: Angles in radians
        tol: Classification tolerance
        threads: Worker cap (defaults to LIOUFORM_THREADS)
        include_anchors: Also evaluate the exact angles 0, pi/4 and pi/2 inside the grid range
        debug: Print a one-line summary

    Returns:
        Records sorted by angle, with predicate = |sin 2phi| <= tol
    """
    angles = [float(phi) for phi in np.atleast_1d(np.asarray(grid, dtype=float))]
    if not angles:
        raise ValueError("grid must contain at least one angle")
    if include_anchors:
        lo, hi = min(angles), max(angles)
        angles.extend(phi for phi in THETA_PHI_ANCHORS if lo <= phi <= hi)
    angles = sorted(set(angles))

    def one(phi: float) -> SweepRecord:
        report = classify(make_family_form(FormFamilySpec("theta_phi", n, {"phi": phi})), tol)
        return SweepRecord(
            family="theta_phi",
            parameters={"phi": phi},
            identity_residual=report.identity_residual,
            hamiltonian_residual=report.hamiltonian_residual,
            verdict=report.verdict,
            b=report.b,
            predicate=abs(math.sin(2.0 * phi)) <= tol,
        )

    records = _run(one, angles, threads)
    if debug:
        hits = [r.parameters["phi"] for r in records if r.verdict == "symplectic"]
        print(f"theta_phi sweep: {len(records)} angles, symplectic at {hits}")
    return records


def sample_abc(n: int, count: int, seed: int, low: float = -1.0, high: float = 1.0,
               plane_fraction: float = 0.0) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    Draw (alpha, beta, gamma) triples uniformly from [low, high]^3n.

    A plane_fraction share of the samples is projected onto beta + gamma = 0 by
    setting gamma = -beta, so both verdicts occur.
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if not 0.0 <= plane_fraction <= 1.0:
        raise ValueError(f"plane_fraction must be in [0, 1], got {plane_fraction}")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(low, high, size=(count, 3, n))
    on_plane = rng.random(count) < plane_fraction
    samples = []
    for k in range(count):
        alpha, beta, gamma = draws[k]
        if on_plane[k]:
            gamma = -beta
        samples.append((alpha.copy(), beta.copy(), gamma.copy()))
    return samples


def _abc_parameters(alpha, beta, gamma) -> dict[str, float]:
    params: dict[str, float] = {}
    for name, values in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        for i, value in enumerate(np.atleast_1d(values)):
            params[f"{name}{i + 1}"] = float(value)
    return params


def classify_abc_plane(n: int, samples, tol: float = DEFAULT_TOL,
                       threads: int | None = None, debug: bool = False) -> list[SweepRecord]:
    """
    Classify abc_family forms and record the analytic predicate max_i |beta_i + gamma_i| <= tol.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("samples must not be empty")

    def one(sample) -> SweepRecord:
        alpha, beta, gamma = sample
        spec = FormFamilySpec("abc_family", n, {"alpha": alpha, "beta": beta, "gamma": gamma})
        report = classify(make_family_form(spec), tol)
        plane = float(np.max(np.abs(np.asarray(beta, float) + np.asarray(gamma, float))))
        return SweepRecord(
            family="abc_family",
            parameters=_abc_parameters(alpha, beta, gamma),
            identity_residual=report.identity_residual,
            hamiltonian_residual=report.hamiltonian_residual,
            verdict=report.verdict,
            b=report.b,
            predicate=plane <= tol,
        )

    records = _run(one, samples, threads)
    if debug:
        mismatches = sum((r.verdict == "symplectic") != r.predicate for r in records)
        print(f"abc plane: {len(records)} samples, {mismatches} verdict/predicate mismatches")
    return records


def sweep_s_lines(n: int, s_values, beta_values, tol: float = DEFAULT_TOL,
                  threads: int | None = None) -> list[SweepRecord]:
    """
    Walk the lines s = alpha - beta on the plane beta + gamma = 0.

    Every point should classify symplectic with b = diag(s I, -s I).
    """
    grid = [(float(s), float(beta)) for s in s_values for beta in beta_values]
    if not grid:
        raise ValueError("s_values and beta_values must not be empty")

    def one(point) -> SweepRecord:
        s, beta = point
        spec = FormFamilySpec("abc_plane", n, {"alpha": s + beta, "beta": beta})
        report = classify(make_family_form(spec), tol)
        expected_b = np.diag(np.concatenate([np.full(n, s), np.full(n, -s)]))
        params = _abc_parameters(np.full(n, s + beta), np.full(n, beta), np.full(n, -beta))
        return SweepRecord(
            family="abc_plane",
            parameters=params,
            identity_residual=report.identity_residual,
            hamiltonian_residual=report.hamiltonian_residual,
            verdict=report.verdict,
            b=report.b,
            predicate=True,
            extra={"s": s, "b_residual": float(np.max(np.abs(report.b - expected_b)))},
        )

    return _run(one, grid, threads)


def sweep_records_to_frame(records: Sequence[SweepRecord]) -> pd.DataFrame:
    """
    Tabulate sweep records.

    Rotation-family sweeps give columns phi, identity_residual,
    hamiltonian_residual, verdict. Sampled sweeps give alpha*, beta*, gamma*,
    identity_residual, hamiltonian_residual, verdict, predicate.
    """
    rows = []
    for record in records:
        row: dict[str, object] = dict(record.parameters)
        row.update(record.extra)
        row["identity_residual"] = record.identity_residual
        row["hamiltonian_residual"] = record.hamiltonian_residual
        row["verdict"] = record.verdict
        if record.family != "theta_phi":
            row["predicate"] = record.predicate
        rows.append(row)
    return pd.DataFrame(rows)
