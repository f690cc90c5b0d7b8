"""Hamiltonian systems and the generalized implicit Euler integrator."""

from .integrator import (
    SchemeSpec,
    SolverOptions,
    Trajectory,
    integrate,
    linear_step_matrix,
    midpoint_scheme,
    scheme_from_form,
    step,
)
from .systems import HamiltonianSystem, builtin_system, hamiltonian_vector_field

__all__ = [
    "SchemeSpec",
    "SolverOptions",
    "Trajectory",
    "integrate",
    "linear_step_matrix",
    "midpoint_scheme",
    "scheme_from_form",
    "step",
    "HamiltonianSystem",
    "builtin_system",
    "hamiltonian_vector_field",
]
