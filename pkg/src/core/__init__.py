"""Forms, canonical structures and the derivation pipeline."""

from .canonical import (
    canonical_j0,
    canonical_jtilde,
    is_hamiltonian_matrix,
    is_symplectic_matrix,
    is_symplectic_rotation,
)
from .derivation import (
    ImplicitMapPair,
    SymplecticityReport,
    classify,
    implicit_map,
    kernel_basis,
)
from .forms import (
    FormFamilySpec,
    LiouvillianFormMatrix,
    form_from_matrix,
    make_family_form,
    matricial_decomposition,
    pullback_form,
)

__all__ = [
    "canonical_j0",
    "canonical_jtilde",
    "is_hamiltonian_matrix",
    "is_symplectic_matrix",
    "is_symplectic_rotation",
    "ImplicitMapPair",
    "SymplecticityReport",
    "classify",
    "implicit_map",
    "kernel_basis",
    "FormFamilySpec",
    "LiouvillianFormMatrix",
    "form_from_matrix",
    "make_family_form",
    "matricial_decomposition",
    "pullback_form",
]
