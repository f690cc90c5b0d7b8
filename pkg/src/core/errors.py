"""Exceptions raised by the form, derivation and dynamics modules.

Every class derives from ValueError or RuntimeError so callers can catch the
builtin type.
"""

from __future__ import annotations

from typing import Any


class InvalidDimensionError(ValueError):
    """Matrix or vector has the wrong size for the requested degrees of freedom."""


class InvalidSpecError(ValueError):
    """A form family, system name or parameter set is malformed."""


class NotLiouvillianError(ValueError):
    """Matrix A fails the exactness condition A - A^T = J~."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class InvalidTransformError(ValueError):
    """Pullback requested through a singular linear map."""


class SingularityError(ValueError):
    """State lies outside the domain of the Hamiltonian."""

    trajectory: Any = None


class UnsupportedMethodError(ValueError):
    """Solver method cannot run with the given system."""


class StepSingularError(ValueError):
    """The linear system of an implicit step has no unique solution."""

    def __init__(self, message: str, h: float):
        super().__init__(message)
        self.h = h


class SolverFailureError(RuntimeError):
    """Implicit step did not converge within the iteration limit."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        # Set by integrate() to the states computed before the failure
        self.trajectory: Any = None
