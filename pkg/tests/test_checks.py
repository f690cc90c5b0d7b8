"""Tests for step Jacobians, symplecticity residuals and energy drift."""

import numpy as np
import pytest
from src.core.canonical import canonical_j0
from src.core.errors import InvalidDimensionError
from src.diagnostics.checks import (
    bounded_drift,
    energy_drift,
    step_jacobian,
    symplectic_residual,
)
from src.dynamics.integrator import (
    explicit_euler_scheme,
    identity_scheme,
    integrate,
    midpoint_scheme,
)
from src.dynamics.systems import builtin_system


@pytest.fixture
def pendulum():
    return builtin_system("pendulum", 1)


class TestStepJacobian:
    def test_identity_scheme(self, pendulum):
        jac = step_jacobian(identity_scheme(1), pendulum, [1.0, 0.5], 0.1)
        np.testing.assert_allclose(jac, np.eye(2), atol=1e-9)

    def test_midpoint_is_symplectic(self, pendulum):
        jac = step_jacobian(midpoint_scheme(1), pendulum, [1.0, 0.5], 0.05)
        assert symplectic_residual(jac) <= 1e-5

    def test_midpoint_two_dof(self):
        system = builtin_system("pendulum", 2)
        jac = step_jacobian(midpoint_scheme(2), system, [0.3, -0.8, 0.2, 0.1], 0.05)
        assert symplectic_residual(jac) <= 1e-5

    def test_explicit_euler_control(self, pendulum):
        jac = step_jacobian(explicit_euler_scheme(1), pendulum, [1.0, 0.5], 0.05)
        assert symplectic_residual(jac) >= 1e-3

    def test_epsilon_must_be_positive(self, pendulum):
        with pytest.raises(ValueError):
            step_jacobian(midpoint_scheme(1), pendulum, [1.0, 0.5], 0.05, fd_epsilon=0.0)


class TestSymplecticResidual:
    def test_identity(self):
        assert symplectic_residual(np.eye(4)) == 0.0

    def test_j0_itself(self):
        assert symplectic_residual(canonical_j0(2)) == 0.0

    def test_scaling(self):
        assert symplectic_residual(2.0 * np.eye(2)) == pytest.approx(3.0)

    def test_shear(self):
        assert symplectic_residual(np.array([[1.0, 0.7], [0.0, 1.0]])) == pytest.approx(0.0)

    @pytest.mark.parametrize("shape", [(3, 3), (2, 4)])
    def test_bad_shapes(self, shape):
        with pytest.raises(InvalidDimensionError):
            symplectic_residual(np.ones(shape))


class TestEnergyDrift:
    def test_identity_has_none(self, pendulum):
        traj = integrate(identity_scheme(1), pendulum, [1.0, 0.5], 0.1, 50)
        assert energy_drift(traj, pendulum) == (0.0, 0.0)

    def test_explicit_euler_grows(self):
        harmonic = builtin_system("harmonic", 1)
        traj = integrate(explicit_euler_scheme(1), harmonic, [1.0, 0.0], 0.1, 200)
        worst, final = energy_drift(traj, harmonic)
        # H grows by the factor 1 + h^2 every step
        assert final == pytest.approx(0.5 * (1.01 ** 200 - 1.0), rel=1e-9)
        assert worst == final
        assert not bounded_drift(traj, harmonic, window=20)

    def test_midpoint_bounded(self, pendulum):
        traj = integrate(midpoint_scheme(1), pendulum, [1.0, 0.5], 0.1, 2000)
        assert bounded_drift(traj, pendulum, window=1000)
