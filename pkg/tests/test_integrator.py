"""Tests for the generalized implicit Euler step, trajectories and exact linear steps."""

import math

import numpy as np
import pytest
from src.core.derivation import SYMPLECTIC, ImplicitMapPair, classify_pair
from src.core.errors import (
    InvalidDimensionError,
    InvalidSpecError,
    SingularityError,
    SolverFailureError,
    StepSingularError,
    UnsupportedMethodError,
)
from src.core.forms import FormFamilySpec, make_family_form
from src.diagnostics.checks import symplectic_residual
from src.dynamics.integrator import (
    SchemeSpec,
    SolverOptions,
    euler_scheme,
    explicit_euler_scheme,
    identity_scheme,
    integrate,
    linear_step_matrix,
    midpoint_scheme,
    scheme_from_form,
    step,
    trajectory_to_frame,
)
from src.dynamics.systems import HamiltonianSystem, builtin_system


@pytest.fixture
def pendulum():
    return builtin_system("pendulum", 1)


@pytest.fixture
def harmonic():
    return builtin_system("harmonic", 1)


@pytest.fixture
def coupled_matrix():
    rng = np.random.default_rng(11)
    x = rng.uniform(-1.0, 1.0, size=(4, 4))
    return 0.5 * (x + x.T)


def theta_scheme(phi, n=1):
    return scheme_from_form(make_family_form(FormFamilySpec("theta_phi", n, {"phi": phi})))


class TestStep:
    def test_identity_scheme_returns_state(self, pendulum):
        z0 = np.array([1.0, 0.5])
        zh, iterations = step(identity_scheme(1), pendulum, z0, 0.3)
        np.testing.assert_array_equal(zh, z0)
        assert iterations == 1

    def test_midpoint_consistent_as_h_shrinks(self, harmonic):
        z0 = np.array([1.0, 0.0])
        zh, _ = step(midpoint_scheme(1), harmonic, z0, 1e-8)
        np.testing.assert_allclose(zh, z0, atol=1e-7)

    @pytest.mark.parametrize("method", ["fixed_point", "newton"])
    def test_midpoint_matches_linear_solve(self, coupled_matrix, method):
        system = builtin_system("quadratic", 2, {"matrix": coupled_matrix})
        scheme = midpoint_scheme(2)
        z0 = np.array([0.5, -0.2, 0.1, 0.8])
        zh, _ = step(scheme, system, z0, 0.1, SolverOptions(method=method))
        expected = linear_step_matrix(scheme, coupled_matrix, 0.1) @ z0
        np.testing.assert_allclose(zh, expected, rtol=0, atol=1e-12)

    def test_newton_agrees_with_fixed_point(self, pendulum):
        z0 = np.array([1.0, 0.5])
        a, _ = step(midpoint_scheme(1), pendulum, z0, 0.05)
        b, _ = step(midpoint_scheme(1), pendulum, z0, 0.05, SolverOptions(method="newton"))
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_midpoint_reversible(self, pendulum):
        rng = np.random.default_rng(7)
        for z0 in rng.uniform(-2.0, 2.0, size=(100, 2)):
            zh, _ = step(midpoint_scheme(1), pendulum, z0, 0.1)
            back, _ = step(midpoint_scheme(1), pendulum, zh, -0.1)
            np.testing.assert_allclose(back, z0, rtol=0, atol=1e-12)

    def test_non_convergence(self, harmonic):
        opts = SolverOptions(max_iterations=1)
        with pytest.raises(SolverFailureError) as info:
            step(midpoint_scheme(1), harmonic, [1.0, 0.0], 0.1, opts)
        assert info.value.iterations == 1
        assert info.value.residual > 0

    def test_newton_needs_hessian(self):
        system = HamiltonianSystem(
            n=1, name="nohess", energy=lambda z: 0.5 * float(z @ z), gradient=lambda z: z
        )
        with pytest.raises(UnsupportedMethodError):
            step(midpoint_scheme(1), system, [1.0, 0.0], 0.1, SolverOptions(method="newton"))

    def test_zero_step_rejected(self, harmonic):
        with pytest.raises(InvalidSpecError):
            step(midpoint_scheme(1), harmonic, [1.0, 0.0], 0.0)

    def test_dimension_mismatch(self, harmonic):
        with pytest.raises(InvalidDimensionError):
            step(midpoint_scheme(2), harmonic, [1.0, 0.0], 0.1)
        with pytest.raises(InvalidDimensionError):
            step(midpoint_scheme(1), harmonic, [1.0, 0.0, 0.0], 0.1)

    def test_bad_solver_options(self):
        with pytest.raises(InvalidSpecError):
            SolverOptions(method="bisection")
        with pytest.raises(InvalidSpecError):
            SolverOptions(max_iterations=0)


class TestIntegrate:
    def test_identity_scheme_is_constant(self, pendulum):
        traj = integrate(identity_scheme(1), pendulum, [1.0, 0.5], 0.1, 100)
        assert len(traj) == 101
        np.testing.assert_array_equal(traj.states, np.tile([1.0, 0.5], (101, 1)))

    def test_midpoint_conserves_harmonic_energy(self, harmonic):
        traj = integrate(midpoint_scheme(1), harmonic, [1.0, 0.0], 0.1, 1000)
        assert np.max(np.abs(traj.energies - traj.energies[0])) <= 1e-10

    def test_zero_steps(self, harmonic):
        traj = integrate(midpoint_scheme(1), harmonic, [1.0, 0.0], 0.1, 0)
        assert len(traj) == 1
        assert traj.solver_iterations.tolist() == [0]

    def test_positive_step_required(self, harmonic):
        with pytest.raises(InvalidSpecError):
            integrate(midpoint_scheme(1), harmonic, [1.0, 0.0], -0.1, 10)

    def test_negative_steps_rejected(self, harmonic):
        with pytest.raises(InvalidSpecError):
            integrate(midpoint_scheme(1), harmonic, [1.0, 0.0], 0.1, -1)

    def test_failure_keeps_partial_trajectory(self, harmonic):
        opts = SolverOptions(max_iterations=1)
        with pytest.raises(SolverFailureError) as info:
            integrate(midpoint_scheme(1), harmonic, [1.0, 0.0], 0.1, 5, opts)
        assert len(info.value.trajectory) == 1

    def test_singular_newton_jacobian_is_solver_failure(self):
        # I - h J0 M Ph = diag(0, 1) for this system and scheme
        system = builtin_system("quadratic", 1, {"matrix": [[0.0, 1.0], [1.0, 0.0]]})
        opts = SolverOptions(method="newton")
        with pytest.raises(SolverFailureError) as info:
            integrate(euler_scheme(1, 0.0), system, [1.0, 0.5], 1.0, 3, opts)
        assert len(info.value.trajectory) == 1
        assert isinstance(info.value.__cause__, StepSingularError)

    def test_singular_start(self):
        kepler = builtin_system("kepler", 2)
        with pytest.raises(SingularityError):
            integrate(midpoint_scheme(2), kepler, [0.0, 0.0, 1.0, 0.0], 0.01, 10)

    def test_kepler_circular_orbit(self):
        kepler = builtin_system("kepler", 2)
        traj = integrate(midpoint_scheme(2), kepler, [1.0, 0.0, 0.0, 1.0], 0.01, 700)
        radii = np.linalg.norm(traj.states[:, :2], axis=1)
        np.testing.assert_allclose(radii, 1.0, atol=1e-3)

    def test_frame_columns(self, harmonic):
        traj = integrate(midpoint_scheme(1), harmonic, [1.0, 0.0], 0.1, 3)
        frame = trajectory_to_frame(traj)
        assert list(frame.columns) == ["step", "t", "q1", "p1", "H", "deltaH"]
        assert frame["step"].tolist() == [0, 1, 2, 3]
        assert frame["t"].iloc[3] == pytest.approx(0.3)
        assert frame["deltaH"].iloc[0] == 0.0


class TestNamedSchemes:
    def test_euler_endpoints(self):
        assert euler_scheme(1, 0.0).label == "euler-phi-0"
        assert euler_scheme(1, math.pi / 2).label == "euler-phi-pi/2"

    def test_euler_rejects_interior_angle(self):
        with pytest.raises(InvalidSpecError):
            euler_scheme(1, 0.3)

    def test_explicit_euler_blocks(self):
        rho = explicit_euler_scheme(2).rho
        np.testing.assert_array_equal(rho.p0, np.eye(4))
        np.testing.assert_array_equal(rho.ph, np.zeros((4, 4)))


class TestLinearStepMatrix:
    def test_null_map_gives_identity(self):
        np.testing.assert_array_equal(
            linear_step_matrix(identity_scheme(1), np.eye(2), 0.3), np.eye(2)
        )

    @pytest.mark.parametrize("h", [1e-3, 1e-2, 1e-1, 0.5])
    def test_symplectic_schemes(self, coupled_matrix, h):
        for scheme in (midpoint_scheme(2), euler_scheme(2, 0.0), euler_scheme(2, math.pi / 2)):
            m = linear_step_matrix(scheme, coupled_matrix, h)
            assert symplectic_residual(m) <= 1e-12, scheme.label

    def test_explicit_euler_control(self):
        m = linear_step_matrix(explicit_euler_scheme(1), np.eye(2), 0.1)
        assert symplectic_residual(m) == pytest.approx(0.01)

    def test_unequal_scaling_breaks_symplecticity(self):
        spec = FormFamilySpec("abc_family", 2, {
            "alpha": [0.0, 0.0], "beta": [0.2, -0.1], "gamma": [0.2, -0.1],
        })
        scheme = scheme_from_form(make_family_form(spec))
        coupled = np.eye(4)
        coupled[0, 1] = coupled[1, 0] = 0.5
        assert symplectic_residual(linear_step_matrix(scheme, coupled, 0.1)) >= 1e-3

    def test_rotation_family_member_is_rescaled_symplectic(self, coupled_matrix):
        # P0 + Ph = kappa I with kappa = 1 - sin(2 phi): the step is the symplectic
        # scheme (P0, Ph)/kappa applied to kappa M
        scheme = theta_scheme(math.pi / 3, 2)
        kappa = 1.0 - math.sin(2 * math.pi / 3)
        scaled = ImplicitMapPair.from_blocks(scheme.rho.p0 / kappa, scheme.rho.ph / kappa)
        assert classify_pair(scaled).verdict == SYMPLECTIC
        m = linear_step_matrix(scheme, coupled_matrix, 0.1)
        expected = linear_step_matrix(SchemeSpec(scaled, "scaled"), kappa * coupled_matrix, 0.1)
        np.testing.assert_allclose(m, expected, atol=1e-12)
        assert symplectic_residual(m) <= 1e-12

    def test_singular_system(self):
        backward = SchemeSpec(ImplicitMapPair.from_blocks(np.zeros((2, 2)), np.eye(2)), "backward")
        with pytest.raises(StepSingularError) as info:
            linear_step_matrix(backward, np.diag([1.0, -1.0]), 1.0)
        assert info.value.h == 1.0

    def test_wrong_matrix_size(self):
        with pytest.raises(InvalidDimensionError):
            linear_step_matrix(midpoint_scheme(1), np.eye(4), 0.1)
