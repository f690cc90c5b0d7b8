"""Parameter sweeps, numerical checks and the verification suite."""

from .checks import energy_drift, step_jacobian, symplectic_residual
from .sweeps import SweepRecord, classify_abc_plane, sweep_records_to_frame, sweep_theta_phi
from .verification import VerificationItem, run_verification, verification_report

__all__ = [
    "energy_drift",
    "step_jacobian",
    "symplectic_residual",
    "SweepRecord",
    "classify_abc_plane",
    "sweep_records_to_frame",
    "sweep_theta_phi",
    "VerificationItem",
    "run_verification",
    "verification_report",
]
