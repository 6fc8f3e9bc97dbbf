"""Free-boundary reaction-diffusion toolkit.

Simulates u_t = u_xx + f(u) on a moving interval with Stefan front
conditions, computes semi-wave spreading speeds and critical lengths by
phase-plane shooting, classifies long-time behavior (spreading,
vanishing, transition), and brackets the sharp amplitude threshold.
"""

from .classify import (Certificate, Certifier, Outcome, ThresholdResult,
                       Verdict, certify, classify_run, sigma_star,
                       speed_estimate)
from .config import JobConfig, parse_config
from .nonlinearity import Kind, Nonlinearity, build, catalog
from .phase_plane import (FiniteWave, PhaseTrajectory, StationaryProfile,
                          critical_length, finite_wave, p0, phase_trajectory,
                          q_top, stationary_profile, time_map)
from .semiwave import (GroundState, SaddleTrajectory, SemiWaveResult, c0,
                       c_star, ground_state, perturbed_finite_wave,
                       saddle_trajectory)
from .solver import (InitialData, Run, Snapshot, SolverConfig,
                     SolverTolerances, State, Termination, boundary_flux,
                     front_fix, mass, run, step)

__version__ = "0.1.0"

__all__ = [
    "Kind", "Nonlinearity", "build", "catalog",
    "PhaseTrajectory", "FiniteWave", "StationaryProfile",
    "p0", "q_top", "time_map", "critical_length", "stationary_profile",
    "phase_trajectory", "finite_wave",
    "SaddleTrajectory", "SemiWaveResult", "GroundState",
    "saddle_trajectory", "c0", "c_star", "perturbed_finite_wave",
    "ground_state",
    "InitialData", "SolverTolerances", "SolverConfig", "State", "Snapshot",
    "Run", "Termination", "front_fix", "boundary_flux", "step", "run", "mass",
    "Outcome", "Certificate", "Verdict", "ThresholdResult", "Certifier",
    "certify", "classify_run", "sigma_star", "speed_estimate",
    "JobConfig", "parse_config",
]
