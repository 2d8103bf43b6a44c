"""
Configuration constants for AdiabaticFrames.

This module centralizes the numerical tolerances, defaults and the
reference parameters of the oscillating-qubit experiment so that every
module reads the same values.

Units: hbar = 1, time in microseconds, angular frequency in rad/us.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple


@dataclass(frozen=True)
class AppConfig:
    """Immutable application configuration."""

    # Application Info
    APP_NAME: str = "AdiabaticFrames"
    APP_VERSION: str = "1.0.0"

    # File Settings
    APP_LOG_FILE: str = "adiabatic_frames.log"
    DEFAULT_OUTPUT_DIR: str = "results"
    SUMMARY_FILE: str = "summary.json"
    CRASH_LOG_FILE: str = "crash.log"

    # Logging Settings
    LOG_MAX_BYTES: int = 5 * 1024 * 1024  # 5MB
    LOG_BACKUP_COUNT: int = 3

    # Linear algebra tolerances
    HERMITIAN_RTOL: float = 1e-12
    UNITARY_ATOL: float = 1e-10
    STATE_NORM_ATOL: float = 1e-10
    DENSITY_ATOL: float = 1e-10

    # Eigen-tracking
    CONTINUITY_THRESHOLD: float = 0.9
    ORTHONORMALITY_ATOL: float = 1e-10
    BERRY_REAL_RTOL: float = 5e-3
    BERRY_REAL_FAIL_RTOL: float = 5e-2

    # Grid resolution rule: points per fastest period
    POINTS_PER_PERIOD: int = 40
    FD_BASE_STEP: float = 1e-3  # finite-difference step, scaled by drive period

    # Adiabatic conditions
    GAP_ATOL: float = 1e-12
    POLE_ATOL: float = 1e-12
    ZERO_ELEMENT_RTOL: float = 1e-12

    # Dynamics invariants
    TRACE_ATOL: float = 1e-8
    PURITY_ATOL: float = 1e-7
    FRAME_CONSISTENCY_TOL: float = 1e-6
    FRAME_CONSISTENCY_MAX_HALVINGS: int = 6

    # Frames / theorems
    COMMUTATOR_ATOL: float = 1e-12
    CONSTANT_HO_ATOL: float = 1e-9
    THEOREM_TOLERANCE: float = 1e-3
    REGIME_RATIO: float = 10.0

    # Reference experiment (rad/us, us)
    REFERENCE_OMEGA0: float = 2.0 * math.pi * 1.0
    REFERENCE_OMEGA_T: float = 2.0 * math.pi * 0.02
    REFERENCE_TAU: float = 100.0
    REFERENCE_A_VALUES: Tuple[float, ...] = (10.0, 1.0173, 1.0, 0.9827, 0.1)

    # Sweep defaults
    SWEEP_LOG_MIN: float = 0.1
    SWEEP_LOG_MAX: float = 10.0
    SWEEP_LOG_POINTS: int = 61
    SWEEP_MERGE_RTOL: float = 1e-9

    # NMR case study: far-from-resonance drive sits 50 omega_rf below omega0
    NMR_OMEGA_RF: float = 2.0 * math.pi * 0.002
    NMR_FAR_DETUNING_RATIO: float = 50.0
    NMR_TAU: float = 300.0
    NMR_THEOREM_TOLERANCE: float = 0.05

    # omegaT -> 0 limit: printed rotated form against the numeric one at fixed a
    OMEGA_T_LIMIT_FACTORS: Tuple[float, ...] = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 0.0)
    OMEGA_T_LIMIT_A: float = 10.0

    # Worker pool
    DEFAULT_WORKERS: int = 4
    MIN_WORKERS: int = 1
    MAX_WORKERS: int = 64

    # Output formatting
    CSV_SIGNIFICANT_DIGITS: int = 17

    # Exit codes
    EXIT_OK: int = 0
    EXIT_CONFIG_ERROR: int = 2
    EXIT_NUMERICAL_FAILURE: int = 3


# Global config instance
CONFIG = AppConfig()
