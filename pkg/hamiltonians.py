"""
Time-parametrized Hamiltonian families.

A `HamiltonianModel` bundles H(t) with its first and second time
derivatives. Built-in models supply analytic derivatives; everything
else falls back to central finite differences whose step scales with the
drive period.

Units: hbar = 1, t in us, frequencies in rad/us.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from config import CONFIG
from linalg_core import (
    IDENTITY2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DomainError,
    check_hermitian,
    check_hermitian_batch,
    commutator,
    spectral_norm,
)

logger = logging.getLogger("AdiabaticFrames.Hamiltonians")

MatrixFn = Callable[[float], np.ndarray]

CONVENTIONS = ("printed", "transition")


def fd_step_for(omega: float) -> float:
    """Finite-difference step h = min(1e-3, 1e-3 * 2pi/omega)."""
    base = CONFIG.FD_BASE_STEP
    if omega and math.isfinite(omega) and omega != 0.0:
        return min(base, base * 2.0 * math.pi / abs(omega))
    return base


@dataclass(frozen=True, eq=False)
class HamiltonianModel:
    """
    A named family H(t) with derivative evaluators.

    `h0` is the dimensionless static generator used to build the model's
    resonant frame exp(i * drive_frequency * h0 * t); `max_frequency` is the
    fastest angular frequency present, used by the grid resolution rule.
    """

    name: str
    dim: int
    params: Mapping[str, float]
    evaluate: MatrixFn
    evaluate_dot: Optional[MatrixFn] = None
    evaluate_ddot: Optional[MatrixFn] = None
    max_frequency: float = 0.0
    fd_step: float = CONFIG.FD_BASE_STEP
    h0: Optional[np.ndarray] = field(default=None, repr=False)
    drive_frequency: float = 0.0
    time_range: Optional[Tuple[float, float]] = None

    def check_span(self, t0: float, tau: float) -> None:
        """Raise DomainError unless [t0, tau] lies inside the model's time range."""
        if self.time_range is None:
            return
        start, end = self.time_range
        if t0 < start or tau > end:
            raise DomainError(
                f"{self.name} is defined on [{start:g}, {end:g}] us; the grid [{t0:g}, {tau:g}] us leaves it"
            )

    def hamiltonian(self, t: float) -> np.ndarray:
        return np.asarray(self.evaluate(float(t)), dtype=np.complex128)

    def derivative(self, t: float) -> np.ndarray:
        """dH/dt at t (analytic when available)."""
        if self.evaluate_dot is not None:
            return np.asarray(self.evaluate_dot(float(t)), dtype=np.complex128)
        h = self.fd_step
        return (self.hamiltonian(t + h) - self.hamiltonian(t - h)) / (2.0 * h)

    def second_derivative(self, t: float) -> np.ndarray:
        """d2H/dt2 at t (analytic when available)."""
        if self.evaluate_ddot is not None:
            return np.asarray(self.evaluate_ddot(float(t)), dtype=np.complex128)
        h = self.fd_step
        if self.evaluate_dot is not None:
            return (self.derivative(t + h) - self.derivative(t - h)) / (2.0 * h)
        return (self.hamiltonian(t + h) - 2.0 * self.hamiltonian(t) + self.hamiltonian(t - h)) / (h * h)

    def sample(self, times: Sequence[float]) -> np.ndarray:
        return np.stack([self.hamiltonian(t) for t in times])

    def sample_derivative(self, times: Sequence[float]) -> np.ndarray:
        return np.stack([self.derivative(t) for t in times])

    def sample_second_derivative(self, times: Sequence[float]) -> np.ndarray:
        return np.stack([self.second_derivative(t) for t in times])

    @property
    def static_hamiltonian(self) -> Optional[np.ndarray]:
        """omega0 * h0 when both are known."""
        if self.h0 is None or "omega0" not in self.params:
            return None
        return float(self.params["omega0"]) * self.h0


def _warn_regime(model_name: str, omega0: float, coupling: float, coupling_name: str) -> None:
    if abs(omega0) <= CONFIG.REGIME_RATIO * abs(coupling):
        logger.warning(
            "%s: |omega0| = %.6g is not >> |%s| = %.6g (ratio %.3g <= %.0f); "
            "the weak-drive regime assumption does not hold",
            model_name, abs(omega0), coupling_name, abs(coupling),
            abs(omega0) / abs(coupling) if coupling else float("inf"), CONFIG.REGIME_RATIO,
        )


def _require_finite(**values: float) -> None:
    for key, val in values.items():
        if not math.isfinite(val):
            raise DomainError(f"{key} must be finite, got {val!r}")


def oscillating_qubit(omega0: float, omegaT: float, omega: float,
                      convention: str = "printed") -> HamiltonianModel:
    """
    Oscillating transverse field on a qubit.

    convention="printed":    H(t) = w0 sz + wT sin(wt) sx
    convention="transition": H(t) = (w0/2) sz + wT sin(wt) sx, so that w0 is
    the level splitting and resonance sits at w = w0.

    Args:
        omega0: Static splitting parameter (rad/us), nonzero
        omegaT: Transverse amplitude (rad/us)
        omega: Drive frequency (rad/us)
        convention: "printed" or "transition"

    Returns:
        HamiltonianModel with analytic first and second derivatives
    """
    _require_finite(omega0=omega0, omegaT=omegaT, omega=omega)
    if omega0 == 0:
        raise DomainError("omega0 must be nonzero")
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    _warn_regime("oscillating_qubit", omega0, omegaT, "omegaT")

    factor = 1.0 if convention == "printed" else 0.5
    h0 = factor * SIGMA_Z
    static = omega0 * h0

    def H(t: float) -> np.ndarray:
        return static + omegaT * math.sin(omega * t) * SIGMA_X

    def H_dot(t: float) -> np.ndarray:
        return (omega * omegaT * math.cos(omega * t)) * SIGMA_X

    def H_ddot(t: float) -> np.ndarray:
        return (-omega * omega * omegaT * math.sin(omega * t)) * SIGMA_X

    return HamiltonianModel(
        name=f"oscillating_qubit[{convention}]",
        dim=2,
        params={"omega0": omega0, "omegaT": omegaT, "omega": omega},
        evaluate=H,
        evaluate_dot=H_dot,
        evaluate_ddot=H_ddot,
        max_frequency=max(abs(omega), 2.0 * (factor * abs(omega0) + abs(omegaT))),
        fd_step=fd_step_for(omega),
        h0=h0,
        drive_frequency=omega,
    )


def nmr_rotating(omega0: float, omegaRF: float, omega: float) -> HamiltonianModel:
    """
    Spin-1/2 in a static field plus a rotating radio-frequency field.

    H(t) = (w0/2) sz + (w_rf/2) [cos(wt) sx + sin(wt) sy]
    """
    _require_finite(omega0=omega0, omegaRF=omegaRF, omega=omega)
    if omega0 == 0:
        raise DomainError("omega0 must be nonzero")
    _warn_regime("nmr_rotating", omega0, omegaRF, "omegaRF")

    h0 = 0.5 * SIGMA_Z
    static = omega0 * h0
    half_rf = 0.5 * omegaRF

    def H(t: float) -> np.ndarray:
        c, s = math.cos(omega * t), math.sin(omega * t)
        return static + half_rf * (c * SIGMA_X + s * SIGMA_Y)

    def H_dot(t: float) -> np.ndarray:
        c, s = math.cos(omega * t), math.sin(omega * t)
        return (half_rf * omega) * (-s * SIGMA_X + c * SIGMA_Y)

    def H_ddot(t: float) -> np.ndarray:
        c, s = math.cos(omega * t), math.sin(omega * t)
        return (-half_rf * omega * omega) * (c * SIGMA_X + s * SIGMA_Y)

    return HamiltonianModel(
        name="nmr_rotating",
        dim=2,
        params={"omega0": omega0, "omegaRF": omegaRF, "omega": omega},
        evaluate=H,
        evaluate_dot=H_dot,
        evaluate_ddot=H_ddot,
        max_frequency=max(abs(omega), abs(omega0) + abs(omegaRF)),
        fd_step=fd_step_for(omega),
        h0=h0,
        drive_frequency=omega,
    )


def linear_ramp(omega0: float, rate: float, horizon: float = 1.0) -> HamiltonianModel:
    """
    Landau-Zener style ramp H(t) = w0 sz + v t sx.

    `horizon` is the largest |t| the model will be sampled at; it only sets
    max_frequency for the resolution rule.
    """
    _require_finite(omega0=omega0, rate=rate, horizon=horizon)
    if omega0 == 0:
        raise DomainError("omega0 must be nonzero")
    static = omega0 * SIGMA_Z

    def H(t: float) -> np.ndarray:
        return static + (rate * t) * SIGMA_X

    def H_dot(t: float) -> np.ndarray:
        return rate * SIGMA_X

    def H_ddot(t: float) -> np.ndarray:
        return np.zeros((2, 2), dtype=np.complex128)

    return HamiltonianModel(
        name="linear_ramp",
        dim=2,
        params={"omega0": omega0, "rate": rate},
        evaluate=H,
        evaluate_dot=H_dot,
        evaluate_ddot=H_ddot,
        max_frequency=2.0 * math.hypot(omega0, rate * horizon),
        h0=np.array(SIGMA_Z),
        drive_frequency=0.0,
    )


@dataclass(frozen=True, eq=False)
class GenericDecomposition:
    """
    H(w, t) = omega0 H0 + omegaT H_T(w, t) with dimensionless H0, H_T.

    `ht_dot` / `ht_ddot` are optional analytic derivatives of H_T.
    """

    omega0: float
    omegaT: float
    H0: np.ndarray
    HT: MatrixFn
    omega: float
    ht_dot: Optional[MatrixFn] = None
    ht_ddot: Optional[MatrixFn] = None


def _sample_times(omega: float, count: int = 64) -> np.ndarray:
    period = 2.0 * math.pi / abs(omega) if omega else 1.0
    return np.linspace(0.0, period, count, endpoint=False) + 0.5 * period / count


def generic_decomposed(g: GenericDecomposition) -> HamiltonianModel:
    """
    Build the model H = w0 H0 + wT H_T(w, t).

    Raises:
        DomainError: dimension mismatch, non-Hermitian parts, or H_T commuting
            with H0 at every sample time.
    """
    _require_finite(omega0=g.omega0, omegaT=g.omegaT, omega=g.omega)
    H0 = check_hermitian(g.H0, "H0")
    dim = H0.shape[0]

    times = _sample_times(g.omega)
    samples = np.stack([np.asarray(g.HT(float(t)), dtype=np.complex128) for t in times])
    if samples.shape[1:] != (dim, dim):
        raise DomainError(f"H_T has shape {samples.shape[1:]} but H0 is {dim}x{dim}")
    check_hermitian_batch(samples, "H_T")

    comm_norms = [spectral_norm(commutator(s, H0)) for s in samples]
    if max(comm_norms) <= CONFIG.COMMUTATOR_ATOL:
        raise DomainError("H_T commutes with H0 at every sample time; the transverse field must not be parallel to H0")

    ht_norm = float(max(spectral_norm(s) for s in samples))
    h0_norm = float(spectral_norm(H0))
    _warn_regime("generic_decomposed", g.omega0 * h0_norm, g.omegaT * ht_norm, "omegaT*||H_T||")

    static = g.omega0 * H0

    def H(t: float) -> np.ndarray:
        return static + g.omegaT * np.asarray(g.HT(t), dtype=np.complex128)

    H_dot = None
    if g.ht_dot is not None:
        def H_dot(t: float) -> np.ndarray:
            return g.omegaT * np.asarray(g.ht_dot(t), dtype=np.complex128)

    H_ddot = None
    if g.ht_ddot is not None:
        def H_ddot(t: float) -> np.ndarray:
            return g.omegaT * np.asarray(g.ht_ddot(t), dtype=np.complex128)

    return HamiltonianModel(
        name="generic_decomposed",
        dim=dim,
        params={"omega0": g.omega0, "omegaT": g.omegaT, "omega": g.omega},
        evaluate=H,
        evaluate_dot=H_dot,
        evaluate_ddot=H_ddot,
        max_frequency=max(abs(g.omega), 2.0 * (abs(g.omega0) * h0_norm + abs(g.omegaT) * ht_norm)),
        fd_step=fd_step_for(g.omega),
        h0=H0,
        drive_frequency=g.omega,
    )


def two_qubit_decomposition(omega0: float, omegaT: float, omega: float) -> GenericDecomposition:
    """H0 = sz(x)I + I(x)sz, H_T = sin(wt) sx(x)I."""
    H0 = np.kron(SIGMA_Z, IDENTITY2) + np.kron(IDENTITY2, SIGMA_Z)
    XI = np.kron(SIGMA_X, IDENTITY2)
    return GenericDecomposition(
        omega0=omega0,
        omegaT=omegaT,
        H0=H0,
        HT=lambda t: math.sin(omega * t) * XI,
        omega=omega,
        ht_dot=lambda t: omega * math.cos(omega * t) * XI,
        ht_ddot=lambda t: -omega * omega * math.sin(omega * t) * XI,
    )


def tabulated_model(times: Sequence[float], matrices: np.ndarray, name: str = "tabulated") -> HamiltonianModel:
    """
    Model from H(t_i) samples on a uniform grid.

    H is interpolated entrywise with a cubic spline; dH/dt and d2H/dt2 are
    second-order finite differences of the samples, spline-interpolated.
    """
    t = np.asarray(times, dtype=np.float64)
    stack = check_hermitian_batch(np.asarray(matrices, dtype=np.complex128), name)
    if t.ndim != 1 or t.size != stack.shape[0]:
        raise DomainError(f"{name}: {t.size} times for {stack.shape[0]} matrices")
    if t.size < 4:
        raise DomainError(f"{name}: at least 4 samples are needed, got {t.size}")
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise DomainError(f"{name}: times must be strictly increasing")
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
        raise DomainError(f"{name}: time spacing must be uniform")

    dstack = np.gradient(stack, t, axis=0, edge_order=2)
    ddstack = np.gradient(dstack, t, axis=0, edge_order=2)

    def _spline(data: np.ndarray) -> CubicSpline:
        # real and imaginary parts side by side in the last axis
        return CubicSpline(t, np.stack([data.real, data.imag], axis=-1), axis=0, extrapolate=False)

    h_spline, d_spline, dd_spline = _spline(stack), _spline(dstack), _spline(ddstack)

    def _hermitize(parts: np.ndarray) -> np.ndarray:
        m = parts[..., 0] + 1j * parts[..., 1]
        return 0.5 * (m + m.conj().T)

    start, end = float(t[0]), float(t[-1])
    slack = 1e-9 * float(steps[0])

    def _inside(x: float) -> float:
        if x < start - slack or x > end + slack:
            raise DomainError(f"{name}: t={x:g} us is outside the table [{start:g}, {end:g}] us")
        return min(max(x, start), end)

    norms = np.linalg.norm(stack, ord=2, axis=(1, 2))
    dim = stack.shape[1]
    logger.info("Tabulated model %s: %d samples, dim %d, t in [%g, %g]", name, t.size, dim, t[0], t[-1])
    return HamiltonianModel(
        name=name,
        dim=dim,
        params={"t_start": float(t[0]), "t_end": float(t[-1]), "dt": float(steps[0])},
        evaluate=lambda x: _hermitize(h_spline(_inside(x))),
        evaluate_dot=lambda x: _hermitize(d_spline(_inside(x))),
        evaluate_ddot=lambda x: _hermitize(dd_spline(_inside(x))),
        max_frequency=2.0 * float(np.max(norms)),
        fd_step=float(steps[0]),
        time_range=(start, end),
    )

