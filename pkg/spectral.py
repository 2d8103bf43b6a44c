"""
Continuity-tracked instantaneous eigensystems over a uniform time grid.

Diagonalization happens for all grid points at once; labelling and gauge
are then fixed in one sequential pass: each step's eigenvectors are
assigned to the previous step's branches by maximal overlap and rotated
so that successive overlaps are real and positive.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from config import CONFIG
from hamiltonians import HamiltonianModel, oscillating_qubit
from linalg_core import DomainError, NumericalFailure, check_hermitian_batch, dagger, eig_hermitian

logger = logging.getLogger("AdiabaticFrames.Spectral")


class TrackingError(NumericalFailure):
    """Eigenvector branches could not be followed across a grid step."""


class ResolutionError(DomainError):
    """Grid spacing violates the points-per-period rule."""

    def __init__(self, message: str, suggested_steps: int):
        self.suggested_steps = suggested_steps
        super().__init__(message)


def minimum_steps(t0: float, tau: float, max_frequency: float,
                  points_per_period: int = CONFIG.POINTS_PER_PERIOD) -> int:
    """Smallest step count with spacing <= (2pi/max_frequency)/points_per_period."""
    if max_frequency <= 0:
        return 2
    span = (tau - t0) * max_frequency * points_per_period / (2.0 * math.pi)
    return max(2, int(math.ceil(span - 1e-9)) + 1)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform times t0..tau inclusive."""

    t0: float
    tau: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.tau)):
            raise DomainError("grid bounds must be finite")
        if self.steps < 2:
            raise DomainError(f"grid needs at least 2 steps, got {self.steps}")
        if self.tau <= self.t0:
            raise DomainError(f"grid end tau={self.tau} must exceed t0={self.t0}")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.t0, self.tau, self.steps)

    @property
    def spacing(self) -> float:
        return (self.tau - self.t0) / (self.steps - 1)

    def refined(self) -> "TimeGrid":
        """Grid with half the spacing; every current point is kept."""
        return TimeGrid(self.t0, self.tau, 2 * (self.steps - 1) + 1)

    @classmethod
    def for_frequency(cls, t0: float, tau: float, max_frequency: float,
                      points_per_period: int = CONFIG.POINTS_PER_PERIOD) -> "TimeGrid":
        return cls(t0, tau, minimum_steps(t0, tau, max_frequency, points_per_period))

    @classmethod
    def for_model(cls, model: HamiltonianModel, t0: float, tau: float,
                  points_per_period: int = CONFIG.POINTS_PER_PERIOD) -> "TimeGrid":
        return cls.for_frequency(t0, tau, model.max_frequency, points_per_period)


def check_resolution(grid: TimeGrid, max_frequency: float,
                     points_per_period: int = CONFIG.POINTS_PER_PERIOD,
                     override: bool = False) -> None:
    """
    Enforce spacing <= (2pi/max_frequency)/points_per_period.

    Raises:
        ResolutionError: when violated and `override` is False.
    """
    needed = minimum_steps(grid.t0, grid.tau, max_frequency, points_per_period)
    if grid.steps >= needed:
        return
    message = (
        f"grid spacing {grid.spacing:.6g} us exceeds (2pi/{max_frequency:.6g})/{points_per_period}; "
        f"use at least {needed} steps (have {grid.steps})"
    )
    if override:
        logger.warning("Resolution rule overridden: %s", message)
        return
    raise ResolutionError(message, needed)


@dataclass(frozen=True, eq=False)
class EigensystemTrajectory:
    """
    Tracked eigenpairs: energies[i, n] and states[i, :, n] at grid point i.

    Branch n is labelled by ascending energy at t0 and followed by overlap.
    """

    grid: TimeGrid
    energies: np.ndarray
    states: np.ndarray
    max_overlap_deficit: float
    successive_overlaps: np.ndarray = field(repr=False)

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    @property
    def dim(self) -> int:
        return int(self.energies.shape[1])

    def level(self, n: int) -> np.ndarray:
        """State vectors of branch n, shape (steps, dim)."""
        if not 0 <= n < self.dim:
            raise DomainError(f"level {n} out of range for dimension {self.dim}")
        return self.states[:, :, n]

    def with_phases(self, phases: np.ndarray) -> "EigensystemTrajectory":
        """Copy with branch n multiplied by exp(i*phases[n]) at every time."""
        factors = np.exp(1j * np.asarray(phases, dtype=np.float64))
        return EigensystemTrajectory(
            grid=self.grid,
            energies=self.energies,
            states=self.states * factors[np.newaxis, np.newaxis, :],
            max_overlap_deficit=self.max_overlap_deficit,
            successive_overlaps=self.successive_overlaps,
        )


def diagonalize_on_grid(model: HamiltonianModel, times: np.ndarray):
    """Untracked eigh at every time; returns (energies, vectors)."""
    stack = check_hermitian_batch(model.sample(times), f"H(t) of {model.name}")
    return np.linalg.eigh(stack)


def track_eigensystem(model: HamiltonianModel, grid: TimeGrid, override_resolution: bool = False,
                      points_per_period: int = CONFIG.POINTS_PER_PERIOD) -> EigensystemTrajectory:
    """
    Diagonalize H on the grid and follow each branch continuously.

    Args:
        model: Hamiltonian family
        grid: Uniform time grid satisfying the resolution rule
        override_resolution: Accept a coarse grid (logged)
        points_per_period: Resolution rule parameter

    Returns:
        EigensystemTrajectory with gauge-fixed states

    Raises:
        TrackingError: a successive overlap fell below the continuity threshold.
    """
    check_resolution(grid, model.max_frequency, points_per_period, override_resolution)
    times = grid.points
    raw_energies, raw_vectors = diagonalize_on_grid(model, times)
    steps, dim = raw_energies.shape

    energies = np.empty_like(raw_energies)
    states = np.empty_like(raw_vectors)
    overlaps = np.ones((steps, dim))

    first_energies, first_vectors = eig_hermitian(model.hamiltonian(times[0]))
    energies[0] = first_energies
    states[0] = first_vectors

    threshold = CONFIG.CONTINUITY_THRESHOLD
    identity = np.arange(dim)
    swap = np.array([1, 0])
    for i in range(1, steps):
        prev = states[i - 1]
        vecs = raw_vectors[i]
        overlap = dagger(prev) @ vecs  # [previous branch, new column]
        magnitude = np.abs(overlap)
        if dim == 1:
            cols = identity
        elif dim == 2:
            swapped = magnitude[0, 1] + magnitude[1, 0] > magnitude[0, 0] + magnitude[1, 1]
            cols = swap if swapped else identity
        else:
            rows, cols = linear_sum_assignment(-magnitude)
            cols = cols[np.argsort(rows)]
        matched = overlap[identity, cols]
        size = np.abs(matched)
        if np.min(size) < threshold:
            n = int(np.argmin(size))
            raise TrackingError(
                f"grid too coarse near avoided crossing at t={times[i]:.9g} us "
                f"(branch {n} overlap {size[n]:.4f} < {threshold})",
                time=float(times[i]),
            )
        phase = np.conj(matched) / size
        states[i] = vecs[:, cols] * phase[np.newaxis, :]
        energies[i] = raw_energies[i, cols]
        overlaps[i] = size

    gram = dagger(states) @ states
    ortho = float(np.max(np.abs(gram - np.eye(dim))))
    if ortho > CONFIG.ORTHONORMALITY_ATOL:
        bad = int(np.argmax(np.max(np.abs(gram - np.eye(dim)), axis=(1, 2))))
        raise TrackingError(f"eigenvectors lost orthonormality ({ortho:.3e}) at t={times[bad]:.9g} us",
                            time=float(times[bad]))

    deficit = float(np.max(1.0 - overlaps))
    logger.debug("Tracked %s over %d points (dim %d); max overlap deficit %.3e",
                 model.name, steps, dim, deficit)
    return EigensystemTrajectory(
        grid=grid,
        energies=energies,
        states=states,
        max_overlap_deficit=deficit,
        successive_overlaps=overlaps,
    )


def time_derivative(values: np.ndarray, spacing: float) -> np.ndarray:
    """Central differences inside, second-order one-sided at both ends (axis 0)."""
    edge_order = 2 if values.shape[0] >= 3 else 1
    return np.gradient(values, spacing, axis=0, edge_order=edge_order)


def berry_term(traj: EigensystemTrajectory, n: int) -> np.ndarray:
    """
    gamma_n(t) = <E_n(t)|dE_n/dt> on the grid.

    The real part is a discretization artifact. Measured against the
    larger of max|gamma_n| and max|dE_n/dt|, it is logged above
    BERRY_REAL_RTOL and raises NumericalFailure above BERRY_REAL_FAIL_RTOL
    (the branch is not normalized, or the grid is too coarse).
    """
    vecs = traj.level(n)
    dvecs = time_derivative(vecs, traj.grid.spacing)
    gamma = np.einsum("ti,ti->t", np.conj(vecs), dvecs)
    if not gamma.size:
        return gamma
    scale = max(float(np.max(np.abs(gamma))), float(np.max(np.linalg.norm(dvecs, axis=1))))
    if scale > 0:
        worst = int(np.argmax(np.abs(gamma.real)))
        real_excess = float(abs(gamma.real[worst]))
        t = float(traj.times[worst])
        if real_excess > CONFIG.BERRY_REAL_FAIL_RTOL * scale:
            raise NumericalFailure(
                f"Berry term of level {n} has real part {real_excess:.3e} at t={t:.9g} us "
                f"(> {CONFIG.BERRY_REAL_FAIL_RTOL:.0e} * {scale:.3e})", time=t)
        if real_excess > CONFIG.BERRY_REAL_RTOL * scale:
            logger.warning("Berry term of level %d has real part %.3e at t=%.9g us (> %.0e * %.3e)",
                           n, real_excess, t, CONFIG.BERRY_REAL_RTOL, scale)
    return gamma


THETA_VARIANTS = ("arctan(omega0/omegaT)", "arctan(omegaT/omega0)")


@dataclass
class ClosedFormDiscrepancy:
    """Printed eigensystem formulas vs numerical diagonalization at one time."""

    t: float
    evaluable: bool
    numeric_energies: List[float]
    numeric_gap: float
    variants: Dict[str, Dict[str, object]] = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "t": self.t,
            "evaluable": self.evaluable,
            "numeric_energies": list(self.numeric_energies),
            "numeric_gap": self.numeric_gap,
            "variants": self.variants,
            "note": self.note,
        }


def _printed_eigensystem(omega0: float, theta: float, omega: float, t: float):
    wt = omega * t
    sigma = math.sqrt(3.0 + math.cos(2.0 * theta) - 2.0 * math.cos(2.0 * wt) * math.sin(theta) ** 2)
    energies, vectors = [], []
    for n in (0, 1):
        sign = -((-1) ** n)
        alpha = 0.5 * math.cos(theta) / math.sin(wt) * (-2.0 * ((-1) ** n) * math.cos(theta) + sigma)
        vec = np.array([sign * alpha, 1.0], dtype=np.complex128)
        vectors.append(vec / np.linalg.norm(vec))
        energies.append(sign * omega0 * sigma / 2.0)
    return sigma, energies, vectors


def closed_form_crosscheck(omega0: float, omegaT: float, omega: float, t: float) -> ClosedFormDiscrepancy:
    """
    Compare the printed eigensystem of w0 sz + wT sin(wt) sx with eig_hermitian.

    Both theta substitutions are evaluated. Never raises on mismatch; at
    sin(wt) = 0 the printed alpha_n is singular and the record says so.
    """
    model = oscillating_qubit(omega0, omegaT, omega, convention="printed")
    evals, evecs = eig_hermitian(model.hamiltonian(t))
    record = ClosedFormDiscrepancy(
        t=float(t),
        evaluable=True,
        numeric_energies=[float(e) for e in evals],
        numeric_gap=float(evals[-1] - evals[0]),
    )
    if abs(math.sin(omega * t)) <= 1e-12:
        record.evaluable = False
        record.note = "not evaluable at this t: csc(omega t) is singular"
        return record

    thetas = {
        THETA_VARIANTS[0]: math.atan2(omega0, omegaT),
        THETA_VARIANTS[1]: math.atan2(omegaT, omega0),
    }
    worst = 0.0
    for label, theta in thetas.items():
        sigma, energies, vectors = _printed_eigensystem(omega0, theta, omega, t)
        energy_dev = [abs(energies[n] - evals[n]) for n in (0, 1)]
        overlap_dev = [1.0 - abs(np.vdot(vectors[n], evecs[:, n])) for n in (0, 1)]
        record.variants[label] = {
            "theta": theta,
            "sigma": sigma,
            "printed_energies": energies,
            "energy_deviation": energy_dev,
            "state_overlap_deficit": overlap_dev,
        }
        worst = max(worst, max(energy_dev))
    if worst > 1e-9:
        record.note = "printed formulas disagree with numerical diagonalization"
        logger.info("Closed-form discrepancy at t=%.6g: max energy deviation %.3e", t, worst)
    return record
