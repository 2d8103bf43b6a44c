"""
Closed-system density-matrix dynamics and adiabatic fidelity.

Propagation uses the midpoint exponential U_i = exp(-i H(t_i + dt/2) dt).
All step propagators are built in one batched eigendecomposition; only the
rho update itself is sequential.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from config import CONFIG
from frames import FrameSpec, transform_hamiltonian
from hamiltonians import HamiltonianModel
from linalg_core import (
    DomainError,
    NumericalFailure,
    basis_state,
    check_density_matrix,
    dagger,
    expm_hermitian_batch,
    projector,
    trace_norm_hermitian_batch,
    unitarity_defect,
)
from spectral import EigensystemTrajectory, TimeGrid, check_resolution, track_eigensystem

logger = logging.getLogger("AdiabaticFrames.Dynamics")

INITIAL_STATE_LABELS = ("0", "1", "plus", "minus")


class PropagationError(NumericalFailure):
    """Trace or purity drifted beyond tolerance during propagation."""


@dataclass(frozen=True, eq=False)
class PropagationResult:
    grid: TimeGrid
    states: np.ndarray
    unitarity_drift: float
    frame: str = "inertial"

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    @property
    def purity(self) -> np.ndarray:
        return np.einsum("tij,tji->t", self.states, self.states).real

    @property
    def populations(self) -> np.ndarray:
        """Diagonal of rho in the computational basis, shape (steps, dim)."""
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True, eq=False)
class FidelityTrace:
    grid: TimeGrid
    values: np.ndarray
    level: int

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    @property
    def minimum(self) -> float:
        return float(np.min(self.values))

    def to_dict(self) -> Dict[str, object]:
        return {
            "level": self.level,
            "terminal_fidelity": self.terminal,
            "min_fidelity": self.minimum,
            "min_fidelity_t": float(self.grid.points[int(np.argmin(self.values))]),
        }


def initial_density(state: Union[str, int], dim: int = 2) -> np.ndarray:
    """
    Pure initial state from a label: 0, 1, plus, minus, or a basis index.
    """
    label = str(state).strip().lower()
    if label in ("plus", "minus"):
        if dim != 2:
            raise DomainError(f"initial state '{label}' is defined for qubits only (dim={dim})")
        sign = 1.0 if label == "plus" else -1.0
        vec = np.array([1.0, sign], dtype=np.complex128) / np.sqrt(2.0)
        return projector(vec)
    try:
        index = int(label)
    except ValueError:
        raise DomainError(f"unknown initial state '{state}'; use 0, 1, plus, minus or a basis index")
    return projector(basis_state(dim, index))


def propagate(model: HamiltonianModel, rho0: np.ndarray, grid: TimeGrid,
              override_resolution: bool = False,
              points_per_period: int = CONFIG.POINTS_PER_PERIOD,
              frame: str = "inertial") -> PropagationResult:
    """
    Integrate drho/dt = -i[H(t), rho] on the grid.

    Args:
        model: Hamiltonian family
        rho0: Initial density matrix
        grid: Uniform time grid
        override_resolution: Accept a coarse grid (logged)
        frame: Tag stored on the result

    Returns:
        PropagationResult with rho at every grid point

    Raises:
        PropagationError: trace or purity left tolerance; the message names the step.
    """
    rho0 = check_density_matrix(rho0)
    if rho0.shape[0] != model.dim:
        raise DomainError(f"initial state dimension {rho0.shape[0]} does not match model dimension {model.dim}")
    check_resolution(grid, model.max_frequency, points_per_period, override_resolution)

    times = grid.points
    dt = grid.spacing
    midpoints = times[:-1] + 0.5 * dt
    steps_u = expm_hermitian_batch(model.sample(midpoints), dt)
    steps_u_dag = dagger(steps_u)
    drift = unitarity_defect(steps_u)

    states = np.empty((times.size, model.dim, model.dim), dtype=np.complex128)
    states[0] = rho0
    rho = rho0
    for i in range(times.size - 1):
        rho = steps_u[i] @ rho @ steps_u_dag[i]
        states[i + 1] = rho

    traces = np.real(np.einsum("tii->t", states))
    bad_trace = np.abs(traces - 1.0)
    if np.max(bad_trace) > CONFIG.TRACE_ATOL:
        i = int(np.argmax(bad_trace > CONFIG.TRACE_ATOL))
        raise PropagationError(
            f"trace of rho left 1 by {bad_trace[i]:.3e} at step {i} (t={times[i]:.9g} us)", time=float(times[i])
        )
    purity = np.einsum("tij,tji->t", states, states).real
    bad_purity = np.abs(purity - purity[0])
    if np.max(bad_purity) > CONFIG.PURITY_ATOL:
        i = int(np.argmax(bad_purity > CONFIG.PURITY_ATOL))
        raise PropagationError(
            f"purity drifted by {bad_purity[i]:.3e} at step {i} (t={times[i]:.9g} us)", time=float(times[i])
        )

    logger.debug("Propagated %s over %d steps (dt=%.3e us); unitarity drift %.2e",
                 model.name, times.size - 1, dt, drift)
    return PropagationResult(grid=grid, states=states, unitarity_drift=drift, frame=frame)


def select_reference_level(traj: EigensystemTrajectory, rho0: np.ndarray) -> int:
    """Tracked level with the largest population <E_n(t0)|rho0|E_n(t0)>."""
    vecs = traj.states[0]
    populations = np.real(np.einsum("in,ij,jn->n", np.conj(vecs), rho0, vecs))
    return int(np.argmax(populations))


def adiabatic_reference(traj: EigensystemTrajectory, level: int) -> np.ndarray:
    """|E_level(t)><E_level(t)| at every grid point."""
    vecs = traj.level(level)
    return np.einsum("ti,tj->tij", vecs, np.conj(vecs))


def fidelity(result: PropagationResult, reference: np.ndarray, level: int = 0,
             reference_grid: Optional[TimeGrid] = None) -> FidelityTrace:
    """
    F(t_i) = |Tr[rho(t_i) rho_ad(t_i)]|.

    Raises:
        DomainError: reference and result are not on the same grid.
    """
    reference = np.asarray(reference)
    if reference_grid is not None and reference_grid != result.grid:
        raise DomainError(f"fidelity needs one grid; got {result.grid} and {reference_grid}")
    if reference.shape != result.states.shape:
        raise DomainError(
            f"reference shape {reference.shape} does not match propagated states {result.states.shape}"
        )
    values = np.abs(np.einsum("tij,tji->t", result.states, reference))
    excess = float(np.max(values)) - 1.0
    if excess > 1e-9:
        logger.warning("Fidelity exceeds 1 by %.3e; reference may not be a projector", excess)
    return FidelityTrace(grid=result.grid, values=values, level=level)


def adiabatic_fidelity(model: HamiltonianModel, result: PropagationResult,
                       override_resolution: bool = False,
                       traj: Optional[EigensystemTrajectory] = None) -> Tuple[FidelityTrace, EigensystemTrajectory]:
    """Fidelity against the tracked level the initial state occupies."""
    if traj is None:
        traj = track_eigensystem(model, result.grid, override_resolution=override_resolution)
    level = select_reference_level(traj, result.states[0])
    trace = fidelity(result, adiabatic_reference(traj, level), level, traj.grid)
    return trace, traj


def rotate_states(frame: FrameSpec, result: PropagationResult) -> PropagationResult:
    """rho_O(t) = O(t) rho(t) O^dag(t)."""
    O = frame.unitary_batch(result.times)
    return PropagationResult(
        grid=result.grid,
        states=O @ result.states @ dagger(O),
        unitarity_drift=result.unitarity_drift,
        frame=frame.name,
    )


def rotated_frame_fidelity(model: HamiltonianModel, frame: FrameSpec, result: PropagationResult,
                           override_resolution: bool = False) -> FidelityTrace:
    """Fidelity of rho_O(t) against the instantaneous eigenstates of H_O(t)."""
    rotated = transform_hamiltonian(model, frame)
    trace, _ = adiabatic_fidelity(rotated, rotate_states(frame, result), override_resolution)
    return trace


@dataclass
class FrameConsistencyReport:
    """
    Deviation between the two routes to rho_O(t), on the grid where it was
    last measured. `history` holds the maximum deviation per refinement level.
    """

    max_deviation: float
    witness_time: float
    tolerance: float
    deviations: np.ndarray = field(repr=False)
    steps: int = 0
    halvings: int = 0
    extrapolated: bool = False
    history: List[float] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return self.max_deviation > self.tolerance

    def to_dict(self) -> Dict[str, object]:
        return {
            "max_deviation": float(self.max_deviation),
            "witness_t": float(self.witness_time),
            "tolerance": float(self.tolerance),
            "flagged": self.flagged,
            "steps": self.steps,
            "halvings": self.halvings,
            "extrapolated": self.extrapolated,
            "history": [float(d) for d in self.history],
        }


def _two_routes(model: HamiltonianModel, rotated_model: HamiltonianModel, frame: FrameSpec,
                rho0: np.ndarray, grid: TimeGrid, stride: int,
                override_resolution: bool) -> Tuple[np.ndarray, np.ndarray]:
    """O rho O^dag from the inertial run and the direct rotated run, at every `stride`-th point."""
    inertial = propagate(model, rho0, grid, override_resolution=override_resolution)
    conjugated = rotate_states(frame, inertial).states[::stride]
    O0 = frame.unitary(grid.t0)
    direct = propagate(rotated_model, O0 @ rho0 @ dagger(O0), grid,
                       override_resolution=override_resolution, frame=frame.name).states[::stride]
    return conjugated, direct


def frame_consistency_check(model: HamiltonianModel, frame: FrameSpec, rho0: np.ndarray, grid: TimeGrid,
                            tol: float = CONFIG.FRAME_CONSISTENCY_TOL,
                            override_resolution: bool = False,
                            max_halvings: int = CONFIG.FRAME_CONSISTENCY_MAX_HALVINGS,
                            extrapolate: bool = True) -> FrameConsistencyReport:
    """
    Propagate in the inertial frame and conjugate by O(t), then propagate the
    rotated equation directly from O(t0) rho0 O^dag(t0); compare in trace norm
    on the points of `grid`.

    The step is halved until the deviation is within `tol` or `max_halvings`
    is used up. The midpoint rule is symmetric, so its error is even in dt and
    (4 rho(dt/2) - rho(dt)) / 3 removes the leading term; with `extrapolate`
    each refined level is compared after that correction.
    """
    rho0 = check_density_matrix(rho0)
    rotated_model = transform_hamiltonian(model, frame)
    times = grid.points
    fine = grid
    previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
    history: List[float] = []
    halvings = 0
    while True:
        stride = 2 ** halvings
        conjugated, direct = _two_routes(model, rotated_model, frame, rho0, fine, stride, override_resolution)
        if extrapolate and previous is not None:
            a = (4.0 * conjugated - previous[0]) / 3.0
            b = (4.0 * direct - previous[1]) / 3.0
        else:
            a, b = conjugated, direct
        deviations = trace_norm_hermitian_batch(a - b)
        history.append(float(np.max(deviations)))
        logger.debug("Frame consistency %s: %d steps, deviation %.3e", frame.name, fine.steps, history[-1])
        if history[-1] <= tol or halvings >= max_halvings:
            break
        previous = (conjugated, direct)
        fine = fine.refined()
        halvings += 1

    i = int(np.argmax(deviations))
    report = FrameConsistencyReport(
        max_deviation=float(deviations[i]),
        witness_time=float(times[i]),
        tolerance=tol,
        deviations=deviations,
        steps=fine.steps,
        halvings=halvings,
        extrapolated=extrapolate and halvings > 0,
        history=history,
    )
    if report.flagged:
        logger.warning("Frame consistency deviation %.3e at t=%.6g us exceeds %.0e in %s after %d halving(s)",
                       report.max_deviation, report.witness_time, tol, frame.name, halvings)
    else:
        logger.info("Frame consistency deviation %.3e (%s, %d steps)", report.max_deviation, frame.name, fine.steps)
    return report


TRACE_HEADER_BASE = ["t_us", "fidelity", "purity"]


def trace_table(result: PropagationResult, trace: FidelityTrace,
                rotated: Optional[FidelityTrace] = None) -> Tuple[List[str], List[List[float]]]:
    """Header and rows for the per-time CSV export."""
    dim = result.states.shape[1]
    header = TRACE_HEADER_BASE + [f"population_{n}" for n in range(dim)]
    if rotated is not None:
        header.append("fidelity_rotated")
    populations = result.populations
    purity = result.purity
    rows = []
    for i, t in enumerate(result.times):
        row = [float(t), float(trace.values[i]), float(purity[i])] + [float(p) for p in populations[i]]
        if rotated is not None:
            row.append(float(rotated.values[i]))
        rows.append(row)
    return header, rows
