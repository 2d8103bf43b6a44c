"""
Non-inertial frames O(t) = exp(i * rate * G * t) and frame-equivalence checks.

The rotated Hamiltonian is H_O = O H O^dag + i dO/dt O^dag, where the second
term (the fictitious potential) equals -rate * G for this family.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from config import CONFIG
from hamiltonians import HamiltonianModel, oscillating_qubit
from linalg_core import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DomainError,
    NumericalFailure,
    check_hermitian,
    dagger,
    eig_hermitian,
    spectral_norm_batch,
)
from spectral import EigensystemTrajectory, TimeGrid, track_eigensystem

logger = logging.getLogger("AdiabaticFrames.Frames")


class TheoremPreconditionError(NumericalFailure):
    """A theorem's hypothesis does not hold on the grid."""


@dataclass(frozen=True, eq=False)
class FrameSpec:
    """O(t) = exp(i * rate * G * t) for a Hermitian generator G."""

    generator: np.ndarray
    rate: float
    name: str = "frame"
    _evals: np.ndarray = field(init=False, repr=False)
    _evecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        G = check_hermitian(self.generator, "frame generator")
        if not math.isfinite(self.rate):
            raise DomainError(f"frame rate must be finite, got {self.rate!r}")
        evals, evecs = np.linalg.eigh(G)
        object.__setattr__(self, "generator", G)
        object.__setattr__(self, "_evals", evals)
        object.__setattr__(self, "_evecs", evecs)

    @property
    def dim(self) -> int:
        return int(self.generator.shape[0])

    @property
    def spread(self) -> float:
        """Largest minus smallest eigenvalue of G."""
        return float(self._evals[-1] - self._evals[0])

    def unitary(self, t: float) -> np.ndarray:
        phases = np.exp(1j * self.rate * self._evals * float(t))
        return (self._evecs * phases) @ dagger(self._evecs)

    def unitary_batch(self, times: np.ndarray) -> np.ndarray:
        phases = np.exp(1j * self.rate * np.outer(np.asarray(times, dtype=np.float64), self._evals))
        return (self._evecs[np.newaxis] * phases[:, np.newaxis, :]) @ dagger(self._evecs)[np.newaxis]

    def unitary_dot(self, t: float) -> np.ndarray:
        return 1j * self.rate * self.generator @ self.unitary(t)

    def fictitious_term(self) -> np.ndarray:
        """i dO/dt O^dag = -rate * G."""
        return -self.rate * self.generator

    def to_dict(self) -> Dict[str, object]:
        return {"name": self.name, "rate": self.rate, "generator": _matrix_to_json(self.generator)}


def _matrix_to_json(m: np.ndarray) -> List[List[List[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def identity_frame(dim: int) -> FrameSpec:
    return FrameSpec(np.zeros((dim, dim), dtype=np.complex128), 0.0, name="identity")


def sigma_z_frame(rate: float, half: bool = False) -> FrameSpec:
    """exp(i rate t sz), or exp(i (rate/2) t sz) when `half`."""
    G = 0.5 * SIGMA_Z if half else np.array(SIGMA_Z)
    label = "exp(i*(w/2)*t*sz)" if half else "exp(i*w*t*sz)"
    return FrameSpec(G, rate, name=label)


def resonant_frame(model: HamiltonianModel, rate: Optional[float] = None) -> FrameSpec:
    """exp(i * w * H0 * t) built from the model's static generator and drive."""
    if model.h0 is None:
        raise DomainError(f"model {model.name} has no static generator for a resonant frame")
    w = model.drive_frequency if rate is None else rate
    return FrameSpec(model.h0, w, name="exp(i*w*H0*t)")


def transform_hamiltonian(model: HamiltonianModel, frame: FrameSpec) -> HamiltonianModel:
    """
    Rotated model H_O(t) = O H O^dag - rate * G.

    Derivatives follow from O = exp(i w G t):
        dH_O  = O (dH + i w [G, H]) O^dag
        d2H_O = O (d2H + 2 i w [G, dH] - w^2 [G, [G, H]]) O^dag
    """
    if frame.dim != model.dim:
        raise DomainError(f"frame dimension {frame.dim} does not match model dimension {model.dim}")
    G = frame.generator
    w = frame.rate
    fictitious = frame.fictitious_term()

    def conj(t: float, m: np.ndarray) -> np.ndarray:
        O = frame.unitary(t)
        return O @ m @ dagger(O)

    def H(t: float) -> np.ndarray:
        return conj(t, model.hamiltonian(t)) + fictitious

    def H_dot(t: float) -> np.ndarray:
        h = model.hamiltonian(t)
        return conj(t, model.derivative(t) + 1j * w * (G @ h - h @ G))

    def H_ddot(t: float) -> np.ndarray:
        h = model.hamiltonian(t)
        hd = model.derivative(t)
        gh = G @ h - h @ G
        return conj(t, model.second_derivative(t) + 2j * w * (G @ hd - hd @ G) - w * w * (G @ gh - gh @ G))

    params = dict(model.params)
    params["frame_rate"] = w
    return HamiltonianModel(
        name=f"{model.name}@{frame.name}",
        dim=model.dim,
        params=params,
        evaluate=H,
        evaluate_dot=H_dot,
        evaluate_ddot=H_ddot,
        max_frequency=model.max_frequency + abs(w) * frame.spread,
        fd_step=model.fd_step,
        h0=model.h0,
        drive_frequency=model.drive_frequency,
        time_range=model.time_range,
    )


def classify_regime(omega0: float, omegaT: float, omega: float) -> str:
    """far-from-resonance, near-resonance or intermediate, from |w0 - w| against |wT|."""
    detuning = abs(omega0 - omega)
    if detuning >= CONFIG.REGIME_RATIO * abs(omegaT):
        return "far-from-resonance"
    if detuning <= abs(omegaT):
        return "near-resonance"
    return "intermediate"


@dataclass(eq=False)
class TheoremVerdict:
    """Outcome of a frame-theorem check; holds iff max_deviation <= tolerance."""

    condition: str
    max_deviation: float
    tolerance: float
    witness_time: float
    witness_index: int
    per_index: List[float]
    times: np.ndarray = field(repr=False)
    deviations: np.ndarray = field(repr=False)

    @property
    def verdict(self) -> str:
        return "holds" if self.max_deviation <= self.tolerance else "violated"

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def to_dict(self) -> Dict[str, object]:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "max_deviation": float(self.max_deviation),
            "tolerance": float(self.tolerance),
            "witness": {"t": float(self.witness_time), "index": int(self.witness_index)},
            "per_index": [float(x) for x in self.per_index],
        }

    def trace_rows(self) -> List[List[float]]:
        return [[float(t)] + [float(x) for x in row] for t, row in zip(self.times, self.deviations)]


def _verdict(condition: str, times: np.ndarray, amplitudes: np.ndarray,
             reference: np.ndarray, tol: float) -> TheoremVerdict:
    deviations = np.abs(amplitudes - reference[np.newaxis, :])
    flat = int(np.argmax(deviations))
    i, m = np.unravel_index(flat, deviations.shape)
    verdict = TheoremVerdict(
        condition=condition,
        max_deviation=float(deviations[i, m]),
        tolerance=float(tol),
        witness_time=float(times[i]),
        witness_index=int(m),
        per_index=[float(x) for x in np.max(deviations, axis=0)],
        times=times,
        deviations=deviations,
    )
    logger.info("%s: max deviation %.3e at t=%.6g us (index %d) -> %s (tol %.1e)",
                condition, verdict.max_deviation, verdict.witness_time, verdict.witness_index,
                verdict.verdict, tol)
    return verdict


def theorem1_check(model: HamiltonianModel, frame: FrameSpec, k: int, grid: TimeGrid,
                   tol: float = CONFIG.THEOREM_TOLERANCE,
                   override_resolution: bool = False,
                   traj: Optional[EigensystemTrajectory] = None,
                   traj_o: Optional[EigensystemTrajectory] = None) -> TheoremVerdict:
    """
    |<E_m^O(t)| O(t) |E_k(t)>| compared with its t0 value for every m.

    Args:
        model: Inertial Hamiltonian
        frame: Frame O(t)
        k: Tracked inertial level the system starts in
        grid: Time grid for both trajectories
        tol: Absolute deviation tolerance
        traj, traj_o: Already tracked inertial / rotated eigensystems on `grid`
    """
    if traj is None:
        traj = track_eigensystem(model, grid, override_resolution=override_resolution)
    if traj_o is None:
        rotated = transform_hamiltonian(model, frame)
        traj_o = track_eigensystem(rotated, grid, override_resolution=override_resolution)
    if traj.grid != grid or traj_o.grid != grid:
        raise DomainError("trajectories must be tracked on the checked grid")
    ket = traj.level(k)
    O = frame.unitary_batch(grid.points)
    amplitudes = np.abs(np.einsum("tim,tij,tj->tm", np.conj(traj_o.states), O, ket))
    return _verdict("T1", grid.points, amplitudes, amplitudes[0], tol)


def theorem1_reduced_check(model: HamiltonianModel, frame: FrameSpec, k: int, grid: TimeGrid,
                           tol: float = CONFIG.THEOREM_TOLERANCE,
                           override_resolution: bool = False) -> TheoremVerdict:
    """
    |<E_m^O(t)|E_k^0>| compared with its t0 value, |E_k^0> eigenstates of w0*H0.

    This is the form the condition takes near resonance, where the inertial
    eigenstates are close to the unperturbed ones.
    """
    static = model.static_hamiltonian
    if static is None:
        raise DomainError(f"model {model.name} has no static part omega0*H0")
    _, unperturbed = eig_hermitian(static)
    rotated = transform_hamiltonian(model, frame)
    traj_o = track_eigensystem(rotated, grid, override_resolution=override_resolution)
    amplitudes = np.abs(np.einsum("tim,i->tm", np.conj(traj_o.states), unperturbed[:, k]))
    return _verdict("T1-reduced", grid.points, amplitudes, amplitudes[0], tol)


def theorem2_check(model: HamiltonianModel, frame: FrameSpec, n: int, grid: TimeGrid,
                   tol: float = CONFIG.THEOREM_TOLERANCE, h_o: Optional[np.ndarray] = None,
                   override_resolution: bool = False) -> TheoremVerdict:
    """
    |<E_k(t)| U_O(t,t0) |E_n(t0)>| against |<E_k(t0)|E_n(t0)>| for every k,
    with U_O = O^dag(t) exp(-i H_O (t-t0)) O(t0).

    Raises:
        TheoremPreconditionError: H_O varies by more than 1e-9 on the grid.
    """
    times = grid.points
    rotated = transform_hamiltonian(model, frame)
    stack = rotated.sample(times)
    constant = stack[0] if h_o is None else check_hermitian(h_o, "constant H_O")
    drift = spectral_norm_batch(stack - constant[np.newaxis])
    worst = int(np.argmax(drift))
    if drift[worst] > CONFIG.CONSTANT_HO_ATOL:
        raise TheoremPreconditionError(
            f"Theorem 2 requires constant H_O: ||H_O(t) - H_O(t0)|| = {drift[worst]:.3e} "
            f"at t={times[worst]:.9g} us",
            time=float(times[worst]),
        )

    traj = track_eigensystem(model, grid, override_resolution=override_resolution)
    evals, evecs = np.linalg.eigh(constant)
    elapsed = times - times[0]
    propagators = (evecs[np.newaxis] * np.exp(-1j * np.outer(elapsed, evals))[:, np.newaxis, :]) @ dagger(evecs)
    U_o = dagger(frame.unitary_batch(times)) @ propagators @ frame.unitary(times[0])
    start = traj.level(n)[0]
    evolved = U_o @ start
    amplitudes = np.abs(np.einsum("tik,ti->tk", np.conj(traj.states), evolved))
    reference = np.abs(np.conj(traj.states[0]).T @ start)
    return _verdict("T2", times, amplitudes, reference, tol)


ROTATED_FORM_CONVENTIONS = {"exp(i*w*t*sz)": 1.0, "exp(i*(w/2)*t*sz)": 0.5}


@dataclass
class RotatedFormDiscrepancy:
    model_convention: str
    frame_convention: str
    evaluable: bool
    max_deviation: float
    witness_time: float
    note: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "model_convention": self.model_convention,
            "frame_convention": self.frame_convention,
            "evaluable": self.evaluable,
            "max_deviation": float(self.max_deviation) if self.evaluable else None,
            "witness_t": float(self.witness_time) if self.evaluable else None,
            "note": self.note,
        }


def printed_rotated_form(omega0: float, omegaT: float, omega: float, t: float) -> np.ndarray:
    """(w0-w) sz/2 + sin(wt) tan(theta) w0 [cos(wt) sx - sin(wt) sy]/2, theta = arctan(w0/wT)."""
    tan_theta = omega0 / omegaT if omegaT != 0 else math.copysign(math.inf, omega0)
    wt = omega * t
    transverse = math.cos(wt) * SIGMA_X - math.sin(wt) * SIGMA_Y
    diagonal = 0.5 * (omega0 - omega) * SIGMA_Z
    if math.sin(wt) == 0.0:
        return diagonal + 0.0 * transverse
    return diagonal + (math.sin(wt) * tan_theta * omega0 / 2.0) * transverse


def printed_rotated_form_crosscheck(omega0: float, omegaT: float, omega: float,
                                    grid: TimeGrid) -> List[RotatedFormDiscrepancy]:
    """
    Printed closed form of H_O against transform_hamiltonian for both model
    conventions and both frame conventions. Never raises on mismatch.
    """
    times = grid.points
    printed = None
    note = ""
    if omegaT == 0:
        note = "tan(theta) = omega0/omegaT diverges; printed form not finite"
    else:
        printed = np.stack([printed_rotated_form(omega0, omegaT, omega, t) for t in times])

    records = []
    for model_convention in ("printed", "transition"):
        model = oscillating_qubit(omega0, omegaT, omega, convention=model_convention)
        for frame_label, factor in ROTATED_FORM_CONVENTIONS.items():
            frame = FrameSpec(np.array(SIGMA_Z), factor * omega, name=frame_label)
            if printed is None:
                records.append(RotatedFormDiscrepancy(model_convention, frame_label, False,
                                                      math.nan, math.nan, note))
                continue
            oracle = transform_hamiltonian(model, frame).sample(times)
            dev = spectral_norm_batch(oracle - printed)
            i = int(np.argmax(dev))
            records.append(RotatedFormDiscrepancy(model_convention, frame_label, True,
                                                  float(dev[i]), float(times[i])))
    for rec in records:
        logger.info("Printed H_O vs %s model in %s: %s", rec.model_convention, rec.frame_convention,
                    f"max deviation {rec.max_deviation:.3e}" if rec.evaluable else rec.note)
    return records
