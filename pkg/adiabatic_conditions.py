"""
Adiabatic-condition coefficients C1..C4 for a pair of tracked levels.

    C1 = max_t |<E0|dH|E1>| / (E0 - E1)^2
    C2 = max_t |d/dt [<E0|dH|E1> / (E0 - E1)^2]| * tau
    C3 = max_t |d10| / |E1 - E0 - D10|
         d10 = <E1|dH|E0> / (E0 - E1)
         D10 = i g1 - i g0 + d/dt arg(i d10),  g_n = <E_n|dE_n/dt>
    C4 = max_t max{ tau^2 ||dH||^3 / gap^4, tau^2 ||dH|| ||d2H|| / gap^3 }

Each coefficient is the maximum of a per-time trace kept in the report.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import CONFIG
from hamiltonians import HamiltonianModel
from linalg_core import DomainError, NumericalFailure, spectral_norm_batch
from spectral import EigensystemTrajectory, berry_term, time_derivative

logger = logging.getLogger("AdiabaticFrames.Conditions")

COEFFICIENTS = ("c1", "c2", "c3", "c4")
ELEMENT_TAGS = ("<E0|dH|E1>", "d10", "D10")


class DegenerateGapError(NumericalFailure):
    """The selected levels touch on the grid."""


@dataclass(frozen=True, eq=False)
class MatrixElementTrace:
    values: np.ndarray
    tag: str

    def __post_init__(self):
        if self.tag not in ELEMENT_TAGS:
            raise DomainError(f"unknown matrix-element tag {self.tag!r}")


@dataclass(eq=False)
class ConditionReport:
    """C1..C4 with their traces, arg-max times, level pair and frame tag."""

    c1: float
    c2: float
    c3: float
    c4: float
    times: np.ndarray
    traces: Dict[str, np.ndarray]
    argmax_times: Dict[str, float]
    levels: Tuple[int, int]
    frame: str = "inertial"
    flagged_times: List[float] = field(default_factory=list)
    messages: List[str] = field(default_factory=list)

    def coefficients(self) -> Dict[str, float]:
        return {"c1": self.c1, "c2": self.c2, "c3": self.c3, "c4": self.c4}

    def to_dict(self) -> Dict[str, object]:
        """JSON shape {c1, c2, c3, c4, argmax_times, frame, levels} (+ diagnostics)."""
        out: Dict[str, object] = {k: json_number(v) for k, v in self.coefficients().items()}
        out["argmax_times"] = {k: json_number(v) for k, v in self.argmax_times.items()}
        out["frame"] = self.frame
        out["levels"] = list(self.levels)
        out["flagged_times"] = [float(t) for t in self.flagged_times]
        out["messages"] = list(self.messages)
        return out

    def trace_rows(self) -> List[List[float]]:
        """Rows t, c1_integrand .. c4_integrand."""
        cols = [self.traces[f"{name}_integrand"] for name in COEFFICIENTS]
        return [[float(t)] + [float(c[i]) for c in cols] for i, t in enumerate(self.times)]


def json_number(value: float) -> object:
    """Finite floats pass through; infinities become the string 'inf'."""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return value


def default_levels(traj: EigensystemTrajectory, levels: Optional[Sequence[int]] = None) -> Tuple[int, int]:
    """(ground, excited) pair; qubits default to (0, 1), larger systems must name one."""
    if levels is not None:
        pair = tuple(int(x) for x in levels)
        if len(pair) != 2 or pair[0] == pair[1]:
            raise DomainError(f"levels must be two distinct indices, got {levels!r}")
        for n in pair:
            if not 0 <= n < traj.dim:
                raise DomainError(f"level {n} out of range for dimension {traj.dim}")
        return pair  # type: ignore[return-value]
    if traj.dim == 2:
        return (0, 1)
    raise DomainError(f"dimension {traj.dim} > 2: the level pair must be given explicitly")


def _gap(traj: EigensystemTrajectory, levels: Tuple[int, int]) -> np.ndarray:
    g, e = levels
    gap = traj.energies[:, g] - traj.energies[:, e]
    small = np.abs(gap) <= CONFIG.GAP_ATOL
    if np.any(small):
        t = float(traj.times[int(np.argmax(small))])
        raise DegenerateGapError(f"degenerate gap at t={t:.9g} us between levels {g} and {e}", time=t)
    return gap


def _element(traj: EigensystemTrajectory, operator: np.ndarray, bra: int, ket: int) -> np.ndarray:
    return np.einsum("ti,tij,tj->t", np.conj(traj.level(bra)), operator, traj.level(ket))


def hdot_element(traj: EigensystemTrajectory, model: HamiltonianModel,
                 levels: Tuple[int, int], hdot: Optional[np.ndarray] = None) -> MatrixElementTrace:
    """<E0|dH/dt|E1> over the grid."""
    if hdot is None:
        hdot = model.sample_derivative(traj.times)
    g, e = levels
    return MatrixElementTrace(_element(traj, hdot, g, e), "<E0|dH|E1>")


def _peak(trace: np.ndarray, times: np.ndarray) -> Tuple[float, float]:
    if np.any(np.isinf(trace)):
        i = int(np.argmax(np.isinf(trace)))
        return math.inf, float(times[i])
    i = int(np.argmax(trace))
    return float(trace[i]), float(times[i])


def coefficient_c1(traj: EigensystemTrajectory, model: HamiltonianModel,
                   levels: Optional[Sequence[int]] = None,
                   hdot: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """
    Traditional condition max |<E0|dH|E1>| / (E0-E1)^2.

    Returns:
        (C1, per-time trace)
    """
    pair = default_levels(traj, levels)
    gap = _gap(traj, pair)
    element = hdot_element(traj, model, pair, hdot).values
    trace = np.abs(element) / gap ** 2
    return float(np.max(trace)), trace


def coefficient_c2(traj: EigensystemTrajectory, model: HamiltonianModel, tau: float,
                   levels: Optional[Sequence[int]] = None,
                   hdot: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """max |d/dt[<E0|dH|E1>/(E0-E1)^2]| * tau, outer derivative by central differences."""
    pair = default_levels(traj, levels)
    gap = _gap(traj, pair)
    element = hdot_element(traj, model, pair, hdot).values
    ratio = element / gap ** 2
    trace = np.abs(time_derivative(ratio, traj.grid.spacing)) * float(tau)
    return float(np.max(trace)), trace


@dataclass(eq=False)
class C3Details:
    d10: MatrixElementTrace
    delta10: MatrixElementTrace
    unwrapped_phase: np.ndarray
    flagged: np.ndarray
    pole_time: Optional[float] = None


def _phase_of(d10: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unwrapped arg(i*d10) modulo pi; zeros of d10 are interpolated and flagged."""
    magnitude = np.abs(d10)
    peak = float(np.max(magnitude)) if magnitude.size else 0.0
    flagged = magnitude <= CONFIG.ZERO_ELEMENT_RTOL * peak
    phase = np.angle(1j * d10)
    good = np.flatnonzero(~flagged)
    if good.size == 0:
        return np.zeros_like(phase), flagged
    # unwrap over defined points first, then fill the gaps
    unwrapped = np.unwrap(phase[good], period=math.pi)
    idx = np.arange(phase.size)
    return np.interp(idx, good, unwrapped), flagged


def c3_details(traj: EigensystemTrajectory, model: HamiltonianModel,
               levels: Tuple[int, int], hdot: Optional[np.ndarray] = None) -> C3Details:
    g, e = levels
    gap = _gap(traj, levels)
    if hdot is None:
        hdot = model.sample_derivative(traj.times)
    d10 = _element(traj, hdot, e, g) / gap
    phase, flagged = _phase_of(d10)
    dphase = time_derivative(phase, traj.grid.spacing)
    gamma_g = berry_term(traj, g)
    gamma_e = berry_term(traj, e)
    delta10 = 1j * gamma_e - 1j * gamma_g + dphase
    return C3Details(
        d10=MatrixElementTrace(d10, "d10"),
        delta10=MatrixElementTrace(delta10, "D10"),
        unwrapped_phase=phase,
        flagged=flagged,
    )


def _c3_trace(traj: EigensystemTrajectory, pair: Tuple[int, int], details: C3Details) -> np.ndarray:
    g, e = pair
    denominator = np.abs(traj.energies[:, e] - traj.energies[:, g] - details.delta10.values)
    numerator = np.abs(details.d10.values)
    trace = np.empty_like(numerator)
    pole = denominator <= CONFIG.POLE_ATOL
    trace[~pole] = numerator[~pole] / denominator[~pole]
    trace[pole] = np.where(numerator[pole] > 0, math.inf, 0.0)
    if np.any(np.isinf(trace)):
        t = float(traj.times[int(np.argmax(np.isinf(trace)))])
        details.pole_time = t
        logger.warning("C3 pole at t=%.9g us (resonance of D10 with gap)", t)
    return trace


def coefficient_c3(traj: EigensystemTrajectory, model: HamiltonianModel,
                   levels: Optional[Sequence[int]] = None,
                   hdot: Optional[np.ndarray] = None,
                   details: Optional[C3Details] = None) -> Tuple[float, np.ndarray]:
    """
    max |d10| / |E1 - E0 - D10|.

    A vanishing denominator is the resonance diagnostic: the trace holds
    +inf there and C3 = +inf; nothing is raised. Passing `details` reuses
    them and records the pole time on them.
    """
    pair = default_levels(traj, levels)
    if details is None:
        details = c3_details(traj, model, pair, hdot)
    trace = _c3_trace(traj, pair, details)
    c3, _ = _peak(trace, traj.times)
    return c3, trace


def coefficient_c4(traj: EigensystemTrajectory, model: HamiltonianModel, tau: float,
                   levels: Optional[Sequence[int]] = None,
                   hdot: Optional[np.ndarray] = None,
                   hddot: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """max over t of max{tau^2 ||dH||^3/gap^4, tau^2 ||dH|| ||d2H||/gap^3}."""
    pair = default_levels(traj, levels)
    gap = np.abs(_gap(traj, pair))
    if hdot is None:
        hdot = model.sample_derivative(traj.times)
    if hddot is None:
        hddot = model.sample_second_derivative(traj.times)
    n1 = spectral_norm_batch(hdot)
    n2 = spectral_norm_batch(hddot)
    tau2 = float(tau) ** 2
    trace = np.maximum(tau2 * n1 ** 3 / gap ** 4, tau2 * n1 * n2 / gap ** 3)
    return float(np.max(trace)), trace


def condition_report(traj: EigensystemTrajectory, model: HamiltonianModel, tau: float,
                     levels: Optional[Sequence[int]] = None, frame: str = "inertial") -> ConditionReport:
    """
    All four coefficients for one trajectory.

    Args:
        traj: Tracked eigensystem of `model`
        model: The Hamiltonian the trajectory belongs to
        tau: Total evolution time (us)
        levels: (ground, excited); defaults to (0, 1) for qubits
        frame: Frame tag written into the report

    Raises:
        DegenerateGapError: the pair touches somewhere on the grid.
    """
    pair = default_levels(traj, levels)
    times = traj.times
    hdot = model.sample_derivative(times)
    hddot = model.sample_second_derivative(times)

    c1, t1 = coefficient_c1(traj, model, pair, hdot)
    c2, t2 = coefficient_c2(traj, model, tau, pair, hdot)
    details = c3_details(traj, model, pair, hdot)
    c3, t3 = coefficient_c3(traj, model, pair, hdot, details)
    c4, t4 = coefficient_c4(traj, model, tau, pair, hdot, hddot)

    traces = {"c1_integrand": t1, "c2_integrand": t2, "c3_integrand": t3, "c4_integrand": t4}
    argmax = {name: _peak(traces[f"{name}_integrand"], times)[1] for name in COEFFICIENTS}

    flagged = [float(t) for t in times[details.flagged]]
    messages = []
    if details.pole_time is not None:
        messages.append(f"C3 pole at t={details.pole_time:.9g} us (resonance of D10 with gap)")
    if flagged:
        messages.append(f"d10 vanished at {len(flagged)} grid point(s); phase interpolated there")

    logger.info("Conditions [%s, levels %s]: C1=%.4g C2=%.4g C3=%.4g C4=%.4g",
                frame, pair, c1, c2, c3, c4)
    return ConditionReport(
        c1=c1, c2=c2, c3=c3, c4=c4,
        times=times,
        traces=traces,
        argmax_times=argmax,
        levels=pair,
        frame=frame,
        flagged_times=flagged,
        messages=messages,
    )
