"""
Dense complex linear algebra for small Hermitian and unitary operators.

Everything here is a pure function over numpy arrays. Stacked variants
(`*_batch`) accept arrays of shape (N, d, d) and are what the time-grid
modules use; the scalar variants validate their input and raise
`DomainError` with the violated tolerance in the message.
"""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from config import CONFIG

logger = logging.getLogger("AdiabaticFrames.Linalg")

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]


class DomainError(ValueError):
    """Input violates a mathematical precondition."""


class NumericalFailure(RuntimeError):
    """A numerical invariant broke during a computation."""

    def __init__(self, message: str, time: Optional[float] = None):
        self.time = time
        super().__init__(message)


def _frozen(a: npt.ArrayLike) -> ComplexArray:
    out = np.array(a, dtype=np.complex128)
    out.setflags(write=False)
    return out


IDENTITY2 = _frozen([[1, 0], [0, 1]])
SIGMA_X = _frozen([[0, 1], [1, 0]])
SIGMA_Y = _frozen([[0, -1j], [1j, 0]])
SIGMA_Z = _frozen([[1, 0], [0, -1]])


def as_matrix(a: npt.ArrayLike, name: str = "matrix") -> ComplexArray:
    """Coerce to a finite complex square matrix."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DomainError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def spectral_norm(a: npt.ArrayLike) -> float:
    """
    Largest singular value of a matrix.

    Args:
        a: Finite complex matrix

    Returns:
        The operator 2-norm
    """
    m = as_matrix(a)
    return float(np.linalg.norm(m, ord=2))


def spectral_norm_batch(stack: np.ndarray) -> RealArray:
    """Operator 2-norms of a (N, d, d) stack."""
    return np.linalg.norm(np.asarray(stack), ord=2, axis=(-2, -1))


def trace_norm_hermitian_batch(stack: np.ndarray) -> RealArray:
    """Trace norms (sum of |eigenvalues|) of a stack of Hermitian matrices."""
    return np.abs(np.linalg.eigvalsh(stack)).sum(axis=-1)


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - dagger(a), ord=2))


def check_hermitian(a: npt.ArrayLike, name: str = "operator", rtol: float = CONFIG.HERMITIAN_RTOL) -> ComplexArray:
    """Return `a` as a complex matrix or raise if it is not Hermitian."""
    m = as_matrix(a, name)
    defect = hermiticity_defect(m)
    scale = max(1.0, float(np.linalg.norm(m, ord=2)))
    if defect > rtol * scale:
        raise DomainError(
            f"{name} is not Hermitian: ||A - A^H|| = {defect:.3e} exceeds tolerance "
            f"{rtol:.0e} * max(1, ||A||) = {rtol * scale:.3e}"
        )
    return m


def check_hermitian_batch(stack: np.ndarray, name: str = "operator",
                          rtol: float = CONFIG.HERMITIAN_RTOL) -> np.ndarray:
    """Validate a (N, d, d) stack; the error names the first offending index."""
    stack = np.asarray(stack, dtype=np.complex128)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise DomainError(f"{name} stack must have shape (N, d, d), got {stack.shape}")
    if not np.all(np.isfinite(stack)):
        bad = int(np.argmax(~np.all(np.isfinite(stack), axis=(1, 2))))
        raise DomainError(f"{name} has non-finite entries at sample {bad}")
    defects = spectral_norm_batch(stack - dagger(stack))
    scales = np.maximum(1.0, spectral_norm_batch(stack))
    bad_mask = defects > rtol * scales
    if np.any(bad_mask):
        i = int(np.argmax(bad_mask))
        raise DomainError(
            f"{name} is not Hermitian at sample {i}: ||A - A^H|| = {defects[i]:.3e} exceeds "
            f"tolerance {rtol:.0e} * max(1, ||A||)"
        )
    return stack


def is_unitary(u: npt.ArrayLike, atol: float = CONFIG.UNITARY_ATOL) -> bool:
    m = as_matrix(u)
    return unitarity_defect(m) <= atol


def unitarity_defect(u: np.ndarray) -> float:
    """||U^H U - I|| for one matrix or the max over a stack."""
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return float(np.max(spectral_norm_batch(dagger(u) @ u - eye)))


def _fix_column_phases(vecs: ComplexArray) -> ComplexArray:
    # Largest-magnitude component of each column made real positive.
    idx = np.argmax(np.abs(vecs) > (np.max(np.abs(vecs), axis=0) - 1e-12), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.conj(pivots) / np.abs(pivots))


def eig_hermitian(a: npt.ArrayLike) -> Tuple[RealArray, ComplexArray]:
    """
    Eigendecomposition of a Hermitian operator.

    Eigenvalues are ascending. Each eigenvector is phase-fixed so that its
    first largest-magnitude component is real and positive; exact ties in
    the spectrum are ordered by the phases of the eigenvector entries.

    Args:
        a: Hermitian matrix

    Returns:
        (eigenvalues, eigenvectors) with eigenvectors as columns
    """
    m = check_hermitian(a, "eig_hermitian input")
    evals, evecs = np.linalg.eigh(m)
    evecs = _fix_column_phases(evecs)

    scale = max(1.0, float(np.max(np.abs(evals))))
    order = list(range(len(evals)))
    phases = np.angle(evecs)
    tie_key = [tuple(np.round(phases[:, j], 12)) for j in order]
    groups = np.round(evals / (scale * 1e-12)).astype(np.int64) if len(evals) > 1 else np.zeros(1, np.int64)
    order.sort(key=lambda j: (groups[j], tie_key[j]))
    return evals[order].astype(np.float64), evecs[:, order]


def expm_skew_hermitian(a: npt.ArrayLike, s: float) -> ComplexArray:
    """
    exp(-i s A) for Hermitian A, via the eigendecomposition of A.

    Args:
        a: Hermitian generator
        s: Real scalar multiplying the generator

    Returns:
        Unitary matrix
    """
    m = check_hermitian(a, "generator")
    if not np.isfinite(s):
        raise DomainError(f"exponent scale must be finite, got {s!r}")
    evals, evecs = np.linalg.eigh(m)
    return (evecs * np.exp(-1j * float(s) * evals)) @ dagger(evecs)


def expm_hermitian_batch(stack: np.ndarray, s: float) -> np.ndarray:
    """exp(-i s A_j) for every matrix of a Hermitian (N, d, d) stack."""
    evals, evecs = np.linalg.eigh(stack)
    phases = np.exp(-1j * float(s) * evals)
    return (evecs * phases[:, np.newaxis, :]) @ dagger(evecs)


def projector(v: npt.ArrayLike) -> ComplexArray:
    """|v><v| for a normalized vector."""
    vec = np.asarray(v, dtype=np.complex128).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > CONFIG.STATE_NORM_ATOL:
        raise DomainError(f"state vector must be normalized, ||psi|| = {norm:.12f}")
    return np.outer(vec, np.conj(vec))


def check_density_matrix(rho: npt.ArrayLike, atol: float = CONFIG.DENSITY_ATOL) -> ComplexArray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    m = as_matrix(rho, "density matrix")
    defect = hermiticity_defect(m)
    if defect > atol:
        raise DomainError(f"density matrix is not Hermitian: defect {defect:.3e} > {atol:.0e}")
    tr = np.trace(m)
    if abs(tr - 1.0) > atol:
        raise DomainError(f"density matrix trace {tr.real:.12f} differs from 1 by more than {atol:.0e}")
    lowest = float(np.min(np.linalg.eigvalsh(m)))
    if lowest < -atol:
        raise DomainError(f"density matrix has negative eigenvalue {lowest:.3e}")
    return m


def basis_state(dim: int, index: int) -> ComplexArray:
    if not 0 <= index < dim:
        raise DomainError(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v
