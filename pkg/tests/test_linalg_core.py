import numpy as np
import pytest
from scipy.linalg import expm

from linalg_core import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DomainError,
    basis_state,
    check_density_matrix,
    check_hermitian,
    check_hermitian_batch,
    commutator,
    eig_hermitian,
    expm_hermitian_batch,
    expm_skew_hermitian,
    is_unitary,
    projector,
    spectral_norm,
    trace_norm_hermitian_batch,
    unitarity_defect,
)


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_pauli_algebra():
    assert np.allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)
    assert np.allclose(commutator(SIGMA_Z, SIGMA_X), 2j * SIGMA_Y)
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        assert np.allclose(s @ s, np.eye(2))


def test_pauli_constants_are_read_only():
    with pytest.raises(ValueError):
        SIGMA_X[0, 0] = 5.0


def test_spectral_norm():
    assert spectral_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0)


def test_trace_norm_batch():
    stack = np.stack([np.diag([1.0, -2.0]), SIGMA_X])
    assert np.allclose(trace_norm_hermitian_batch(stack), [3.0, 2.0])


def test_check_hermitian_rejects():
    with pytest.raises(DomainError, match="not Hermitian"):
        check_hermitian(np.array([[0, 1], [0, 0]]))


def test_check_hermitian_batch_names_sample():
    stack = np.stack([SIGMA_Z, np.array([[0, 1], [2, 0]])])
    with pytest.raises(DomainError, match="sample 1"):
        check_hermitian_batch(stack)


def test_eig_hermitian_sorted_and_phase_fixed(random_hermitian):
    a = random_hermitian(4)
    evals, evecs = eig_hermitian(a)
    assert np.all(np.diff(evals) > 0)
    assert np.allclose(a @ evecs, evecs * evals)
    for j in range(4):
        col = evecs[:, j]
        pivot = col[np.argmax(np.abs(col))]
        assert abs(pivot.imag) < 1e-12 and pivot.real > 0


def test_eig_hermitian_deterministic_under_global_phase(rng):
    basis = random_unitary(rng, 3)
    energies = np.array([-1.3, 0.4, 2.2])
    pivots = basis[np.argmax(np.abs(basis), axis=0), np.arange(3)]
    expected = basis * (np.conj(pivots) / np.abs(pivots))
    for phi in (0.0, 0.9, np.pi, -2.4):
        rotated = basis * np.exp(1j * np.array([phi, -0.5 * phi, 3.0 * phi]))
        a = (rotated * energies) @ rotated.conj().T
        evals, evecs = eig_hermitian(a)
        assert np.allclose(evals, energies)
        assert np.allclose(evecs, expected, atol=1e-10)


@pytest.mark.parametrize("dim", range(2, 9))
def test_eig_hermitian_reconstructs_operator(random_hermitian, dim):
    a = random_hermitian(dim)
    evals, evecs = eig_hermitian(a)
    assert np.max(np.abs((evecs * evals) @ evecs.conj().T - a)) <= 1e-8 * max(1.0, spectral_norm(a))
    assert np.allclose(evecs.conj().T @ evecs, np.eye(dim), atol=1e-10)


def test_expm_skew_hermitian():
    u = expm_skew_hermitian(SIGMA_Z, np.pi / 2)
    assert np.allclose(u, np.diag([-1j, 1j]))
    assert is_unitary(u)


def test_expm_skew_hermitian_rejects_nan_scale():
    with pytest.raises(DomainError):
        expm_skew_hermitian(SIGMA_X, float("nan"))


def test_expm_batch_matches_scipy(random_hermitian):
    stack = np.stack([random_hermitian(3) for _ in range(5)])
    out = expm_hermitian_batch(stack, 0.37)
    for a, u in zip(stack, out):
        assert np.allclose(u, expm(-1j * 0.37 * a), atol=1e-12)


def test_expm_group_law_for_commuting_generators(rng):
    basis = random_unitary(rng, 4)
    a = (basis * np.array([0.3, -1.1, 2.0, 0.7])) @ basis.conj().T
    b = (basis * np.array([-0.8, 0.5, 1.4, -2.6])) @ basis.conj().T
    assert np.allclose(commutator(a, b), 0.0, atol=1e-12)
    s = 0.61
    assert np.allclose(expm_skew_hermitian(a, s) @ expm_skew_hermitian(b, s),
                       expm_skew_hermitian(a + b, s), atol=1e-10)
    assert np.allclose(expm_skew_hermitian(a, 0.2) @ expm_skew_hermitian(a, 0.5),
                       expm_skew_hermitian(a, 0.7), atol=1e-10)


def test_expm_stays_unitary_for_large_exponents(random_hermitian):
    stack = np.stack([random_hermitian(4, scale=1e4) for _ in range(3)])
    for u in expm_hermitian_batch(stack, 37.0):
        assert unitarity_defect(u) < 1e-9
    assert is_unitary(expm_skew_hermitian(stack[0], 1e3))


def test_projector_requires_normalized():
    p = projector(np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(p @ p, p)
    with pytest.raises(DomainError, match="normalized"):
        projector([1.0, 1.0])


def test_density_matrix_checks():
    check_density_matrix(np.eye(2) / 2)
    with pytest.raises(DomainError, match="trace"):
        check_density_matrix(np.eye(2))
    with pytest.raises(DomainError, match="negative eigenvalue"):
        check_density_matrix(np.diag([1.5, -0.5]))


def test_basis_state_range():
    assert np.allclose(basis_state(3, 2), [0, 0, 1])
    with pytest.raises(DomainError, match="out of range"):
        basis_state(2, 2)
