import math

import numpy as np
import pytest

from frames import (
    FrameSpec,
    TheoremPreconditionError,
    classify_regime,
    identity_frame,
    printed_rotated_form_crosscheck,
    resonant_frame,
    sigma_z_frame,
    theorem1_check,
    theorem1_reduced_check,
    theorem2_check,
    transform_hamiltonian,
)
from hamiltonians import generic_decomposed, nmr_rotating, oscillating_qubit, tabulated_model, two_qubit_decomposition
from linalg_core import SIGMA_X, SIGMA_Y, SIGMA_Z, DomainError
from spectral import TimeGrid, track_eigensystem

W0 = 2 * math.pi
WT = 0.04 * math.pi


def test_frame_unitary_and_derivative():
    frame = FrameSpec(np.array(SIGMA_Z), 1.3)
    assert np.allclose(frame.unitary(0.0), np.eye(2))
    t, h = 0.4, 1e-6
    numeric = (frame.unitary(t + h) - frame.unitary(t - h)) / (2 * h)
    assert np.allclose(frame.unitary_dot(t), numeric, atol=1e-7)
    assert np.allclose(frame.unitary_batch(np.array([t]))[0], frame.unitary(t))
    assert np.allclose(frame.fictitious_term(), -1.3 * SIGMA_Z)


def test_frame_rejects_non_hermitian_generator():
    with pytest.raises(DomainError):
        FrameSpec(np.array([[0, 1], [0, 0]]), 1.0)


def test_zero_rate_leaves_hamiltonian_unchanged():
    model = oscillating_qubit(W0, WT, W0)
    rotated = transform_hamiltonian(model, sigma_z_frame(0.0))
    for t in (0.0, 0.37):
        assert np.allclose(rotated.hamiltonian(t), model.hamiltonian(t))


def test_printed_model_in_sigma_z_frame_matches_hand_derivation():
    w = 2 * math.pi * 0.8
    model = oscillating_qubit(W0, WT, w)
    rotated = transform_hamiltonian(model, sigma_z_frame(w))
    for t in (0.0, 0.11, 0.93):
        a = w * t
        f = math.sin(a) * math.cos(2 * a)
        g = -math.sin(a) * math.sin(2 * a)
        fd = w * (math.cos(a) * math.cos(2 * a) - 2 * math.sin(a) * math.sin(2 * a))
        gd = -w * (math.cos(a) * math.sin(2 * a) + 2 * math.sin(a) * math.cos(2 * a))
        fdd = w * w * (-5 * math.sin(a) * math.cos(2 * a) - 4 * math.cos(a) * math.sin(2 * a))
        gdd = w * w * (5 * math.sin(a) * math.sin(2 * a) - 4 * math.cos(a) * math.cos(2 * a))
        assert np.allclose(rotated.hamiltonian(t), (W0 - w) * SIGMA_Z + WT * (f * SIGMA_X + g * SIGMA_Y))
        assert np.allclose(rotated.derivative(t), WT * (fd * SIGMA_X + gd * SIGMA_Y))
        assert np.allclose(rotated.second_derivative(t), WT * (fdd * SIGMA_X + gdd * SIGMA_Y))


def test_frames_compose_additively():
    model = oscillating_qubit(W0, WT, 1.7)
    twice = transform_hamiltonian(transform_hamiltonian(model, sigma_z_frame(0.4)), sigma_z_frame(0.9))
    once = transform_hamiltonian(model, sigma_z_frame(1.3))
    for t in (0.2, 1.1):
        assert np.allclose(twice.hamiltonian(t), once.hamiltonian(t))


def test_conjugation_preserves_spectrum():
    model = oscillating_qubit(W0, WT, 1.1)
    frame = sigma_z_frame(1.1)
    rotated = transform_hamiltonian(model, frame)
    t = 0.77
    assert np.allclose(np.linalg.eigvalsh(rotated.hamiltonian(t) + 1.1 * SIGMA_Z),
                       np.linalg.eigvalsh(model.hamiltonian(t)))


def test_two_qubit_resonant_frame():
    model = generic_decomposed(two_qubit_decomposition(W0, WT, 0.9 * W0))
    frame = resonant_frame(model)
    rotated = transform_hamiltonian(model, frame)
    t = 0.3
    O = frame.unitary(t)
    transverse = model.hamiltonian(t) - W0 * model.h0
    expected = (W0 - 0.9 * W0) * model.h0 + O @ transverse @ O.conj().T
    assert np.allclose(rotated.hamiltonian(t), expected)
    assert rotated.max_frequency == pytest.approx(model.max_frequency + 0.9 * W0 * 4.0)


def test_resonant_frame_needs_static_generator():
    times = np.linspace(0.0, 1.0, 11)
    model = tabulated_model(times, np.stack([np.array(SIGMA_Z)] * 11))
    with pytest.raises(DomainError, match="static generator"):
        resonant_frame(model)


def test_frame_dimension_mismatch():
    with pytest.raises(DomainError, match="dimension"):
        transform_hamiltonian(oscillating_qubit(W0, WT, W0), identity_frame(4))


@pytest.mark.parametrize("omega, regime", [
    (20 * math.pi, "far-from-resonance"),
    (2 * math.pi, "near-resonance"),
    (2 * math.pi + 0.5, "intermediate"),
])
def test_classify_regime(omega, regime):
    assert classify_regime(W0, WT, omega) == regime


def test_theorem1_identity_frame_is_trivial():
    model = oscillating_qubit(1.0, 0.05, 0.3)
    verdict = theorem1_check(model, identity_frame(2), 0, TimeGrid(0.0, 5.0, 201))
    assert verdict.max_deviation < 1e-12
    assert verdict.holds


def test_theorem1_far_below_resonance(reference):
    model = oscillating_qubit(reference["omega0"], reference["omegaT"], 0.1 * reference["omega0"], "transition")
    frame = resonant_frame(model)
    grid = TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, reference["tau"])
    verdict = theorem1_check(model, frame, 1, grid, tol=0.05)
    assert verdict.max_deviation < 0.01
    assert verdict.verdict == "holds"
    payload = verdict.to_dict()
    assert payload["condition"] == "T1"
    assert set(payload["witness"]) == {"t", "index"}


def test_theorem1_near_resonance_is_violated(reference):
    model = oscillating_qubit(reference["omega0"], reference["omegaT"], 1.0173 * reference["omega0"], "transition")
    frame = resonant_frame(model)
    grid = TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, reference["tau"])
    verdict = theorem1_check(model, frame, 1, grid, tol=0.05)
    assert verdict.max_deviation > 0.1
    assert not verdict.holds


@pytest.mark.slow
def test_theorem1_far_above_resonance(reference):
    model = oscillating_qubit(reference["omega0"], reference["omegaT"], 10 * reference["omega0"], "transition")
    frame = resonant_frame(model)
    grid = TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, reference["tau"])
    assert theorem1_check(model, frame, 1, grid, tol=0.05).holds


def test_theorem1_rejects_foreign_trajectory():
    model = oscillating_qubit(1.0, 0.05, 0.3)
    traj = track_eigensystem(model, TimeGrid(0.0, 5.0, 101))
    with pytest.raises(DomainError, match="checked grid"):
        theorem1_check(model, identity_frame(2), 0, TimeGrid(0.0, 5.0, 201), traj=traj)


def test_theorem1_reduced_far_below_resonance(reference):
    model = oscillating_qubit(reference["omega0"], reference["omegaT"], 0.1 * reference["omega0"], "transition")
    frame = resonant_frame(model)
    grid = TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, reference["tau"])
    verdict = theorem1_reduced_check(model, frame, 1, grid, tol=0.05)
    assert verdict.condition == "T1-reduced"
    assert verdict.holds


def test_theorem2_far_from_resonance_holds():
    w0, wrf = W0, 0.004 * math.pi
    omega = w0 - 50 * wrf
    model = nmr_rotating(w0, wrf, omega)
    frame = sigma_z_frame(omega, half=True)
    grid = TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, 300.0)
    verdict = theorem2_check(model, frame, 0, grid, tol=0.05)
    assert verdict.holds
    assert verdict.condition == "T2"


def test_theorem2_on_resonance_is_violated():
    wrf = 0.004 * math.pi
    model = nmr_rotating(W0, wrf, W0)
    frame = sigma_z_frame(W0, half=True)
    grid = TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, 300.0)
    verdict = theorem2_check(model, frame, 0, grid, tol=0.05)
    assert verdict.max_deviation > 0.5
    assert verdict.verdict == "violated"


def test_theorem2_requires_constant_rotated_hamiltonian():
    model = oscillating_qubit(W0, WT, W0)
    frame = sigma_z_frame(W0)
    with pytest.raises(TheoremPreconditionError, match="constant H_O"):
        theorem2_check(model, frame, 0, TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, 1.0))


def test_theorem2_static_model_in_identity_frame():
    model = oscillating_qubit(W0, 0.0, W0)
    verdict = theorem2_check(model, identity_frame(2), 1, TimeGrid.for_model(model, 0.0, 2.0))
    assert verdict.max_deviation < 1e-12


def test_rotated_form_crosscheck_covers_all_conventions():
    records = printed_rotated_form_crosscheck(W0, WT, W0, TimeGrid(0.0, 1.0, 101))
    pairs = {(r.model_convention, r.frame_convention) for r in records}
    assert len(pairs) == 4
    assert all(r.evaluable and math.isfinite(r.max_deviation) for r in records)


def test_rotated_form_crosscheck_without_transverse_field():
    records = printed_rotated_form_crosscheck(W0, 0.0, W0, TimeGrid(0.0, 1.0, 11))
    assert len(records) == 4
    assert not any(r.evaluable for r in records)
    assert records[0].to_dict()["max_deviation"] is None


def test_reduced_deviation_falls_off_with_detuning(reference):
    detunings, deviations = [], []
    for a in (5.0, 10.0, 20.0):
        model = oscillating_qubit(reference["omega0"], reference["omegaT"], a * reference["omega0"], "transition")
        frame = resonant_frame(model)
        grid = TimeGrid.for_model(transform_hamiltonian(model, frame), 0.0, 10.0)
        verdict = theorem1_reduced_check(model, frame, 1, grid)
        detunings.append((a - 1.0) * reference["omega0"])
        deviations.append(verdict.max_deviation)
    slope = np.polyfit(np.log(detunings), np.log(deviations), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.2)


def test_rotated_tabulated_model_keeps_time_range():
    times = np.linspace(0.0, 1.0, 21)
    model = tabulated_model(times, np.stack([np.array(SIGMA_Z + 0.1 * SIGMA_X)] * 21))
    rotated = transform_hamiltonian(model, sigma_z_frame(1.0))
    assert rotated.time_range == (0.0, 1.0)
    with pytest.raises(DomainError, match="outside the table"):
        rotated.hamiltonian(2.0)
