import dataclasses
import math

import numpy as np
import pytest

from adiabatic_conditions import (
    C3Details,
    DegenerateGapError,
    MatrixElementTrace,
    _phase_of,
    coefficient_c1,
    coefficient_c2,
    coefficient_c3,
    coefficient_c4,
    condition_report,
    default_levels,
    json_number,
)
from hamiltonians import generic_decomposed, linear_ramp, oscillating_qubit, two_qubit_decomposition
from linalg_core import DomainError
from spectral import TimeGrid, track_eigensystem


@pytest.fixture
def ramp():
    model = linear_ramp(1.0, 0.5, horizon=2.0)
    grid = TimeGrid(0.0, 2.0, 2001)
    return model, track_eigensystem(model, grid)


def test_static_hamiltonian_has_vanishing_coefficients():
    model = oscillating_qubit(2 * math.pi, 0.0, 2 * math.pi)
    traj = track_eigensystem(model, TimeGrid.for_model(model, 0.0, 5.0))
    report = condition_report(traj, model, tau=5.0)
    assert report.coefficients() == pytest.approx({"c1": 0.0, "c2": 0.0, "c3": 0.0, "c4": 0.0})


def test_c1_matches_linear_ramp_closed_form(ramp):
    model, traj = ramp
    t = traj.times
    energy = np.sqrt(1.0 + 0.25 * t ** 2)
    c1, trace = coefficient_c1(traj, model)
    assert np.allclose(trace, 0.5 / (4 * energy ** 3), rtol=1e-9)
    assert c1 == pytest.approx(0.125)


def test_c2_matches_linear_ramp_closed_form(ramp):
    model, traj = ramp
    t = traj.times
    energy = np.sqrt(1.0 + 0.25 * t ** 2)
    _, trace = coefficient_c2(traj, model, tau=2.0)
    expected = 2.0 * 3 * 0.5 ** 3 * t / (4 * energy ** 5)
    assert np.allclose(trace, expected, atol=1e-5)


def test_c4_matches_linear_ramp_closed_form(ramp):
    model, traj = ramp
    c4, _ = coefficient_c4(traj, model, tau=2.0)
    assert c4 == pytest.approx(4.0 * 0.5 ** 3 / 16.0, rel=1e-9)


def test_report_times_and_json_shape(ramp):
    model, traj = ramp
    report = condition_report(traj, model, tau=2.0)
    assert report.argmax_times["c1"] == pytest.approx(0.0)
    payload = report.to_dict()
    assert {"c1", "c2", "c3", "c4", "argmax_times", "frame", "levels"} <= set(payload)
    assert payload["levels"] == [0, 1]
    rows = report.trace_rows()
    assert len(rows) == 2001 and len(rows[0]) == 5


def test_degenerate_gap_is_reported_with_time(crossing_model):
    traj = track_eigensystem(crossing_model, TimeGrid(0.0, 1.0, 11))
    with pytest.raises(DegenerateGapError) as info:
        condition_report(traj, crossing_model, tau=1.0)
    assert info.value.time == pytest.approx(0.0)


def test_phase_zeros_are_flagged_and_interpolated():
    phase, flagged = _phase_of(np.array([1j, 0.0, 1j]))
    assert list(flagged) == [False, True, False]
    assert np.allclose(phase, math.pi)


def test_default_levels_for_larger_systems():
    model = generic_decomposed(two_qubit_decomposition(2 * math.pi, 0.04 * math.pi, 2 * math.pi))
    traj = track_eigensystem(model, TimeGrid.for_model(model, 0.0, 0.5))
    with pytest.raises(DomainError, match="explicitly"):
        default_levels(traj)
    assert default_levels(traj, [0, 3]) == (0, 3)
    with pytest.raises(DomainError):
        default_levels(traj, [1, 1])


def test_json_number_sentinels():
    assert json_number(math.inf) == "inf"
    assert json_number(-math.inf) == "-inf"
    assert json_number(0.25) == 0.25


def test_near_resonance_traditional_conditions_look_satisfied(reference):
    model = oscillating_qubit(reference["omega0"], reference["omegaT"], reference["omega0"], "transition")
    traj = track_eigensystem(model, TimeGrid.for_model(model, 0.0, reference["tau"]))
    report = condition_report(traj, model, tau=reference["tau"])
    assert report.c1 < 0.05
    assert report.c3 < 0.05


def test_coefficients_ignore_energy_offset():
    model = oscillating_qubit(2 * math.pi, 0.04 * math.pi, math.pi, "transition")
    shifted = dataclasses.replace(model, evaluate=lambda t: model.evaluate(t) + 7.5 * np.eye(2))
    grid = TimeGrid.for_model(model, 0.0, 5.0)
    base = condition_report(track_eigensystem(model, grid), model, tau=5.0).coefficients()
    moved = condition_report(track_eigensystem(shifted, grid), shifted, tau=5.0).coefficients()
    for name in ("c1", "c2", "c4"):
        assert moved[name] == pytest.approx(base[name], rel=1e-9)
    assert moved["c3"] == pytest.approx(base["c3"], rel=1e-6)


def test_coefficients_ignore_eigenvector_phases():
    model = oscillating_qubit(2 * math.pi, 0.04 * math.pi, math.pi, "transition")
    traj = track_eigensystem(model, TimeGrid.for_model(model, 0.0, 5.0))
    base = condition_report(traj, model, tau=5.0)
    rephased = condition_report(traj.with_phases(np.array([0.7, -2.1])), model, tau=5.0)
    assert rephased.coefficients() == pytest.approx(base.coefficients(), rel=1e-9)
    assert np.allclose(rephased.traces["c3_integrand"], base.traces["c3_integrand"], rtol=1e-9)


def test_c3_pole_gives_infinite_coefficient(ramp):
    model, traj = ramp
    gap = traj.energies[:, 1] - traj.energies[:, 0]
    n = traj.times.size
    details = C3Details(
        d10=MatrixElementTrace(np.full(n, 0.1 + 0j), "d10"),
        delta10=MatrixElementTrace(gap.astype(np.complex128), "D10"),
        unwrapped_phase=np.zeros(n),
        flagged=np.zeros(n, dtype=bool),
    )
    c3, trace = coefficient_c3(traj, model, details=details)
    assert c3 == math.inf
    assert np.all(np.isinf(trace))
    assert details.pole_time == pytest.approx(0.0)


def test_c3_pole_with_vanishing_element_is_zero(ramp):
    model, traj = ramp
    gap = traj.energies[:, 1] - traj.energies[:, 0]
    n = traj.times.size
    details = C3Details(
        d10=MatrixElementTrace(np.zeros(n, dtype=np.complex128), "d10"),
        delta10=MatrixElementTrace(gap.astype(np.complex128), "D10"),
        unwrapped_phase=np.zeros(n),
        flagged=np.ones(n, dtype=bool),
    )
    c3, trace = coefficient_c3(traj, model, details=details)
    assert c3 == 0.0
    assert details.pole_time is None


def test_report_c3_matches_coefficient_c3(ramp):
    model, traj = ramp
    c3, trace = coefficient_c3(traj, model)
    report = condition_report(traj, model, tau=2.0)
    assert report.c3 == pytest.approx(c3)
    assert np.allclose(report.traces["c3_integrand"], trace)


def test_coefficients_converge_under_grid_halving():
    model = linear_ramp(1.0, 0.5, horizon=2.0)
    grid = TimeGrid(0.0, 2.0, 201)
    coarse = condition_report(track_eigensystem(model, grid), model, tau=2.0).coefficients()
    fine = condition_report(track_eigensystem(model, grid.refined()), model, tau=2.0).coefficients()
    assert fine == pytest.approx(coarse, rel=1e-3)
