import math

import pytest

from models import SWEEP_COLUMNS, RunSummary, ScenarioConfig, SweepResult, SweepRow


def test_drive_frequency_from_ratio():
    assert ScenarioConfig(omega0=2.0, a=1.5).drive_frequency == pytest.approx(3.0)
    assert ScenarioConfig(omega0=2.0, omega=7.0, a=1.5).drive_frequency == pytest.approx(7.0)
    assert ScenarioConfig().drive_frequency is None


def test_with_sweep_value_clears_sweep():
    cfg = ScenarioConfig(omega0=1.0, omega=3.0, sweep_parameter="a", sweep_values=(0.5, 2.0))
    row_cfg = cfg.with_sweep_value(2.0)
    assert row_cfg.a == 2.0 and row_cfg.omega is None
    assert row_cfg.sweep_values == ()
    by_omega = ScenarioConfig(omega0=1.0, sweep_parameter="omega", sweep_values=(4.0,)).with_sweep_value(4.0)
    assert by_omega.drive_frequency == pytest.approx(4.0)


def test_scenario_dict_round_trip():
    cfg = ScenarioConfig(omega0=1.0, levels=(0, 1), sweep_parameter="a", sweep_values=(0.5, 2.0), label="x")
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


def test_scenario_from_dict_ignores_unknown_fields():
    assert ScenarioConfig.from_dict({"omega0": 1.0, "colour": "blue"}).omega0 == 1.0


def test_sweep_row_csv_and_sentinels():
    row = SweepRow(index=0, value=1.0, regime="near-resonance", terminal_fidelity=0.5, min_fidelity=0.01,
                   inertial={"c1": 0.02, "c2": 12.0, "c3": 0.02, "c4": 3.0},
                   non_inertial={f"c{n}": math.inf for n in range(1, 5)})
    csv_row = row.csv_row()
    assert len(csv_row) == len(SWEEP_COLUMNS)
    assert csv_row[8] == math.inf
    payload = row.to_dict()
    assert payload["non_inertial"]["c1"] == "inf"
    back = SweepRow.from_dict(payload)
    assert back.non_inertial["c4"] == math.inf
    assert back.inertial["c2"] == pytest.approx(12.0)


def test_failed_row():
    row = SweepRow.failed(3, 2.0, "tracking failed")
    assert not row.ok
    assert math.isnan(row.terminal_fidelity)
    assert row.csv_row()[-1] == "tracking failed"


def test_sweep_result_table_and_failures():
    result = SweepResult("a", [SweepRow(0, 0.5), SweepRow.failed(1, 2.0, "x")])
    header, rows = result.table()
    assert header[0] == "a"
    assert len(rows) == 2
    assert [r.value for r in result.failed_rows] == [2.0]
    assert not result.all_failed
    assert SweepResult("a", [SweepRow.failed(0, 1.0, "x")]).all_failed
    assert not SweepResult("a", []).all_failed


def test_sweep_result_from_dict_sorts_rows():
    result = SweepResult("omega", [SweepRow(1, 2.0), SweepRow(0, 0.5)])
    back = SweepResult.from_dict(result.to_dict())
    assert back.values == [0.5, 2.0]
    assert back.parameter == "omega"


def test_run_summary_serializes_infinities():
    summary = RunSummary(label="x", model="m", frame="none", terminal_fidelity=math.inf)
    d = summary.to_dict()
    assert d["terminal_fidelity"] == "inf"
    assert "version" in d
