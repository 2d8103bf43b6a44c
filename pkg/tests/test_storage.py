import json
import math
import os

import numpy as np
import pytest

from config import CONFIG
from storage import (
    ConfigError,
    format_number,
    load_tabulated_model,
    parse_config,
    parse_config_text,
    parse_frequency,
    parse_sweep_values,
    read_json,
    write_csv,
    write_json,
)

VALID = """
# resonant drive
model.name = oscillating_qubit
model.convention = transition
model.omega0 = 1.0 MHz
model.omegaT = 20 kHz
model.a = 1.0
frame.kind = resonant
grid.tau = 100
theorem.tolerance = 0.05
"""


def test_parse_frequency_units():
    assert parse_frequency("1 MHz") == pytest.approx(2 * math.pi)
    assert parse_frequency("20 kHz") == pytest.approx(2 * math.pi * 0.02)
    assert parse_frequency("3.5") == pytest.approx(3.5)
    with pytest.raises(ValueError, match="malformed"):
        parse_frequency("fast")


def test_sweep_values_lists_and_logspace():
    assert parse_sweep_values("0.5, 2, 1") == [0.5, 2.0, 1.0]
    assert parse_sweep_values("logspace(1, 100, 3)") == pytest.approx([1.0, 10.0, 100.0])
    with pytest.raises(ValueError, match="positive"):
        parse_sweep_values("logspace(0, 1, 5)")


def test_omega_sweep_values_take_units():
    assert parse_sweep_values("0.5 MHz, 2 MHz", frequency=True) == pytest.approx([math.pi, 4 * math.pi])
    assert parse_sweep_values("logspace(100 kHz, 10 MHz, 3)", frequency=True) == pytest.approx(
        [0.2 * math.pi, 2 * math.pi, 20 * math.pi])
    with pytest.raises(ValueError, match="omega sweeps only"):
        parse_sweep_values("1 MHz")
    with pytest.raises(ValueError, match="sweep a"):
        parse_sweep_values("1 MHz + reference", frequency=True)


def test_config_sweep_units_follow_parameter():
    text = "model.omega0 = 1 MHz\nmodel.omegaT = 20 kHz\nsweep.values = 0.9 MHz, 1.1 MHz\nsweep.parameter = omega\n"
    cfg = parse_config_text(text)
    assert cfg.sweep_values == pytest.approx((1.8 * math.pi, 2.2 * math.pi))
    with pytest.raises(ConfigError, match="omega sweeps only"):
        parse_config_text(text.replace("sweep.parameter = omega", "sweep.parameter = a"))


def test_reference_values_merge_into_log_grid():
    values = parse_sweep_values("logspace(0.1, 10, 61) + reference")
    assert len(values) == 63
    assert values == sorted(values)
    assert len(set(values)) == len(values)
    for p in CONFIG.REFERENCE_A_VALUES:
        assert p in values


def test_parse_valid_config():
    cfg = parse_config_text(VALID, "resonance.cfg")
    assert cfg.omega0 == pytest.approx(2 * math.pi)
    assert cfg.omegaT == pytest.approx(0.04 * math.pi)
    assert cfg.drive_frequency == pytest.approx(2 * math.pi)
    assert cfg.frame_kind == "resonant"
    assert cfg.label == "resonance"


def test_all_problems_reported_together():
    text = """
model.name = oscillating_qubit
model.a = 1.0
grid.t0 = 5
grid.tau = 1
bogus.key = 3
"""
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    fields = {d.field for d in info.value.diagnostics}
    assert {"model.omega0", "model.omegaT", "grid.tau", "bogus.key"} <= fields
    unknown = next(d for d in info.value.diagnostics if d.field == "bogus.key")
    assert unknown.line == 6


def test_malformed_and_duplicate_values():
    text = "model.omega0 = 1 MHz\nmodel.omega0 = 2 MHz\nmodel.omegaT = lots\nmodel.omega = 1\n"
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    messages = " ".join(str(d) for d in info.value.diagnostics)
    assert "duplicate key" in messages
    assert "malformed value" in messages


def test_missing_line_separator_is_reported():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("model.omega0 1 MHz\n")


def test_sweep_values_must_be_distinct_and_positive():
    base = "model.omega0 = 1 MHz\nmodel.omegaT = 20 kHz\nsweep.parameter = a\n"
    with pytest.raises(ConfigError, match="distinct"):
        parse_config_text(base + "sweep.values = 1, 1\n")
    with pytest.raises(ConfigError, match="positive"):
        parse_config_text(base + "sweep.values = -1, 2\n")


def test_sweep_config_is_sorted():
    text = "model.omega0 = 1 MHz\nmodel.omegaT = 20 kHz\nsweep.values = 2, 0.5, 1\n"
    cfg = parse_config_text(text)
    assert cfg.sweep_parameter == "a"
    assert cfg.sweep_values == (0.5, 1.0, 2.0)


def test_parse_config_file(tmp_path):
    path = tmp_path / "far.cfg"
    path.write_text(VALID, encoding="utf-8")
    assert parse_config(str(path)).label == "far"


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(str(tmp_path / "missing.cfg"))


def test_load_tabulated_model(tmp_path):
    path = tmp_path / "table.csv"
    lines = ["t,re_00,im_00,re_01,im_01,re_10,im_10,re_11,im_11"]
    for t in np.linspace(0.0, 1.0, 11):
        lines.append(f"{t},1,0,{t},0,{t},0,-1,0")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    model = load_tabulated_model(str(path))
    assert model.dim == 2
    assert np.allclose(model.hamiltonian(0.55), [[1, 0.55], [0.55, -1]], atol=1e-9)


def test_tabulated_model_bad_columns(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("t,a,b,c\n0,1,2,3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="columns"):
        load_tabulated_model(str(path))


def test_tabulated_model_header_names(tmp_path):
    path = tmp_path / "table.csv"
    rows = "".join(f"{t},1,0,0,0,0,0,-1,0\n" for t in (0.0, 0.1, 0.2, 0.3))
    path.write_text("t,re_00,im_00,re_10,im_10,re_01,im_01,re_11,im_11\n" + rows, encoding="utf-8")
    with pytest.raises(ConfigError, match="header must be t,re_00,im_00,re_01"):
        load_tabulated_model(str(path))
    path.write_text("t_us,re_00,im_00,re_01,im_01,re_10,im_10,re_11,im_11\n" + rows, encoding="utf-8")
    assert load_tabulated_model(str(path)).time_range == pytest.approx((0.0, 0.3))


def test_tabulated_model_ragged_rows(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("t,re_00,im_00\n0,1,0\n0.1,1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="data row 2 has 2 columns"):
        load_tabulated_model(str(path))


def test_format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(math.inf) == "inf"
    assert format_number(math.nan) == "nan"
    assert format_number(3) == "3"
    assert format_number(None) == ""


def test_write_csv(tmp_path):
    path = write_csv(str(tmp_path / "sub" / "out.csv"), ["t_us", "fidelity"], [[0.0, 1.0], [0.5, math.inf]])
    assert open(path, encoding="utf-8").read() == "t_us,fidelity\n0,1\n0.5,inf\n"


def test_write_json_sorted_and_strict(tmp_path):
    path = write_json(str(tmp_path / "out.json"), {"b": 1, "a": [1, 2]})
    text = open(path, encoding="utf-8").read()
    assert text.index('"a"') < text.index('"b"')
    assert read_json(path) == {"a": [1, 2], "b": 1}
    with pytest.raises(ValueError):
        write_json(str(tmp_path / "bad.json"), {"x": math.nan})


def test_read_json_rejects_non_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text(json.dumps([1, 2]), encoding="utf-8")
    with pytest.raises(ValueError, match="JSON object"):
        read_json(str(path))
    assert os.path.exists(path)
