from __future__ import annotations
import csv
import json
import math
import os
import re
import sys
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from models import FRAME_KINDS, MODEL_NAMES, SWEEP_PARAMETERS, ScenarioConfig
from config import CONFIG

logger = logging.getLogger("AdiabaticFrames.Storage")

APP_NAME = CONFIG.APP_NAME


def _platform_appdata_root() -> str:
    if sys.platform.startswith("win"):
        return os.getenv("APPDATA") or os.path.join(os.path.expanduser("~"), "AppData", "Roaming")
    if sys.platform == "darwin":
        return os.path.join(os.path.expanduser("~"), "Library", "Application Support")
    return os.path.join(os.path.expanduser("~"), ".local", "share")


def get_appdata_dir() -> str:
    path = os.path.join(_platform_appdata_root(), APP_NAME)
    os.makedirs(path, exist_ok=True)
    return path


# -------- Config diagnostics --------
@dataclass(frozen=True)
class Diagnostic:
    line: Optional[int]
    field: str
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line is not None else "config"
        return f"{where}: {self.field}: {self.message}"


class ConfigError(Exception):
    """Scenario file failed validation; carries every diagnostic found."""

    def __init__(self, diagnostics: Sequence[Diagnostic], path: Optional[str] = None):
        self.diagnostics = list(diagnostics)
        self.path = path
        head = f"{path}: " if path else ""
        super().__init__(head + "; ".join(str(d) for d in self.diagnostics))


FREQUENCY_KEYS = {"model.omega0", "model.omegaT", "model.omegaRF", "model.omega", "frame.rate"}
FLOAT_KEYS = {"model.a", "model.rate", "grid.t0", "grid.tau", "theorem.tolerance"}
INT_KEYS = {"grid.steps", "grid.points_per_period", "theorem.k", "theorem.n", "run.workers"}
BOOL_KEYS = {"grid.override_resolution"}
TEXT_KEYS = {"model.name", "model.convention", "model.table", "frame.kind", "initial.state",
             "sweep.parameter", "output.dir", "run.label"}
LIST_KEYS = {"conditions.levels", "sweep.values"}
KNOWN_KEYS = FREQUENCY_KEYS | FLOAT_KEYS | INT_KEYS | BOOL_KEYS | TEXT_KEYS | LIST_KEYS

FIELD_FOR_KEY = {
    "model.name": "model_name", "model.convention": "convention", "model.omega0": "omega0",
    "model.omegaT": "omegaT", "model.omegaRF": "omegaRF", "model.omega": "omega", "model.a": "a",
    "model.rate": "rate", "model.table": "table", "frame.kind": "frame_kind", "frame.rate": "frame_rate",
    "grid.t0": "t0", "grid.tau": "tau", "grid.steps": "steps", "grid.points_per_period": "points_per_period",
    "grid.override_resolution": "override_resolution", "initial.state": "initial_state",
    "conditions.levels": "levels", "theorem.k": "theorem_k", "theorem.n": "theorem_n",
    "theorem.tolerance": "tolerance", "sweep.parameter": "sweep_parameter", "sweep.values": "sweep_values",
    "output.dir": "output_dir", "run.workers": "workers", "run.label": "label",
}

REQUIRED_BY_MODEL = {
    "oscillating_qubit": ("model.omega0", "model.omegaT"),
    "nmr_rotating": ("model.omega0", "model.omegaRF"),
    "linear_ramp": ("model.omega0", "model.rate"),
    "generic_two_qubit": ("model.omega0", "model.omegaT"),
    "tabulated": ("model.table",),
}
DRIVEN_MODELS = {"oscillating_qubit", "nmr_rotating", "generic_two_qubit"}

_FREQ_RE = re.compile(r"^\s*([-+0-9.eE]+|[-+]?inf|nan)\s*(MHz|kHz)?\s*$", re.IGNORECASE)
_LOGSPACE_RE = re.compile(r"^logspace\(\s*([^,]+),\s*([^,]+),\s*([^)]+)\)$", re.IGNORECASE)


def parse_frequency(text: str) -> float:
    """
    Frequency in rad/us. `MHz` multiplies by 2pi, `kHz` by 2pi*1e-3;
    bare numbers are taken as rad/us.
    """
    m = _FREQ_RE.match(str(text))
    if not m:
        raise ValueError(f"malformed frequency '{text}'")
    value = float(m.group(1))
    unit = (m.group(2) or "").lower()
    if unit == "mhz":
        value *= 2.0 * math.pi
    elif unit == "khz":
        value *= 2.0 * math.pi * 1e-3
    return value


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected true/false, got '{text}'")


def merge_reference_values(values: Iterable[float], reference: Sequence[float] = CONFIG.REFERENCE_A_VALUES,
                       rtol: float = CONFIG.SWEEP_MERGE_RTOL) -> List[float]:
    """Sorted union; points within rtol of a reference value are replaced by it."""
    kept = [v for v in values if not any(abs(v - p) <= rtol * abs(p) for p in reference)]
    return sorted(set(kept) | set(float(p) for p in reference))


def parse_sweep_values(text: str, frequency: bool = False) -> List[float]:
    """
    `v1, v2, ...`, `logspace(lo, hi, count)` or `reference`, joined with `+`.
    logspace bounds are values, not exponents. With `frequency` (omega sweeps)
    every value may carry a MHz/kHz suffix like the model frequencies.
    """
    def number(token: str) -> float:
        if frequency:
            return parse_frequency(token)
        unit = _FREQ_RE.match(token)
        if unit and unit.group(2):
            raise ValueError(f"'{token.strip()}': units apply to omega sweeps only")
        return float(token)

    values: List[float] = []
    with_reference = False
    for part in (p.strip() for p in text.split("+")):
        if not part:
            raise ValueError("empty sweep term")
        if part.lower() == "reference":
            if frequency:
                raise ValueError("reference values are ratios omega/omega0; sweep a to use them")
            with_reference = True
            continue
        m = _LOGSPACE_RE.match(part)
        if m:
            lo, hi, count = number(m.group(1)), number(m.group(2)), int(m.group(3))
            if lo <= 0 or hi <= 0 or count < 1:
                raise ValueError(f"logspace needs positive bounds and count, got '{part}'")
            values.extend(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), count))
            continue
        values.extend(number(x) for x in part.split(",") if x.strip())
    if with_reference:
        return merge_reference_values(values)
    return values


def read_config_lines(path: str) -> List[Tuple[int, str, str]]:
    """(line number, key, raw value) for every assignment in the file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        logger.error("Failed to read config file %s: %s", path, e)
        raise ConfigError([Diagnostic(None, "file", f"cannot read: {e}")], path) from e

    out: List[Tuple[int, str, str]] = []
    bad: List[Diagnostic] = []
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            bad.append(Diagnostic(number, line, "expected 'key = value'"))
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        out.append((number, key, value))
    if bad:
        raise ConfigError(bad, path)
    return out


def parse_config(path: str) -> ScenarioConfig:
    """Read and statically validate a scenario file; raise ConfigError listing every problem."""
    return parse_config_entries(read_config_lines(path), path)


def parse_config_text(text: str, source: str = "<text>") -> ScenarioConfig:
    entries = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            if "=" not in line:
                raise ConfigError([Diagnostic(number, line, "expected 'key = value'")], source)
            key, value = (s.strip() for s in line.split("=", 1))
            entries.append((number, key, value))
    return parse_config_entries(entries, source)


def parse_config_entries(entries: Sequence[Tuple[int, str, str]], source: Optional[str] = None) -> ScenarioConfig:
    diags: List[Diagnostic] = []
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    frequency_sweep = any(key == "sweep.parameter" and raw.strip() == "omega" for _, key, raw in entries)

    for number, key, raw in entries:
        if key not in KNOWN_KEYS:
            diags.append(Diagnostic(number, key, "unknown key"))
            continue
        if key in lines:
            diags.append(Diagnostic(number, key, f"duplicate key (first set on line {lines[key]})"))
            continue
        lines[key] = number
        try:
            if key in FREQUENCY_KEYS:
                value: Any = parse_frequency(raw)
            elif key in FLOAT_KEYS:
                value = float(raw)
            elif key in INT_KEYS:
                value = int(raw)
            elif key in BOOL_KEYS:
                value = _parse_bool(raw)
            elif key == "conditions.levels":
                value = tuple(int(x) for x in raw.split(","))
            elif key == "sweep.values":
                value = tuple(parse_sweep_values(raw, frequency=frequency_sweep))
            else:
                value = raw
        except ValueError as e:
            diags.append(Diagnostic(number, key, f"malformed value '{raw}': {e}"))
            continue
        if isinstance(value, float) and not math.isfinite(value):
            diags.append(Diagnostic(number, key, "must be finite"))
            continue
        values[key] = value

    name = values.get("model.name", "oscillating_qubit")
    if name not in MODEL_NAMES:
        diags.append(Diagnostic(lines.get("model.name"), "model.name",
                                f"unknown model '{name}'; expected one of {', '.join(MODEL_NAMES)}"))
    else:
        for key in REQUIRED_BY_MODEL[name]:
            if key not in values and key not in _failed(diags):
                diags.append(Diagnostic(None, key, f"required for model '{name}'"))
        sweeping = "sweep.values" in values
        if name in DRIVEN_MODELS and not sweeping and "model.omega" not in values and "model.a" not in values:
            diags.append(Diagnostic(None, "model.omega", "drive frequency missing: set model.omega or model.a"))
        if "model.a" in values and "model.omega0" not in values:
            diags.append(Diagnostic(lines["model.a"], "model.a", "a = omega/omega0 needs model.omega0"))

    convention = values.get("model.convention", "printed")
    if convention not in ("printed", "transition"):
        diags.append(Diagnostic(lines.get("model.convention"), "model.convention",
                                f"unknown convention '{convention}'; expected printed or transition"))

    kind = values.get("frame.kind", "none")
    if kind not in FRAME_KINDS:
        diags.append(Diagnostic(lines.get("frame.kind"), "frame.kind",
                                f"unknown frame '{kind}'; expected one of {', '.join(FRAME_KINDS)}"))
    elif kind == "resonant" and name == "tabulated":
        diags.append(Diagnostic(lines.get("frame.kind"), "frame.kind",
                                "resonant frame needs a model with a static generator"))

    t0 = values.get("grid.t0", 0.0)
    tau = values.get("grid.tau", CONFIG.REFERENCE_TAU)
    if tau <= t0:
        diags.append(Diagnostic(lines.get("grid.tau"), "grid.tau", f"tau={tau} must exceed t0={t0}"))
    if "grid.steps" in values and values["grid.steps"] < 2:
        diags.append(Diagnostic(lines["grid.steps"], "grid.steps", "at least 2 steps required"))
    if values.get("grid.points_per_period", CONFIG.POINTS_PER_PERIOD) < 2:
        diags.append(Diagnostic(lines.get("grid.points_per_period"), "grid.points_per_period",
                                "at least 2 points per period required"))

    levels = values.get("conditions.levels")
    if levels is not None and (len(levels) != 2 or levels[0] == levels[1] or min(levels) < 0):
        diags.append(Diagnostic(lines["conditions.levels"], "conditions.levels",
                                "expected two distinct non-negative indices"))

    if values.get("theorem.tolerance", CONFIG.THEOREM_TOLERANCE) <= 0:
        diags.append(Diagnostic(lines.get("theorem.tolerance"), "theorem.tolerance", "must be positive"))

    workers = values.get("run.workers", CONFIG.DEFAULT_WORKERS)
    if not CONFIG.MIN_WORKERS <= workers <= CONFIG.MAX_WORKERS:
        diags.append(Diagnostic(lines.get("run.workers"), "run.workers",
                                f"must be in [{CONFIG.MIN_WORKERS}, {CONFIG.MAX_WORKERS}]"))

    parameter = values.get("sweep.parameter")
    sweep = values.get("sweep.values")
    if parameter is not None and parameter not in SWEEP_PARAMETERS:
        diags.append(Diagnostic(lines["sweep.parameter"], "sweep.parameter",
                                f"unknown sweep parameter '{parameter}'; expected a or omega"))
    if sweep is not None:
        line = lines["sweep.values"]
        if not sweep:
            diags.append(Diagnostic(line, "sweep.values", "sweep values must be nonempty"))
        elif len(set(sweep)) != len(sweep):
            diags.append(Diagnostic(line, "sweep.values", "sweep values must be distinct"))
        elif min(sweep) <= 0:
            diags.append(Diagnostic(line, "sweep.values", "sweep values must be positive"))
        if (parameter or "a") == "a" and "model.omega0" not in values:
            diags.append(Diagnostic(line, "sweep.values", "sweeping a needs model.omega0"))
    elif parameter is not None:
        diags.append(Diagnostic(lines["sweep.parameter"], "sweep.values", "sweep.parameter given without values"))

    if diags:
        for d in diags:
            logger.debug("Config diagnostic: %s", d)
        raise ConfigError(diags, source)

    data = {FIELD_FOR_KEY[k]: v for k, v in values.items()}
    if sweep is not None:
        data["sweep_parameter"] = parameter or "a"
        data["sweep_values"] = tuple(sorted(sweep))
    if "label" not in data and source:
        data["label"] = os.path.splitext(os.path.basename(source))[0] or "scenario"
    return ScenarioConfig(**data)


def _failed(diags: Sequence[Diagnostic]) -> set:
    return {d.field for d in diags}


# -------- Tabulated Hamiltonians --------
def load_tabulated_model(path: str):
    """
    Read a CSV with columns t, then re_ij, im_ij for every matrix entry in
    row-major order, and build a spline-interpolated model from it.
    """
    from hamiltonians import tabulated_model

    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            rows = [[float(x) for x in row] for row in reader if row]
    except OSError as e:
        logger.error("Failed to read tabulated Hamiltonian %s: %s", path, e)
        raise ConfigError([Diagnostic(None, "model.table", f"cannot read '{path}': {e}")], path) from e
    except ValueError as e:
        raise ConfigError([Diagnostic(None, "model.table", f"non-numeric entry: {e}")], path) from e

    if header is None or not rows:
        raise ConfigError([Diagnostic(None, "model.table", "table is empty")], path)
    ragged = next((n for n, row in enumerate(rows, start=1) if len(row) != len(header)), None)
    if ragged is not None:
        raise ConfigError([Diagnostic(None, "model.table", f"data row {ragged} has {len(rows[ragged - 1])} "
                                                           f"columns, header has {len(header)}")], path)
    data = np.asarray(rows, dtype=np.float64)
    entries = (data.shape[1] - 1) // 2
    dim = int(round(math.sqrt(entries)))
    if data.shape[1] != 1 + 2 * dim * dim or dim < 1:
        raise ConfigError([Diagnostic(None, "model.table",
                                      f"expected 1 + 2*d^2 columns, got {data.shape[1]}")], path)
    expected = ["t"] + [f"{part}_{i}{j}" for i in range(dim) for j in range(dim) for part in ("re", "im")]
    names = [h.strip().lower() for h in header]
    if names[:1] == ["t_us"]:
        names[0] = "t"
    if names != expected:
        raise ConfigError([Diagnostic(1, "model.table",
                                      f"header must be {','.join(expected)}; got {','.join(header)}")], path)
    matrices = (data[:, 1::2] + 1j * data[:, 2::2]).reshape(-1, dim, dim)
    logger.info("Loaded %d tabulated samples (dim %d) from %s", data.shape[0], dim, path)
    return tabulated_model(data[:, 0], matrices, name=os.path.basename(path))


# -------- Artifact writers --------
def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.{CONFIG.CSV_SIGNIFICANT_DIGITS}g}"
    return "" if value is None else str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Header row plus rows; floats at 17 significant digits."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(list(header))
            count = 0
            for row in rows:
                writer.writerow([format_number(x) for x in row])
                count += 1
        logger.debug("Wrote %d row(s) to %s", count, path)
        return path
    except OSError as e:
        logger.error("Failed to write CSV %s: %s", path, e)
        raise


def write_json(path: str, payload: Dict[str, Any]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True, allow_nan=False)
            f.write("\n")
        logger.debug("Wrote %s", path)
        return path
    except (OSError, ValueError) as e:
        logger.error("Failed to write JSON %s: %s", path, e)
        raise


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        logger.error("JSON file is corrupted: %s", e)
        raise
    except OSError as e:
        logger.error("Failed to read JSON file: %s", e)
        raise
    if not isinstance(data, dict):
        raise ValueError(f"{path} does not hold a JSON object")
    return data
