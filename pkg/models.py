from __future__ import annotations
from dataclasses import dataclass, asdict, field, replace
from typing import Optional, Dict, Any, List, Tuple
import logging
import math

from config import CONFIG

logger = logging.getLogger("AdiabaticFrames.Models")

MODEL_NAMES = ("oscillating_qubit", "nmr_rotating", "linear_ramp", "generic_two_qubit", "tabulated")
FRAME_KINDS = ("none", "identity", "resonant", "sigma_z", "half_sigma_z")
SWEEP_PARAMETERS = ("a", "omega")


def _sentinel(value: Optional[float]) -> Any:
    if value is None:
        return None
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return value


def _number(value: Any) -> Optional[float]:
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf"):
            return math.inf
        if text == "-inf":
            return -math.inf
        if text == "nan":
            return math.nan
    return float(value)


@dataclass
class ScenarioConfig:
    """One scenario as read from a config file. Frequencies are rad/us."""

    model_name: str = "oscillating_qubit"
    convention: str = "printed"
    omega0: Optional[float] = None
    omegaT: Optional[float] = None
    omegaRF: Optional[float] = None
    omega: Optional[float] = None
    a: Optional[float] = None
    rate: Optional[float] = None
    table: Optional[str] = None

    frame_kind: str = "none"
    frame_rate: Optional[float] = None

    t0: float = 0.0
    tau: float = CONFIG.REFERENCE_TAU
    steps: Optional[int] = None
    points_per_period: int = CONFIG.POINTS_PER_PERIOD
    override_resolution: bool = False

    initial_state: str = "0"
    levels: Optional[Tuple[int, int]] = None

    theorem_k: int = 0
    theorem_n: int = 0
    tolerance: float = CONFIG.THEOREM_TOLERANCE

    sweep_parameter: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()

    output_dir: str = CONFIG.DEFAULT_OUTPUT_DIR
    workers: int = CONFIG.DEFAULT_WORKERS
    label: str = "scenario"

    @property
    def drive_frequency(self) -> Optional[float]:
        """omega if given, else a * omega0."""
        if self.omega is not None:
            return self.omega
        if self.a is not None and self.omega0 is not None:
            return self.a * self.omega0
        return None

    def with_sweep_value(self, value: float) -> "ScenarioConfig":
        """Copy with the swept parameter set and the sweep cleared."""
        if self.sweep_parameter == "omega":
            return replace(self, omega=float(value), a=None, sweep_parameter=None, sweep_values=())
        return replace(self, a=float(value), omega=None, sweep_parameter=None, sweep_values=())

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["levels"] = list(self.levels) if self.levels is not None else None
        d["sweep_values"] = list(self.sweep_values)
        return d

    @staticmethod
    def from_dict(d: Dict[str, Any]) -> "ScenarioConfig":
        known = {f for f in ScenarioConfig.__dataclass_fields__}
        unknown = sorted(set(d) - known)
        if unknown:
            logger.warning("Ignoring unknown scenario fields: %s", ", ".join(unknown))
        data = {k: v for k, v in d.items() if k in known}
        if data.get("levels") is not None:
            data["levels"] = tuple(int(x) for x in data["levels"])
        data["sweep_values"] = tuple(float(x) for x in data.get("sweep_values") or ())
        return ScenarioConfig(**data)


@dataclass
class RunSummary:
    """JSON summary of a single scenario run."""

    label: str
    model: str
    frame: str
    drive_frequency: Optional[float] = None
    regime: Optional[str] = None
    terminal_fidelity: Optional[float] = None
    min_fidelity: Optional[float] = None
    rotated_terminal_fidelity: Optional[float] = None
    rotated_min_fidelity: Optional[float] = None
    unitarity_drift: Optional[float] = None
    reference_level: Optional[int] = None
    conditions: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    theorems: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    frame_consistency: Optional[Dict[str, Any]] = None
    crosschecks: List[Dict[str, Any]] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    messages: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        for key in ("terminal_fidelity", "min_fidelity", "rotated_terminal_fidelity",
                    "rotated_min_fidelity", "unitarity_drift", "drive_frequency"):
            d[key] = _sentinel(d[key])
        d["version"] = CONFIG.APP_VERSION
        return d


SWEEP_COLUMNS = (
    "value", "regime", "terminal_fidelity", "min_fidelity",
    "c1_inertial", "c2_inertial", "c3_inertial", "c4_inertial",
    "c1_noninertial", "c2_noninertial", "c3_noninertial", "c4_noninertial",
    "theorem1", "theorem1_deviation", "error",
)


@dataclass
class SweepRow:
    index: int
    value: float
    regime: str = ""
    terminal_fidelity: float = math.nan
    min_fidelity: float = math.nan
    inertial: Dict[str, float] = field(default_factory=dict)
    non_inertial: Dict[str, float] = field(default_factory=dict)
    theorem1: str = ""
    theorem1_deviation: float = math.nan
    messages: List[str] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def coefficient(self, frame: str, name: str) -> float:
        table = self.inertial if frame == "inertial" else self.non_inertial
        return float(table.get(name, math.nan))

    def csv_row(self) -> List[Any]:
        row: List[Any] = [self.value, self.regime, self.terminal_fidelity, self.min_fidelity]
        row += [self.coefficient("inertial", f"c{n}") for n in range(1, 5)]
        row += [self.coefficient("non_inertial", f"c{n}") for n in range(1, 5)]
        row += [self.theorem1, self.theorem1_deviation, self.error or ""]
        return row

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "value": self.value,
            "regime": self.regime,
            "terminal_fidelity": _sentinel(self.terminal_fidelity),
            "min_fidelity": _sentinel(self.min_fidelity),
            "inertial": {k: _sentinel(v) for k, v in self.inertial.items()},
            "non_inertial": {k: _sentinel(v) for k, v in self.non_inertial.items()},
            "theorem1": self.theorem1,
            "theorem1_deviation": _sentinel(self.theorem1_deviation),
            "messages": list(self.messages),
            "error": self.error,
        }

    @staticmethod
    def from_dict(d: Dict[str, Any]) -> "SweepRow":
        return SweepRow(
            index=int(d["index"]),
            value=float(d["value"]),
            regime=str(d.get("regime", "")),
            terminal_fidelity=_number(d.get("terminal_fidelity")) if d.get("terminal_fidelity") is not None else math.nan,
            min_fidelity=_number(d.get("min_fidelity")) if d.get("min_fidelity") is not None else math.nan,
            inertial={k: _number(v) for k, v in (d.get("inertial") or {}).items()},
            non_inertial={k: _number(v) for k, v in (d.get("non_inertial") or {}).items()},
            theorem1=str(d.get("theorem1", "")),
            theorem1_deviation=_number(d.get("theorem1_deviation")) if d.get("theorem1_deviation") is not None else math.nan,
            messages=list(d.get("messages") or []),
            error=d.get("error"),
        )

    @staticmethod
    def failed(index: int, value: float, error: str) -> "SweepRow":
        return SweepRow(index=index, value=value, error=error)


@dataclass
class SweepResult:
    parameter: str
    rows: List[SweepRow] = field(default_factory=list)

    @property
    def values(self) -> List[float]:
        return [r.value for r in self.rows]

    @property
    def failed_rows(self) -> List[SweepRow]:
        return [r for r in self.rows if not r.ok]

    @property
    def all_failed(self) -> bool:
        return bool(self.rows) and all(not r.ok for r in self.rows)

    def table(self) -> Tuple[List[str], List[List[Any]]]:
        header = list(SWEEP_COLUMNS)
        header[0] = self.parameter
        return header, [r.csv_row() for r in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "parameter": self.parameter,
            "rows": [r.to_dict() for r in self.rows],
            "failed": len(self.failed_rows),
            "version": CONFIG.APP_VERSION,
        }

    @staticmethod
    def from_dict(d: Dict[str, Any]) -> "SweepResult":
        rows = [SweepRow.from_dict(r) for r in d.get("rows") or []]
        rows.sort(key=lambda r: r.value)
        return SweepResult(parameter=str(d.get("parameter", "a")), rows=rows)
