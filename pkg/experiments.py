"""
Scenario pipeline: config -> model, frame and grid -> dynamics, conditions,
theorem checks -> CSV/JSON artifacts.

Every function here is deterministic for a given ScenarioConfig; sweep rows
share no state and can run on any number of workers.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from adiabatic_conditions import ConditionReport, DegenerateGapError, condition_report
from config import CONFIG
from dynamics import (
    FidelityTrace,
    PropagationResult,
    adiabatic_fidelity,
    frame_consistency_check,
    initial_density,
    propagate,
    rotated_frame_fidelity,
    trace_table,
)
from frames import (
    FrameSpec,
    TheoremVerdict,
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
from hamiltonians import (
    HamiltonianModel,
    generic_decomposed,
    linear_ramp,
    nmr_rotating,
    oscillating_qubit,
    two_qubit_decomposition,
)
from linalg_core import DomainError, NumericalFailure
from logging_config import scenario_context
from models import RunSummary, ScenarioConfig, SweepResult, SweepRow
from spectral import TimeGrid, check_resolution, closed_form_crosscheck, minimum_steps, track_eigensystem
from storage import ConfigError, Diagnostic, load_tabulated_model, parse_config, write_csv, write_json
from workers import BatchSweeper

logger = logging.getLogger("AdiabaticFrames.Experiments")

RECIPES = ("fig2a", "fig2b", "fig2c", "nmr", "omegaT_limit")
CROSSCHECK_POINTS = 100


@dataclass
class ScenarioOutcome:
    """What a run produced: the summary record, the sweep table and written files."""

    summary: Optional[RunSummary] = None
    sweep: Optional[SweepResult] = None
    artifacts: List[str] = field(default_factory=list)

    @property
    def all_failed(self) -> bool:
        return self.sweep is not None and self.sweep.all_failed


# -------- Building blocks --------
def build_model(cfg: ScenarioConfig) -> HamiltonianModel:
    """Instantiate the configured Hamiltonian family."""
    name = cfg.model_name
    drive = cfg.drive_frequency
    if name == "oscillating_qubit":
        return oscillating_qubit(_need(cfg.omega0, "omega0"), _need(cfg.omegaT, "omegaT"),
                                 _need(drive, "omega"), convention=cfg.convention)
    if name == "nmr_rotating":
        return nmr_rotating(_need(cfg.omega0, "omega0"), _need(cfg.omegaRF, "omegaRF"), _need(drive, "omega"))
    if name == "linear_ramp":
        horizon = max(abs(cfg.t0), abs(cfg.tau))
        return linear_ramp(_need(cfg.omega0, "omega0"), _need(cfg.rate, "rate"), horizon=horizon)
    if name == "generic_two_qubit":
        return generic_decomposed(two_qubit_decomposition(_need(cfg.omega0, "omega0"), _need(cfg.omegaT, "omegaT"),
                                                          _need(drive, "omega")))
    if name == "tabulated":
        return load_tabulated_model(_need(cfg.table, "table"))
    raise DomainError(f"unknown model '{name}'")


def _need(value, name: str):
    if value is None:
        raise DomainError(f"model parameter {name} is required")
    return value


def build_frame(cfg: ScenarioConfig, model: HamiltonianModel) -> Optional[FrameSpec]:
    kind = cfg.frame_kind
    if kind == "none":
        return None
    if kind == "identity":
        return identity_frame(model.dim)
    if kind == "resonant":
        return resonant_frame(model, cfg.frame_rate)
    rate = cfg.frame_rate if cfg.frame_rate is not None else model.drive_frequency
    if rate is None:
        raise DomainError(f"frame '{kind}' needs frame.rate or a driven model")
    if model.dim != 2:
        raise DomainError(f"frame '{kind}' is defined for qubits only (model dimension {model.dim})")
    return sigma_z_frame(rate, half=(kind == "half_sigma_z"))


def grid_frequency(model: HamiltonianModel, frame: Optional[FrameSpec]) -> float:
    """Fastest frequency across the inertial and (if any) rotated models."""
    if frame is None:
        return model.max_frequency
    return max(model.max_frequency, model.max_frequency + abs(frame.rate) * frame.spread)


def build_grid(cfg: ScenarioConfig, model: HamiltonianModel, frame: Optional[FrameSpec] = None) -> TimeGrid:
    """Explicit steps if configured, otherwise the resolution-rule minimum."""
    model.check_span(cfg.t0, cfg.tau)
    if cfg.steps is not None:
        grid = TimeGrid(cfg.t0, cfg.tau, cfg.steps)
        check_resolution(grid, grid_frequency(model, frame), cfg.points_per_period, cfg.override_resolution)
        return grid
    return TimeGrid.for_frequency(cfg.t0, cfg.tau, grid_frequency(model, frame), cfg.points_per_period)


def model_regime(model: HamiltonianModel) -> Optional[str]:
    """Regime from the level splitting of omega0*H0 against the coupling strength."""
    static = model.static_hamiltonian
    coupling = model.params.get("omegaT", model.params.get("omegaRF"))
    if static is None or coupling is None or model.drive_frequency is None:
        return None
    levels = np.linalg.eigvalsh(static)
    splitting = float(levels[-1] - levels[0])
    return classify_regime(splitting, float(coupling), float(model.drive_frequency))


@dataclass
class Setup:
    cfg: ScenarioConfig
    model: HamiltonianModel
    frame: Optional[FrameSpec]
    grid: TimeGrid
    rho0: np.ndarray
    # build_grid already enforced the configured points-per-period rule
    override: bool = True


def prepare(cfg: ScenarioConfig) -> Setup:
    model = build_model(cfg)
    frame = build_frame(cfg, model)
    grid = build_grid(cfg, model, frame)
    rho0 = initial_density(cfg.initial_state, model.dim)
    logger.info("Scenario %s: model %s, frame %s, %d steps over [%g, %g] us",
                cfg.label, model.name, frame.name if frame else "none", grid.steps, grid.t0, grid.tau)
    return Setup(cfg, model, frame, grid, rho0)


# -------- Operations --------
def simulate(setup: Setup) -> Tuple[PropagationResult, FidelityTrace, Optional[FidelityTrace]]:
    """Propagate and score adiabaticity in the inertial and (if set) rotated frame."""
    override = setup.override
    result = propagate(setup.model, setup.rho0, setup.grid, override_resolution=override,
                       points_per_period=setup.cfg.points_per_period)
    trace, _ = adiabatic_fidelity(setup.model, result, override_resolution=override)
    rotated = None
    if setup.frame is not None:
        rotated = rotated_frame_fidelity(setup.model, setup.frame, result, override_resolution=override)
    logger.info("Fidelity: terminal %.6f, minimum %.6f (level %d)", trace.terminal, trace.minimum, trace.level)
    return result, trace, rotated


def conditions(setup: Setup) -> Dict[str, ConditionReport]:
    """C1..C4 in the inertial frame and, when a frame is configured, in the rotated one."""
    override = setup.override
    tau = setup.cfg.tau
    traj = track_eigensystem(setup.model, setup.grid, override_resolution=override)
    reports = {"inertial": condition_report(traj, setup.model, tau, setup.cfg.levels, frame="inertial")}
    if setup.frame is not None:
        rotated = transform_hamiltonian(setup.model, setup.frame)
        traj_o = track_eigensystem(rotated, setup.grid, override_resolution=override)
        reports["non_inertial"] = condition_report(traj_o, rotated, tau, setup.cfg.levels, frame=setup.frame.name)
    return reports


def _require_frame(setup: Setup, operation: str) -> FrameSpec:
    if setup.frame is None:
        raise ConfigError([Diagnostic(None, "frame.kind", f"{operation} needs a frame (frame.kind is none)")])
    return setup.frame


def theorem1(setup: Setup) -> Dict[str, TheoremVerdict]:
    frame = _require_frame(setup, "theorem1")
    cfg = setup.cfg
    verdicts = {"T1": theorem1_check(setup.model, frame, cfg.theorem_k, setup.grid, cfg.tolerance,
                                     override_resolution=setup.override)}
    if setup.model.static_hamiltonian is not None:
        verdicts["T1-reduced"] = theorem1_reduced_check(setup.model, frame, cfg.theorem_k, setup.grid,
                                                        cfg.tolerance, override_resolution=setup.override)
    return verdicts


def theorem2(setup: Setup) -> TheoremVerdict:
    frame = _require_frame(setup, "theorem2")
    cfg = setup.cfg
    return theorem2_check(setup.model, frame, cfg.theorem_n, setup.grid, cfg.tolerance,
                          override_resolution=setup.override)


def crosschecks(setup: Setup) -> List[Dict[str, object]]:
    """Printed closed forms vs numerics; only meaningful for the oscillating qubit."""
    if not setup.model.name.startswith("oscillating_qubit"):
        return []
    p = setup.model.params
    omega0, omegaT, omega = p["omega0"], p["omegaT"], p["omega"]
    window = TimeGrid(setup.grid.t0, setup.grid.tau, CROSSCHECK_POINTS)
    t_mid = float(window.points[CROSSCHECK_POINTS // 3])
    records: List[Dict[str, object]] = [dict(closed_form_crosscheck(omega0, omegaT, omega, t_mid).to_dict(),
                                             kind="eigensystem")]
    for rec in printed_rotated_form_crosscheck(omega0, omegaT, omega, window):
        records.append(dict(rec.to_dict(), kind="rotated_hamiltonian"))
    return records


# -------- Artifact writing --------
def _out_dir(cfg: ScenarioConfig, out: Optional[str]) -> str:
    path = out or cfg.output_dir
    os.makedirs(path, exist_ok=True)
    return path


def _summary_base(setup: Setup) -> RunSummary:
    return RunSummary(
        label=setup.cfg.label,
        model=setup.model.name,
        frame=setup.frame.name if setup.frame else "none",
        drive_frequency=setup.model.drive_frequency,
        regime=model_regime(setup.model),
    )


def _fill_dynamics(summary: RunSummary, result: PropagationResult, trace: FidelityTrace,
                   rotated: Optional[FidelityTrace]) -> None:
    summary.terminal_fidelity = trace.terminal
    summary.min_fidelity = trace.minimum
    summary.unitarity_drift = result.unitarity_drift
    summary.reference_level = trace.level
    if rotated is not None:
        summary.rotated_terminal_fidelity = rotated.terminal
        summary.rotated_min_fidelity = rotated.minimum


def run_simulate(cfg: ScenarioConfig, out: Optional[str] = None) -> ScenarioOutcome:
    setup = prepare(cfg)
    directory = _out_dir(cfg, out)
    result, trace, rotated = simulate(setup)
    summary = _summary_base(setup)
    _fill_dynamics(summary, result, trace, rotated)
    header, rows = trace_table(result, trace, rotated)
    files = [write_csv(os.path.join(directory, f"{cfg.label}_trace.csv"), header, rows)]
    return _finish(summary, files, directory)


def run_conditions(cfg: ScenarioConfig, out: Optional[str] = None) -> ScenarioOutcome:
    setup = prepare(cfg)
    directory = _out_dir(cfg, out)
    summary = _summary_base(setup)
    files = []
    for tag, report in conditions(setup).items():
        summary.conditions[tag] = report.to_dict()
        summary.messages.extend(report.messages)
        files.append(write_csv(os.path.join(directory, f"{cfg.label}_conditions_{tag}.csv"),
                               ["t_us", "c1", "c2", "c3", "c4"], report.trace_rows()))
    return _finish(summary, files, directory)


def _write_verdict(directory: str, label: str, verdict: TheoremVerdict) -> str:
    width = verdict.deviations.shape[1]
    tag = verdict.condition.lower().replace("-", "_")
    return write_csv(os.path.join(directory, f"{label}_{tag}.csv"),
                     ["t_us"] + [f"deviation_{m}" for m in range(width)], verdict.trace_rows())


def run_theorem1(cfg: ScenarioConfig, out: Optional[str] = None) -> ScenarioOutcome:
    setup = prepare(cfg)
    directory = _out_dir(cfg, out)
    summary = _summary_base(setup)
    files = []
    for tag, verdict in theorem1(setup).items():
        summary.theorems[tag] = verdict.to_dict()
        files.append(_write_verdict(directory, cfg.label, verdict))
    return _finish(summary, files, directory)


def run_theorem2(cfg: ScenarioConfig, out: Optional[str] = None) -> ScenarioOutcome:
    setup = prepare(cfg)
    directory = _out_dir(cfg, out)
    summary = _summary_base(setup)
    verdict = theorem2(setup)
    summary.theorems["T2"] = verdict.to_dict()
    return _finish(summary, [_write_verdict(directory, cfg.label, verdict)], directory)


def _finish(summary: RunSummary, files: List[str], directory: str) -> ScenarioOutcome:
    path = os.path.join(directory, f"{summary.label}_{CONFIG.SUMMARY_FILE}")
    summary.artifacts = [os.path.basename(f) for f in files] + [os.path.basename(path)]
    write_json(path, summary.to_dict())
    return ScenarioOutcome(summary=summary, artifacts=files + [path])


def run_scenario(cfg: ScenarioConfig, out: Optional[str] = None, workers: Optional[int] = None) -> ScenarioOutcome:
    """
    Full pipeline. A config with sweep values runs as a sweep; otherwise one
    scenario: dynamics, conditions in both frames, theorem checks, frame
    consistency and closed-form cross-checks.
    """
    if cfg.sweep_values:
        return sweep(cfg, out, workers)

    setup = prepare(cfg)
    directory = _out_dir(cfg, out)
    summary = _summary_base(setup)
    files: List[str] = []

    result, trace, rotated = simulate(setup)
    _fill_dynamics(summary, result, trace, rotated)
    header, rows = trace_table(result, trace, rotated)
    files.append(write_csv(os.path.join(directory, f"{cfg.label}_trace.csv"), header, rows))

    for tag, report in conditions(setup).items():
        summary.conditions[tag] = report.to_dict()
        summary.messages.extend(report.messages)
        files.append(write_csv(os.path.join(directory, f"{cfg.label}_conditions_{tag}.csv"),
                               ["t_us", "c1", "c2", "c3", "c4"], report.trace_rows()))

    if setup.frame is not None:
        for tag, verdict in theorem1(setup).items():
            summary.theorems[tag] = verdict.to_dict()
            files.append(_write_verdict(directory, cfg.label, verdict))
        consistency = frame_consistency_check(setup.model, setup.frame, setup.rho0, setup.grid,
                                              override_resolution=setup.override)
        summary.frame_consistency = consistency.to_dict()
        if consistency.flagged:
            summary.messages.append(
                f"frame consistency deviation {consistency.max_deviation:.3e} exceeds "
                f"{consistency.tolerance:.0e} after {consistency.halvings} halving(s) ({consistency.steps} steps)"
            )

    summary.crosschecks = crosschecks(setup)
    return _finish(summary, files, directory)


# -------- Sweeps --------
def _coefficients(report: ConditionReport) -> Dict[str, float]:
    return {k: float(v) for k, v in report.coefficients().items()}


def _diverged() -> Dict[str, float]:
    return {f"c{n}": math.inf for n in range(1, 5)}


def sweep_row(cfg: ScenarioConfig, index: int, value: float, trace_dir: Optional[str] = None) -> SweepRow:
    """
    Full pipeline for one sweep value. Failures are recorded in the row.

    A degenerate gap in the rotated frame (the exact resonance) gives +inf
    sentinels for the non-inertial coefficients rather than failing the row.
    """
    with scenario_context(f"{cfg.label} {cfg.sweep_parameter or 'a'}={value:.6g}"):
        return _sweep_row(cfg, index, value, trace_dir)


def _sweep_row(cfg: ScenarioConfig, index: int, value: float, trace_dir: Optional[str]) -> SweepRow:
    row = SweepRow(index=index, value=float(value))
    try:
        setup = prepare(cfg.with_sweep_value(value))
        row.regime = model_regime(setup.model) or ""
        override = setup.override

        result = propagate(setup.model, setup.rho0, setup.grid, override_resolution=override,
                           points_per_period=setup.cfg.points_per_period)
        traj = track_eigensystem(setup.model, setup.grid, override_resolution=override)
        trace, _ = adiabatic_fidelity(setup.model, result, traj=traj)
        row.terminal_fidelity = trace.terminal
        row.min_fidelity = trace.minimum
        if trace_dir is not None:
            header, rows = trace_table(result, trace)
            write_csv(os.path.join(trace_dir, f"{cfg.label}_{cfg.sweep_parameter or 'a'}={value:.6g}.csv"),
                      header, rows)

        try:
            report = condition_report(traj, setup.model, setup.cfg.tau, setup.cfg.levels, frame="inertial")
            row.inertial = _coefficients(report)
            row.messages.extend(report.messages)
        except DegenerateGapError as e:
            row.inertial = _diverged()
            row.messages.append(f"inertial: {e}")

        if setup.frame is not None:
            rotated = transform_hamiltonian(setup.model, setup.frame)
            try:
                traj_o = track_eigensystem(rotated, setup.grid, override_resolution=override)
                report_o = condition_report(traj_o, rotated, setup.cfg.tau, setup.cfg.levels, frame=setup.frame.name)
                row.non_inertial = _coefficients(report_o)
                row.messages.extend(report_o.messages)
                verdict = theorem1_check(setup.model, setup.frame, setup.cfg.theorem_k, setup.grid,
                                         setup.cfg.tolerance, override_resolution=override,
                                         traj=traj, traj_o=traj_o)
                row.theorem1 = verdict.verdict
                row.theorem1_deviation = verdict.max_deviation
            except NumericalFailure as e:
                row.non_inertial = _diverged()
                row.messages.append(f"non-inertial: {e}")
                logger.warning("Sweep value %.6g: rotated frame degenerate: %s", value, e)
    except (ConfigError, DomainError, NumericalFailure) as e:
        logger.warning("Sweep value %.6g failed: %s", value, e)
        return SweepRow.failed(index, float(value), str(e))
    return row


def sweep(cfg: ScenarioConfig, out: Optional[str] = None, workers: Optional[int] = None,
          keep_traces: bool = False) -> ScenarioOutcome:
    """
    One row per sweep value, computed concurrently and assembled in value order.

    Writes `<label>_sweep.csv` and `<label>_sweep.json`.
    """
    values = sorted(cfg.sweep_values)
    if not values:
        raise ConfigError([Diagnostic(None, "sweep.values", "sweep values must be nonempty")])
    directory = _out_dir(cfg, out)
    parameter = cfg.sweep_parameter or "a"
    trace_dir = directory if keep_traces else None

    def task(index: int, value: float) -> SweepRow:
        return sweep_row(cfg, index, value, trace_dir)

    sweeper = BatchSweeper(workers if workers is not None else cfg.workers)
    rows = sweeper.run(values, task)
    result = SweepResult(parameter=parameter, rows=rows)

    header, table = result.table()
    files = [
        write_csv(os.path.join(directory, f"{cfg.label}_sweep.csv"), header, table),
        write_json(os.path.join(directory, f"{cfg.label}_sweep.json"), result.to_dict()),
    ]
    if result.failed_rows:
        logger.warning("%d of %d sweep row(s) failed", len(result.failed_rows), len(rows))
    if keep_traces:
        files.extend(os.path.join(directory, f"{cfg.label}_{parameter}={v:.6g}.csv")
                     for v, r in zip(values, rows) if r.ok)
    return ScenarioOutcome(sweep=result, artifacts=files)


# -------- Validation --------
def validate_config(path: str, points_per_period: Optional[int] = None,
                    override_resolution: bool = False) -> ScenarioConfig:
    """
    Parse and statically validate a scenario file, including the resolution
    rule for every sweep value. Raises ConfigError listing every violation.

    `points_per_period` and `override_resolution` take precedence over the file.
    """
    cfg = parse_config(path)
    if points_per_period is not None:
        cfg = replace(cfg, points_per_period=points_per_period)
    if override_resolution:
        cfg = replace(cfg, override_resolution=True)
    diags: List[Diagnostic] = []
    values = cfg.sweep_values or (None,)
    for value in values:
        candidate = cfg.with_sweep_value(value) if value is not None else cfg
        where = f" (sweep value {value:g})" if value is not None else ""
        try:
            model = build_model(candidate)
            model.check_span(candidate.t0, candidate.tau)
            frame = build_frame(candidate, model)
            if candidate.steps is not None and not candidate.override_resolution:
                needed = minimum_steps(candidate.t0, candidate.tau, grid_frequency(model, frame),
                                       candidate.points_per_period)
                if candidate.steps < needed:
                    diags.append(Diagnostic(None, "grid.steps",
                                            f"{candidate.steps} steps violate the resolution rule{where}; "
                                            f"use at least {needed} or set grid.override_resolution"))
        except ConfigError as e:
            diags.extend(e.diagnostics)
        except DomainError as e:
            diags.append(Diagnostic(None, "model", f"{e}{where}"))
    if diags:
        raise ConfigError(diags, path)
    logger.info("Config %s is valid", path)
    return cfg


# -------- Reproduction recipes --------
def reference_scenario(label: str, **overrides) -> ScenarioConfig:
    """Oscillating qubit at the reference parameters, transition convention."""
    base = ScenarioConfig(
        model_name="oscillating_qubit",
        convention="transition",
        omega0=CONFIG.REFERENCE_OMEGA0,
        omegaT=CONFIG.REFERENCE_OMEGA_T,
        tau=CONFIG.REFERENCE_TAU,
        label=label,
    )
    return replace(base, **overrides)


def reference_sweep_values() -> Tuple[float, ...]:
    from storage import merge_reference_values

    log_points = np.logspace(math.log10(CONFIG.SWEEP_LOG_MIN), math.log10(CONFIG.SWEEP_LOG_MAX),
                             CONFIG.SWEEP_LOG_POINTS)
    return tuple(merge_reference_values(float(v) for v in log_points))


def nmr_scenarios() -> List[ScenarioConfig]:
    """Far-from-resonance and resonant drives of the rotating-field spin."""
    omega0 = CONFIG.REFERENCE_OMEGA0
    far = omega0 - CONFIG.NMR_FAR_DETUNING_RATIO * CONFIG.NMR_OMEGA_RF
    common = dict(model_name="nmr_rotating", omega0=omega0, omegaRF=CONFIG.NMR_OMEGA_RF,
                  frame_kind="half_sigma_z", tau=CONFIG.NMR_TAU, tolerance=CONFIG.NMR_THEOREM_TOLERANCE)
    return [
        ScenarioConfig(omega=far, label="nmr_far", **common),
        ScenarioConfig(omega=omega0, label="nmr_resonance", **common),
    ]


LIMIT_HEADER = ("omegaT", "tan_theta", "printed_transverse_peak", "numeric_transverse_peak",
                "printed_min_deviation")


def omegaT_limit_rows(omega0: float, omega: float,
                      factors: Tuple[float, ...] = CONFIG.OMEGA_T_LIMIT_FACTORS) -> List[Tuple[Optional[float], ...]]:
    """
    Shrink omegaT towards 0 at fixed drive and compare the printed rotated
    Hamiltonian with the numeric one over one drive period.

    The printed transverse amplitude carries tan(theta) = omega0/omegaT and
    grows without bound, while the numeric transverse field vanishes with
    omegaT. Columns left blank at omegaT = 0, where the printed form is not finite.
    """
    window = TimeGrid(0.0, 2.0 * math.pi / abs(omega), CROSSCHECK_POINTS)
    frame = sigma_z_frame(omega, half=True)
    rows: List[Tuple[Optional[float], ...]] = []
    for factor in factors:
        omegaT = factor * CONFIG.REFERENCE_OMEGA_T
        rotated = transform_hamiltonian(oscillating_qubit(omega0, omegaT, omega, "transition"), frame)
        numeric_peak = float(np.max(np.abs(rotated.sample(window.points)[:, 0, 1])))
        records = [r for r in printed_rotated_form_crosscheck(omega0, omegaT, omega, window) if r.evaluable]
        if not records:
            rows.append((omegaT, None, None, numeric_peak, None))
            continue
        tan_theta = omega0 / omegaT
        printed_peak = float(np.max(np.abs(np.sin(omega * window.points)))) * abs(tan_theta * omega0) / 2.0
        deviation = min(r.max_deviation for r in records)
        logger.info("omegaT=%.3e: tan(theta)=%.3e, printed transverse %.3e, numeric %.3e, deviation %.3e",
                    omegaT, tan_theta, printed_peak, numeric_peak, deviation)
        rows.append((omegaT, tan_theta, printed_peak, numeric_peak, deviation))
    return rows


def reproduce(recipe: str, out: Optional[str] = None, workers: Optional[int] = None,
              points_per_period: Optional[int] = None, override_resolution: bool = False) -> ScenarioOutcome:
    """
    fig2a: fidelity traces for the five reference a values.
    fig2b: inertial C1..C4 against a = omega/omega0.
    fig2c: the same in the resonant frame exp(i w H0 t).
    nmr:   Theorem 2 verdicts far from and at resonance.
    omegaT_limit: printed rotated form against the numeric one as omegaT -> 0.
    """
    if recipe not in RECIPES:
        raise ConfigError([Diagnostic(None, "recipe", f"unknown recipe '{recipe}'; expected one of {', '.join(RECIPES)}")])
    grid_overrides = {"override_resolution": override_resolution}
    if points_per_period is not None:
        grid_overrides["points_per_period"] = points_per_period
    logger.info("Reproducing %s", recipe)

    if recipe == "fig2a":
        cfg = reference_scenario("fig2a", sweep_parameter="a", sweep_values=tuple(sorted(CONFIG.REFERENCE_A_VALUES)),
                             **grid_overrides)
        return sweep(cfg, out, workers, keep_traces=True)
    if recipe == "fig2b":
        cfg = reference_scenario("fig2b", sweep_parameter="a", sweep_values=reference_sweep_values(), **grid_overrides)
        return sweep(cfg, out, workers)
    if recipe == "fig2c":
        cfg = reference_scenario("fig2c", frame_kind="resonant", sweep_parameter="a",
                             sweep_values=reference_sweep_values(), **grid_overrides)
        return sweep(cfg, out, workers)

    directory = out or CONFIG.DEFAULT_OUTPUT_DIR
    if recipe == "omegaT_limit":
        omega0 = CONFIG.REFERENCE_OMEGA0
        rows = omegaT_limit_rows(omega0, CONFIG.OMEGA_T_LIMIT_A * omega0)
        return ScenarioOutcome(artifacts=[write_csv(os.path.join(directory, "omegaT_limit.csv"), LIMIT_HEADER, rows)])

    outcome = ScenarioOutcome(artifacts=[])
    verdicts: Dict[str, object] = {}
    for cfg in nmr_scenarios():
        cfg = replace(cfg, **grid_overrides)
        single = run_theorem2(cfg, directory)
        outcome.artifacts.extend(single.artifacts)
        verdicts[cfg.label] = single.summary.theorems["T2"] if single.summary else None
    outcome.artifacts.append(write_json(os.path.join(directory, "nmr_verdicts.json"), verdicts))
    return outcome
