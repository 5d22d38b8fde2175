"""End-to-end jobs behind the service endpoints: validate, classify, simulate,
preset reproduction and delay sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classify import ClassificationReport, classify_dynamics
from .model import PatchSystem, validate_system
from .scenarios import FIGURE_PRESETS, FigurePreset, Scenario, scenario_to_dict
from .simulate import Trajectory, classify_tail, integrate_dde, tail_stats

__all__ = [
    "SimulationOutcome",
    "simulate_scenario",
    "ReproductionOutcome",
    "run_reproduction",
    "run_sweep",
]


@dataclass(frozen=True)
class SimulationOutcome:
    trajectory: Trajectory
    tail: dict
    labels: list[str]
    x_star: Optional[list[float]]


def _x_star_of(report: Optional[ClassificationReport]) -> Optional[np.ndarray]:
    if report is None or report.equilibrium is None:
        return None
    return report.equilibrium.x_star


def simulate_scenario(
    scenario: Scenario,
    t_end: Optional[float] = None,
    dt: Optional[float] = None,
    label_tol: float = 1e-3,
    report: Optional[ClassificationReport] = None,
    with_classification: bool = True,
) -> SimulationOutcome:
    """Integrate a scenario and label its tail (against x* when available)."""
    if report is None and with_classification:
        validation = validate_system(scenario.system)
        if validation.ok:
            report = classify_dynamics(scenario.system)
    x_star = _x_star_of(report)
    traj = integrate_dde(
        scenario.system,
        scenario.history,
        t_end=t_end if t_end is not None else scenario.t_end,
        dt=dt if dt is not None else scenario.dt,
    )
    labels = classify_tail(traj, x_star=x_star, tol=label_tol)
    return SimulationOutcome(
        trajectory=traj,
        tail=tail_stats(traj).to_dict(),
        labels=labels,
        x_star=None if x_star is None else list(map(float, x_star)),
    )


@dataclass(frozen=True)
class ReproductionOutcome:
    manifest: dict
    csv: str
    matched: bool


def run_reproduction(figure_id: str) -> ReproductionOutcome:
    """Classify + simulate one preset and compare tail labels with expectations."""
    if figure_id not in FIGURE_PRESETS:
        raise KeyError(f"unknown figure id {figure_id!r}; choose from {sorted(FIGURE_PRESETS)}")
    preset: FigurePreset = FIGURE_PRESETS[figure_id]
    scenario = preset.scenario
    report = classify_dynamics(scenario.system)
    outcome = simulate_scenario(scenario, label_tol=preset.label_tol, report=report)
    observed = outcome.labels
    matched = all(
        observed[i] in preset.expected_labels[i] for i in range(scenario.system.n)
    )
    manifest = {
        "figure_id": preset.figure_id,
        "pair": preset.pair,
        "note": preset.note,
        "scenario": scenario_to_dict(scenario),
        "label_tolerance": preset.label_tol,
        "expected_labels": [list(e) for e in preset.expected_labels],
        "observed_labels": observed,
        "matched": matched,
        "tail_stats": outcome.tail,
        "classification": report.to_dict(),
        "trajectory_csv": "trajectory.csv",
    }
    return ReproductionOutcome(manifest=manifest, csv=outcome.trajectory.to_csv(), matched=matched)


def run_sweep(
    scenario: Scenario,
    patch: int,
    delay_index: int,
    tau_from: float,
    tau_to: float,
    steps: int,
    t_end: Optional[float] = None,
    dt: Optional[float] = None,
    label_tol: float = 1e-3,
) -> list[dict]:
    """Re-simulate across a delay grid; one row per tau, sorted ascending.

    The equilibrium does not depend on the delays, so classification runs
    once and its x* anchors every label.
    """
    sys = scenario.system
    if not (0 <= patch < sys.n):
        raise ValueError(f"patch must lie in [0, {sys.n - 1}]")
    if not (0 <= delay_index < sys.m):
        raise ValueError(f"delay index must lie in [0, {sys.m - 1}]")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if tau_from <= 0 or tau_to <= 0:
        raise ValueError("delays must be positive")

    validation = validate_system(sys)
    report = classify_dynamics(sys) if validation.ok else None
    x_star = _x_star_of(report)

    if steps == 1 or tau_from == tau_to:
        grid = [tau_from]
    else:
        grid = list(np.linspace(tau_from, tau_to, steps))

    rows = []
    for tau_val in sorted(grid):
        tau = np.array(sys.tau, dtype=float)
        tau[patch, delay_index] = tau_val
        swept = PatchSystem(
            n=sys.n, m=sys.m, d=sys.d, a=sys.a, beta=sys.beta, tau=tau,
            enforce_mortality_form=sys.enforce_mortality_form,
        )
        traj = integrate_dde(
            swept, scenario.history,
            t_end=t_end if t_end is not None else scenario.t_end,
            dt=dt,
        )
        labels = classify_tail(traj, x_star=x_star, tol=label_tol)
        stats = tail_stats(traj)
        rows.append({
            "tau": float(tau_val),
            "label": labels[patch],
            "amplitude": float(stats.relative_amplitude[patch]),
        })
    return rows
