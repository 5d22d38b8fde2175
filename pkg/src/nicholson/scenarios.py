"""Scenario files and the built-in demonstration presets.

A scenario JSON document carries the system parameters at top level
(n, m, d, a, beta, tau, enforce_mortality_form) plus optional name, history,
t_end and dt; see the README for the exact schema. Presets fig1a..fig3b
encode the canned parameter sets behind the ``reproduce`` command together
with the qualitative tail labels they are expected to produce.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .model import PatchSystem
from .simulate import (
    HistorySpec,
    LABEL_OSCILLATION,
    LABEL_POSITIVE,
    LABEL_ZERO,
)

__all__ = [
    "Scenario",
    "ScenarioError",
    "FigurePreset",
    "scenario_from_dict",
    "scenario_to_dict",
    "load_scenario",
    "FIGURE_PRESETS",
    "FIGURE_IDS",
    "battery_scenarios",
]

DEFAULT_T_END = 500.0


class ScenarioError(ValueError):
    """Malformed scenario document."""


@dataclass(frozen=True)
class Scenario:
    name: str
    system: PatchSystem
    history: HistorySpec
    t_end: float = DEFAULT_T_END
    dt: Optional[float] = None


def scenario_from_dict(data: dict) -> Scenario:
    try:
        system = PatchSystem.from_dict(data)
        n = system.n
        hist_data = data.get("history")
        if hist_data is None:
            history = HistorySpec.constant([1.0] * n)
        else:
            history = HistorySpec.from_dict(hist_data)
        t_end = float(data.get("t_end", DEFAULT_T_END))
        dt = data.get("dt")
        return Scenario(
            name=str(data.get("name", "scenario")),
            system=system,
            history=history,
            t_end=t_end,
            dt=None if dt is None else float(dt),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from exc


def scenario_to_dict(sc: Scenario) -> dict:
    out = {"name": sc.name}
    out.update(sc.system.to_dict())
    out["history"] = sc.history.to_dict()
    out["t_end"] = sc.t_end
    out["dt"] = sc.dt
    return out


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario document must be a JSON object")
    return scenario_from_dict(data)


@dataclass(frozen=True)
class FigurePreset:
    figure_id: str
    pair: str                                   # panels sharing a two-panel figure
    scenario: Scenario
    expected_labels: tuple[tuple[str, ...], ...]  # acceptable labels per patch
    label_tol: float = 1e-3
    note: str = ""


def _two_patch(name, beta1, beta2, d1, d2, a12, a21, tau1, tau2, t_end=DEFAULT_T_END):
    system = PatchSystem(
        n=2, m=1,
        d=[d1, d2],
        a=[[0.0, a12], [a21, 0.0]],
        beta=[[beta1], [beta2]],
        tau=[[tau1], [tau2]],
    )
    return Scenario(name=name, system=system,
                    history=HistorySpec.constant([1.0, 1.0]), t_end=t_end)


def _figure2_scenario(name, a12, a31, a32):
    system = PatchSystem(
        n=3, m=1,
        d=[2.0, 1.0, 3.0],
        a=[[0.0, a12, 1.0], [1.0, 0.0, 1.0], [a31, a32, 0.0]],
        beta=[[5.0], [10.0], [3.0]],
        tau=[[3.0], [8.0], [6.0]],
    )
    return Scenario(name=name, system=system,
                    history=HistorySpec.constant([1.0, 1.0, 1.0]), t_end=DEFAULT_T_END)


FIGURE_PRESETS: dict[str, FigurePreset] = {
    "1a": FigurePreset(
        figure_id="1a",
        pair="1",
        scenario=_two_patch("fig1a", beta1=1.0, beta2=3.0, d1=3.0, d2=2.0,
                            a12=1.0, a21=1.0, tau1=5.0, tau2=10.0),
        expected_labels=((LABEL_POSITIVE,), (LABEL_POSITIVE,)),
        note="two-way coupling: both patches settle on the globally stable positive equilibrium",
    ),
    "1b": FigurePreset(
        figure_id="1b",
        pair="1",
        scenario=_two_patch("fig1b", beta1=1.0, beta2=3.0, d1=3.0, d2=2.0,
                            a12=0.0, a21=1.0, tau1=5.0, tau2=10.0),
        expected_labels=((LABEL_ZERO,), (LABEL_POSITIVE, LABEL_OSCILLATION)),
        note="one-way coupling makes the system reducible: patch 1 dies out despite s(M) > 0",
    ),
    "2a": FigurePreset(
        figure_id="2a",
        pair="2",
        scenario=_figure2_scenario("fig2a", a12=0.0, a31=0.0, a32=0.0),
        expected_labels=((LABEL_POSITIVE,), (LABEL_OSCILLATION,), (LABEL_ZERO,)),
        label_tol=0.02,
        note="reducible three-patch chain: convergence, oscillation and extinction coexist; "
             "patch 3 sits on a critical block (beta_3 = d_3) and decays only algebraically, "
             "hence the widened label tolerance",
    ),
    "2b": FigurePreset(
        figure_id="2b",
        pair="2",
        scenario=_figure2_scenario("fig2b", a12=0.1, a31=0.1, a32=0.1),
        expected_labels=(
            (LABEL_POSITIVE,),
            (LABEL_OSCILLATION, LABEL_POSITIVE),
            (LABEL_POSITIVE,),
        ),
        label_tol=0.02,
        note="the 0.1 couplings make the coupling graph strongly connected: every patch persists",
    ),
    "3a": FigurePreset(
        figure_id="3a",
        pair="3",
        scenario=_two_patch("fig3a", beta1=3.0, beta2=15.0, d1=2.0, d2=2.0,
                            a12=1.0, a21=1.0, tau1=1.0, tau2=2.0),
        expected_labels=((LABEL_POSITIVE,), (LABEL_POSITIVE,)),
        note="gamma_2 > e^2 so stability is delay-dependent; the short delay still converges",
    ),
    "3b": FigurePreset(
        figure_id="3b",
        pair="3",
        scenario=_two_patch("fig3b", beta1=3.0, beta2=15.0, d1=2.0, d2=2.0,
                            a12=1.0, a21=1.0, tau1=1.0, tau2=3.5),
        expected_labels=((LABEL_OSCILLATION,), (LABEL_OSCILLATION,)),
        note="raising the patch-2 delay past the stability margin sustains a periodic orbit",
    ),
}

FIGURE_IDS = tuple(FIGURE_PRESETS)


def battery_scenarios() -> dict[str, Scenario]:
    """Named deterministic scenarios exercised by the verification suite."""
    battery = {fid: preset.scenario for fid, preset in FIGURE_PRESETS.items()}
    battery["ex21"] = Scenario(
        name="ex21",
        system=PatchSystem(
            n=2, m=1, d=[2.0, 1.0],
            a=[[0.0, 0.0], [0.5, 0.0]],
            beta=[[1.0], [3.0]],
            tau=[[1.0], [1.0]],
        ),
        history=HistorySpec.constant([1.0, 1.0]),
        t_end=300.0,
    )
    battery["thm24"] = Scenario(
        name="thm24",
        system=PatchSystem(
            n=3, m=1, d=[1.5, 1.5, 1.5],
            a=[[0.0, 0.1, 0.1], [0.1, 0.0, 0.1], [0.1, 0.1, 0.0]],
            beta=[[4.5], [5.0], [5.7]],
            tau=[[1.0], [2.0], [1.5]],
        ),
        history=HistorySpec.constant([1.0, 1.0, 1.0]),
        t_end=500.0,
    )
    battery["extinct"] = Scenario(
        name="extinct",
        system=PatchSystem(
            n=2, m=1, d=[3.0, 2.0],
            a=[[0.0, 1.0], [1.0, 0.0]],
            beta=[[0.5], [1.0]],
            tau=[[5.0], [10.0]],
        ),
        history=HistorySpec.constant([1.0, 1.0]),
        t_end=500.0,
    )
    battery["scalar"] = Scenario(
        name="scalar",
        system=PatchSystem(n=1, m=1, d=[2.0], a=[[0.0]], beta=[[3.0]], tau=[[1.0]]),
        history=HistorySpec.constant([1.0]),
        t_end=500.0,
    )
    return battery
