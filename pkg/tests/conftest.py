"""Shared fixtures: canonical systems, the deterministic scenario battery with
cached trajectories, and seeded random-system generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pytest

from nicholson.classify import ClassificationReport, classify_dynamics
from nicholson.matrices import community_matrix, spectral_bound
from nicholson.model import PatchSystem, validate_system
from nicholson.scenarios import FIGURE_PRESETS, Scenario, battery_scenarios
from nicholson.simulate import Trajectory, classify_tail, integrate_dde, tail_stats


def example22_system(**overrides) -> PatchSystem:
    params = dict(n=2, m=1, d=[3.0, 2.0], a=[[0.0, 1.0], [1.0, 0.0]],
                  beta=[[1.0], [3.0]], tau=[[5.0], [10.0]])
    params.update(overrides)
    return PatchSystem(**params)


def example21_system() -> PatchSystem:
    # acceptance variant: (beta1, d1, beta2, d2, a21) = (1, 2, 3, 1, 0.5)
    return PatchSystem(n=2, m=1, d=[2.0, 1.0], a=[[0.0, 0.0], [0.5, 0.0]],
                       beta=[[1.0], [3.0]], tau=[[1.0], [1.0]])


def figure3_system(tau2: float = 2.0) -> PatchSystem:
    return PatchSystem(n=2, m=1, d=[2.0, 2.0], a=[[0.0, 1.0], [1.0, 0.0]],
                       beta=[[3.0], [15.0]], tau=[[1.0], [tau2]])


def figure2a_matrix() -> np.ndarray:
    sys = FIGURE_PRESETS["2a"].scenario.system
    return community_matrix(sys).entries


def scalar_system(d: float = 2.0, beta: float = 3.0, tau: float = 1.0) -> PatchSystem:
    return PatchSystem(n=1, m=1, d=[d], a=[[0.0]], beta=[[beta]], tau=[[tau]])


@pytest.fixture(scope="session")
def ex22():
    return example22_system()


@pytest.fixture(scope="session")
def ex21():
    return example21_system()


def random_cooperative_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    mat = np.where(rng.random((n, n)) < 0.6, rng.uniform(0.0, 2.0, (n, n)), 0.0)
    np.fill_diagonal(mat, rng.uniform(-3.0, 3.0, n))
    return mat


def random_irreducible_system(rng: np.random.Generator, target_s: float) -> PatchSystem:
    """Valid irreducible system whose spectral bound lands near target_s.

    A full migration cycle guarantees strong connectivity; the birth scale is
    bisected against s(A - D + k diag(beta_i)), which is increasing in k.
    Targets are kept away from zero so float thresholding never flips a side.
    """
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 3))
    a = np.zeros((n, n))
    for i in range(n):
        a[(i + 1) % n, i] = rng.uniform(0.2, 1.0)
    extra = (rng.random((n, n)) < 0.3) * rng.uniform(0.1, 1.0, (n, n))
    np.fill_diagonal(extra, 0.0)
    a = np.maximum(a, extra)
    mort = rng.uniform(0.2, 1.5, n)
    d = mort + a.sum(axis=0)
    beta = rng.uniform(0.5, 2.0, (n, m))
    tau = rng.uniform(0.5, 3.0, (n, m))
    base = a - np.diag(d)
    totals = beta.sum(axis=1)
    lo, hi = 1e-6, 50.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if spectral_bound(base + mid * np.diag(totals)).bound < target_s:
            lo = mid
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    return PatchSystem(n=n, m=m, d=d, a=a, beta=beta * k, tau=tau)


def random_reducible_system(rng: np.random.Generator, target_s: float) -> PatchSystem:
    """Two irreducible groups coupled one way only (no flow from group 2 back to 1)."""
    sys1 = random_irreducible_system(rng, target_s)
    sys2 = random_irreducible_system(rng, -abs(target_s))
    n = sys1.n + sys2.n
    m = max(sys1.m, sys2.m)
    a = np.zeros((n, n))
    a[:sys1.n, :sys1.n] = sys1.a
    a[sys1.n:, sys1.n:] = sys2.a
    # one-way coupling: group 1 feeds group 2
    a[sys1.n + int(rng.integers(sys2.n)), int(rng.integers(sys1.n))] = rng.uniform(0.1, 0.5)

    def pad(mat: np.ndarray, rows: int) -> np.ndarray:
        out = np.zeros((rows, m))
        src = np.asarray(mat)
        out[:, :src.shape[1]] = src
        # spread so every patch keeps beta_i > 0 with m columns
        if src.shape[1] < m:
            out[:, src.shape[1]:] = src[:, :1] * 0.1
        return out

    beta = np.vstack([pad(sys1.beta, sys1.n), pad(sys2.beta, sys2.n)])
    tau = np.vstack([pad(sys1.tau, sys1.n) + 0.5, pad(sys2.tau, sys2.n) + 0.5])
    mort = rng.uniform(0.2, 1.5, n)
    d = mort + a.sum(axis=0)
    return PatchSystem(n=n, m=m, d=d, a=a, beta=beta, tau=tau)


@dataclass
class BatteryRun:
    name: str
    scenario: Scenario
    report: Optional[ClassificationReport]
    trajectory: Trajectory
    labels: list[str]
    label_tol: float


@pytest.fixture(scope="session")
def battery() -> dict[str, BatteryRun]:
    """Every deterministic scenario, classified and simulated exactly once."""
    runs: dict[str, BatteryRun] = {}
    for name, scenario in battery_scenarios().items():
        assert validate_system(scenario.system).ok, f"battery scenario {name} must validate"
        report = classify_dynamics(scenario.system)
        preset = FIGURE_PRESETS.get(name)
        tol = preset.label_tol if preset is not None else 1e-3
        traj = integrate_dde(scenario.system, scenario.history,
                             t_end=scenario.t_end, dt=scenario.dt)
        x_star = None if report.equilibrium is None else report.equilibrium.x_star
        labels = classify_tail(traj, x_star=x_star, tol=tol)
        runs[name] = BatteryRun(name=name, scenario=scenario, report=report,
                                trajectory=traj, labels=labels, label_tol=tol)
    return runs


@pytest.fixture(scope="session")
def random_feasible_battery() -> list[PatchSystem]:
    """Seeded feasible irreducible systems for the Newton / flow cross-checks."""
    rng = np.random.default_rng(424242)
    return [random_irreducible_system(rng, float(rng.uniform(0.2, 1.0))) for _ in range(8)]
