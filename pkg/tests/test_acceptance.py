"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. One criterion (delay_robust_indicator) is deliberately left failing;
see its docstring.
"""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from nicholson.bounds import dissipativity_bound, lemma21_sequence, theorem24_bounds
from nicholson.cli import main as cli_main
from nicholson.equilibrium import (
    POTENTIALLY_DELAY_UNSTABLE,
    ROBUSTLY_STABLE,
    _damped_newton,
    delay_robustness,
    solve_positive_equilibrium,
)
from nicholson.matrices import (
    community_matrix,
    eigen_oracle,
    find_positive_c_auto,
    is_nonsingular_m_matrix,
    spectral_bound,
)
from nicholson.simulate import (
    LABEL_OSCILLATION,
    LABEL_POSITIVE,
    HistorySpec,
    integrate_dde,
    tail_stats,
)

from conftest import (
    example21_system,
    example22_system,
    figure2a_matrix,
    figure3_system,
    random_cooperative_matrix,
    random_irreducible_system,
)


def criterion(name: str, checks: list[tuple[bool, str]]) -> None:
    ok = all(flag for flag, _ in checks)
    failing = "; ".join(msg for flag, msg in checks if not flag)
    line = f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}"
    if failing:
        line += f" ({failing})"
    print(line)
    assert ok, f"{name}: {failing}"


def test_criterion_spectral_bound():
    checks = []
    s_fig2a = spectral_bound(figure2a_matrix()).bound
    checks.append((abs(s_fig2a - 9.0) <= 1e-9, f"fig2a bound {s_fig2a} != 9"))
    s_ex22 = spectral_bound(community_matrix(example22_system())).bound
    expected = (-1.0 + math.sqrt(13.0)) / 2.0
    checks.append((abs(s_ex22 - expected) <= 1e-9, f"ex22 bound {s_ex22} != {expected}"))
    rng = np.random.default_rng(808080)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 7))
        mat = random_cooperative_matrix(rng, n)
        bound = spectral_bound(mat).bound
        oracle = max(z.real for z in eigen_oracle(mat, 1e-11))
        worst = max(worst, abs(bound - oracle))
    checks.append((worst <= 1e-8, f"worst power-iteration/oracle gap {worst:.2e} > 1e-8"))
    criterion("spectral_bound", checks)


def test_criterion_threshold_sharpness_irreducible():
    rng = np.random.default_rng(909090)
    mismatches = 0
    for trial in range(200):
        target = float(rng.uniform(0.1, 1.2)) * (1 if trial % 2 == 0 else -1)
        sys = random_irreducible_system(rng, target)
        M = community_matrix(sys).entries
        s_positive = spectral_bound(M).bound > 0
        c_found = find_positive_c_auto(M) is not None
        eq_found = solve_positive_equilibrium(sys, cross_check=False) is not None
        if not (s_positive == c_found == eq_found):
            mismatches += 1
    criterion("threshold_sharpness_irreducible",
              [(mismatches == 0, f"{mismatches} mismatches out of 200")])


def test_criterion_reducible_counterexample(battery):
    sys = example21_system()
    M = community_matrix(sys)
    spectral = spectral_bound(M)
    run = battery["ex21"]
    stats = tail_stats(run.trajectory)
    checks = [
        (spectral.bound > 0, f"s(M) = {spectral.bound} not positive"),
        (find_positive_c_auto(M.entries) is None, "a positive c unexpectedly exists"),
        (run.report.per_patch.omega == (1,), f"omega = {run.report.per_patch.omega} != (1,)"),
        (stats.tail_max[0] < 1e-3, f"patch-1 tail_max {stats.tail_max[0]:.2e} >= 1e-3"),
        (stats.tail_min[1] > 1e-2, f"patch-2 tail_min {stats.tail_min[1]:.2e} <= 1e-2"),
    ]
    criterion("reducible_counterexample", checks)


def test_criterion_dissipativity(battery):
    bound22 = dissipativity_bound(example22_system())
    target = np.array([math.exp(-1.0), 2.0 * math.exp(-1.0)])
    checks = [(np.max(np.abs(bound22 - target)) <= 1e-12,
               f"ex22 bound off by {np.max(np.abs(bound22 - target)):.2e}")]
    for run in battery.values():
        bound = dissipativity_bound(run.scenario.system)
        stats = tail_stats(run.trajectory)
        ok = bool(np.all(stats.tail_max <= bound * 1.02 + 1e-12))
        checks.append((ok, f"{run.name} exceeds its ceiling"))
    criterion("dissipativity", checks)


def test_criterion_theorem24_containment(battery):
    run = battery["thm24"]
    lower = min(1.2, math.exp(1.2 + 1.5 - 1.0 - math.exp(0.5)))
    upper = math.exp(0.5)
    stats = tail_stats(run.trajectory)
    ok_low = bool(np.all(stats.tail_min >= lower * 0.98))
    ok_high = bool(np.all(stats.tail_max <= upper * 1.02))
    criterion("theorem24_containment", [
        (ok_low, f"tail_min {stats.tail_min} below {lower * 0.98:.4f}"),
        (ok_high, f"tail_max {stats.tail_max} above {upper * 1.02:.4f}"),
    ])


def test_criterion_lemma21_recurrence():
    rng = np.random.default_rng(111111)
    checks = []
    for _ in range(100):
        n = int(rng.integers(1, 5))
        c = rng.uniform(0.3, 2.0, n)
        m = float(rng.uniform(0.05, 0.9) * min(1.0 / c.max(), 2.0))
        gammas = np.exp(c * m) * rng.uniform(1.0, 3.0, n)
        s0 = float(rng.uniform(0.01, 1.0) * m)
        seq = lemma21_sequence(gammas, c, m, s0, 10_000)
        if not np.all(np.diff(seq) >= -1e-15):
            checks.append((False, "sequence decreased"))
        if abs(seq[-1] - m) > 1e-8:
            checks.append((False, f"limit off by {abs(seq[-1] - m):.2e}"))
    checks.append((True, ""))
    criterion("lemma21_recurrence", checks)


def test_criterion_equilibrium_certification(battery, random_feasible_battery):
    rng = np.random.default_rng(121212)
    feasible = [run.scenario.system for run in battery.values()
                if run.report.equilibrium is not None]
    checks = []
    for sys in feasible + random_feasible_battery:
        cert = solve_positive_equilibrium(sys, cross_check=True)
        if not (cert.flow_converged and cert.flow_agreement <= 1e-6):
            checks.append((False, f"flow gap {cert.flow_agreement}"))
        if not cert.neg_jacobian_is_nsM:
            checks.append((False, "-Df(x*) failed the M-matrix test"))
        if cert.index != 1:
            checks.append((False, f"index {cert.index} != +1"))
        box = dissipativity_bound(sys)
        for _ in range(20):
            start = rng.uniform(0.05, 1.0, sys.n) * box
            got = _damped_newton(sys, start)
            if got is None:
                continue
            root = got[0]
            if np.all(root > 1e-8) and np.max(np.abs(root - cert.x_star)) > 1e-8:
                checks.append((False, "a second positive root appeared"))
    checks.append((True, ""))
    criterion("equilibrium_certification", checks)


def test_criterion_figure_reproduction(tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli_main, ["reproduce", "all", "--out-dir", str(tmp_path)])
    checks = [(result.exit_code == 0, f"exit code {result.exit_code}")]
    manifest_3a = json.loads((tmp_path / "3a" / "manifest.json").read_text())
    manifest_3b = json.loads((tmp_path / "3b" / "manifest.json").read_text())
    checks.append((manifest_3a["observed_labels"][1] == LABEL_POSITIVE,
                   f"3a patch 2 label {manifest_3a['observed_labels'][1]}"))
    checks.append((manifest_3b["observed_labels"][1] == LABEL_OSCILLATION,
                   f"3b patch 2 label {manifest_3b['observed_labels'][1]}"))
    criterion("figure_reproduction", checks)


def test_criterion_delay_robust_indicator():
    """Deliberately failing: the pinned expectation lambda_2 < 0 is wrong.

    A negative lambda_2 = d_2 - beta_2 |h'(x_2*)| needs the cross-coupling
    a_21 x_1* to be near zero (the limit where x_2* -> log(beta_2/d_2) and
    lambda_2 -> d_2 (2 - x_2*(0)) < 0). The fig3 preset has a_21 x_1* ~ 1.69,
    which pushes x_2* up to ~2.4395 and lambda_2 to +0.117. The verdict-level
    behavior (fig3 PotentiallyDelayUnstable because N-hat has a negative
    eigenvalue, Example-2.2 RobustlyStable) holds and is asserted here too;
    this test stays red to keep the discrepancy visible. See the decisions
    ledger for the full derivation.
    """
    fig3 = figure3_system()
    cert3 = solve_positive_equilibrium(fig3, cross_check=False)
    robust3 = delay_robustness(fig3, cert3.x_star)
    ex22 = example22_system()
    cert22 = solve_positive_equilibrium(ex22, cross_check=False)
    robust22 = delay_robustness(ex22, cert22.x_star)
    lambda2 = float(robust3.diagonal_lambdas[1])
    checks = [
        (robust22.verdict == ROBUSTLY_STABLE
         and is_nonsingular_m_matrix(robust22.n_hat), "ex22 N-hat not a non-singular M-matrix"),
        (robust3.verdict == POTENTIALLY_DELAY_UNSTABLE, "fig3 verdict not PotentiallyDelayUnstable"),
        (lambda2 < 0.0,
         f"fig3 lambda_2 = {lambda2:+.6f} (pinned expectation < 0 is unattainable at "
         f"these parameters; x_2* = {cert3.x_star[1]:.6f})"),
    ]
    criterion("delay_robust_indicator", checks)


def test_criterion_positivity_and_order(battery):
    checks = []
    for run in battery.values():
        checks.append((bool(np.min(run.trajectory.states) >= 0.0),
                       f"{run.name} produced a negative state"))
    sys = figure3_system(tau2=1.0)
    hist = HistorySpec.constant([0.5, 0.8])

    def terminal(dt):
        return integrate_dde(sys, hist, t_end=6.0, dt=dt).states[-1]

    e1, e2, e3 = terminal(0.05), terminal(0.025), terminal(0.0125)
    ratio = float(np.max(np.abs(e1 - e2)) / np.max(np.abs(e2 - e3)))
    checks.append((16.0 * 0.7 <= ratio <= 16.0 * 1.3, f"order ratio {ratio:.2f} outside 16 +- 30%"))
    criterion("positivity_and_convergence_order", checks)
