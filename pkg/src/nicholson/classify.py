"""Decision tree for the patch system: extinction vs. persistence, equilibrium
existence, and delay-robust stability certificates, with machine-checkable
evidence attached to every verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import (
    AsymptoticBounds,
    Theorem24Bounds,
    dissipativity_bound,
    gamma_exponent_range,
    permanence_constants,
    theorem24_bounds,
)
from .equilibrium import (
    DelayRobustnessVerdict,
    EquilibriumCertificate,
    delay_robustness,
    solve_positive_equilibrium,
)
from .matrices import (
    FrobeniusForm,
    SpectralResult,
    community_matrix,
    find_positive_c_auto,
    spectral_bound,
    strongly_connected_blocks,
)
from .model import PatchSystem, gamma_coefficients, validate_system

__all__ = [
    "ClassificationReport",
    "classify_dynamics",
    "persistent_block",
    "a2_check",
    "GLOBALLY_STABLE_ZERO",
    "ZERO_UNSTABLE",
    "UNIFORMLY_PERSISTENT",
    "NOT_PERSISTENT",
    "ALL_PATCHES_PERSISTENT",
    "PERSISTENT_ON_BLOCK",
    "EXTINCT",
    "GAS_A2",
    "GAS_XSTAR_WINDOW",
]

GLOBALLY_STABLE_ZERO = "GloballyStableZero"
ZERO_UNSTABLE = "ZeroUnstable"
UNIFORMLY_PERSISTENT = "UniformlyPersistent"
NOT_PERSISTENT = "NotPersistent"
ALL_PATCHES_PERSISTENT = "AllPatchesPersistent"
PERSISTENT_ON_BLOCK = "PersistentOnBlock"
EXTINCT = "Extinct"
GAS_A2 = "A2"
GAS_XSTAR_WINDOW = "A2Prime_xStarLe2"

# s(M) within this band of zero is reported as critical; below it the
# extinction branch is taken.
SPECTRAL_ZERO_TOL = 1e-10

E_SQUARED = float(np.exp(2.0))


@dataclass(frozen=True)
class PerPatchVerdict:
    kind: str                       # AllPatchesPersistent | PersistentOnBlock | Extinct
    omega: Optional[tuple[int, ...]]  # persistent patch set for the block case

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "omega": None if self.omega is None else list(self.omega)}


@dataclass(frozen=True)
class ClassificationReport:
    spectral: SpectralResult
    irreducible: bool
    frobenius: FrobeniusForm
    spectral_critical: bool
    verdict_zero: str
    total_population: str
    per_patch: PerPatchVerdict
    gammas: tuple[Optional[float], ...]
    a1prime_c: Optional[np.ndarray]
    equilibrium: Optional[EquilibriumCertificate]
    delay_robust: Optional[DelayRobustnessVerdict]
    gas_certificate: Optional[str]
    gas_all: tuple[str, ...]
    bounds: AsymptoticBounds

    def to_dict(self) -> dict:
        return {
            "spectral": self.spectral.to_dict(),
            "irreducible": self.irreducible,
            "frobenius": {
                "permutation": list(self.frobenius.permutation),
                "block_sizes": list(self.frobenius.block_sizes),
                "block_patches": [list(b) for b in self.frobenius.block_patches],
            },
            "spectral_critical": self.spectral_critical,
            "verdict_zero": self.verdict_zero,
            "total_population": self.total_population,
            "per_patch": self.per_patch.to_dict(),
            "gammas": list(self.gammas),
            "a1prime_c": None if self.a1prime_c is None else self.a1prime_c.tolist(),
            "equilibrium": None if self.equilibrium is None else self.equilibrium.to_dict(),
            "delay_robust": None if self.delay_robust is None else self.delay_robust.to_dict(),
            "gas_certificate": self.gas_certificate,
            "gas_all": list(self.gas_all),
            "bounds": self.bounds.to_dict(),
        }


def a2_check(sys: PatchSystem) -> bool:
    """True iff every gamma_i is defined and lies in (1, e^2]."""
    gammas = gamma_coefficients(sys)
    return all(g is not None and 1.0 < g <= E_SQUARED for g in gammas)


def persistent_block(form: FrobeniusForm, spectral: SpectralResult) -> tuple[int, ...]:
    """Patch indices of the irreducible block achieving the positive spectral bound.

    Ties break toward the lowest block index in topological order; indices are
    reported in the original patch numbering.
    """
    if spectral.bound <= 0:
        raise ValueError("persistent_block requires a positive spectral bound")
    return tuple(sorted(form.block_patches[spectral.achieving_block]))


def classify_dynamics(sys: PatchSystem, *, cross_check_equilibrium: bool = True) -> ClassificationReport:
    """Run the full decision pipeline on a validated system."""
    report = validate_system(sys)
    if not report.ok:
        raise ValueError(f"classify_dynamics needs a valid system: {report.violations}")

    M = community_matrix(sys)
    form = strongly_connected_blocks(M)
    spectral = spectral_bound(M)
    irreducible = form.num_blocks == 1
    critical = abs(spectral.bound) <= SPECTRAL_ZERO_TOL
    extinct = spectral.bound < SPECTRAL_ZERO_TOL

    gammas = tuple(gamma_coefficients(sys))
    diss_upper = dissipativity_bound(sys)

    if extinct:
        verdict_zero = GLOBALLY_STABLE_ZERO
        total = NOT_PERSISTENT
        per_patch = PerPatchVerdict(kind=EXTINCT, omega=None)
        a1_c = None
        equilibrium = None
    else:
        verdict_zero = ZERO_UNSTABLE
        total = UNIFORMLY_PERSISTENT
        if irreducible:
            per_patch = PerPatchVerdict(kind=ALL_PATCHES_PERSISTENT,
                                        omega=tuple(range(sys.n)))
        else:
            per_patch = PerPatchVerdict(kind=PERSISTENT_ON_BLOCK,
                                        omega=persistent_block(form, spectral))
        a1_c = find_positive_c_auto(M.entries)
        equilibrium = None
        if a1_c is not None:
            equilibrium = solve_positive_equilibrium(sys, cross_check=cross_check_equilibrium)

    robust = None
    if equilibrium is not None:
        robust = delay_robustness(sys, equilibrium.x_star)

    gas: list[str] = []
    if a2_check(sys):
        gas.append(GAS_A2)
    if a1_c is not None and equilibrium is not None and equilibrium.a2_window:
        gas.append(GAS_XSTAR_WINDOW)

    window = gamma_exponent_range(sys)
    explicit = theorem24_bounds(*window) if window is not None else Theorem24Bounds(
        False, reason="gamma exponent window inapplicable")
    permanence = None
    if equilibrium is not None:
        # c = x* always satisfies the scaled persistence hypothesis
        # (every scaled gamma equals e^{x_i*} > 1); for very large equilibria
        # the mandated ceiling L makes the floor underflow, so the source is
        # dropped as inapplicable rather than reported as zero
        try:
            permanence = permanence_constants(sys, equilibrium.x_star)
        except ValueError:
            permanence = None
    bounds = AsymptoticBounds(
        dissipativity_upper=diss_upper,
        explicit_window=explicit,
        permanence=permanence,
    )

    return ClassificationReport(
        spectral=spectral,
        irreducible=irreducible,
        frobenius=form,
        spectral_critical=critical,
        verdict_zero=verdict_zero,
        total_population=total,
        per_patch=per_patch,
        gammas=gammas,
        a1prime_c=a1_c,
        equilibrium=equilibrium,
        delay_robust=robust,
        gas_certificate=gas[0] if gas else None,
        gas_all=tuple(gas),
        bounds=bounds,
    )
