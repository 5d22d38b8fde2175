"""Parameters and right-hand sides of the n-patch Nicholson blowflies system.

The model on patch i is

    x_i'(t) = -d_i x_i(t) + sum_j a_ij x_j(t)
              + sum_k beta_ik x_i(t - tau_ik) exp(-x_i(t - tau_ik))

with decay rates d_i > 0, migration rates a_ij >= 0 (zero diagonal), birth
coefficients beta_ik >= 0 with row sums beta_i > 0, and delays tau_ik > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "PatchSystem",
    "ValidationReport",
    "validate_system",
    "ricker",
    "ricker_derivative",
    "gamma_coefficients",
    "rhs_dde",
    "rhs_ode",
]


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PatchSystem:
    """Full parameter set of the patch model.

    Construction is permissive (shapes are coerced, values are not judged);
    use :func:`validate_system` to check the structural rules.
    """

    n: int
    m: int
    d: np.ndarray          # (n,) decay rates
    a: np.ndarray          # (n, n) migration rates, zero diagonal
    beta: np.ndarray       # (n, m) birth coefficients
    tau: np.ndarray        # (n, m) delays
    enforce_mortality_form: bool = True

    def __post_init__(self):
        object.__setattr__(self, "d", _readonly(np.asarray(self.d, dtype=float).reshape(-1)))
        object.__setattr__(self, "a", _readonly(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "beta", _readonly(np.atleast_2d(np.asarray(self.beta, dtype=float))))
        object.__setattr__(self, "tau", _readonly(np.atleast_2d(np.asarray(self.tau, dtype=float))))

    @property
    def beta_totals(self) -> np.ndarray:
        """Per-patch total birth coefficient beta_i = sum_k beta_ik."""
        return self.beta.sum(axis=1)

    @property
    def tau_max(self) -> float:
        return float(self.tau.max())

    @property
    def tau_min(self) -> float:
        return float(self.tau.min())

    @property
    def mortalities(self) -> np.ndarray:
        """m_i = d_i - sum_j a_ji (decay minus total emigration into elsewhere)."""
        return self.d - self.a.sum(axis=0)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "d": self.d.tolist(),
            "a": self.a.tolist(),
            "beta": self.beta.tolist(),
            "tau": self.tau.tolist(),
            "enforce_mortality_form": self.enforce_mortality_form,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PatchSystem":
        return cls(
            n=int(data["n"]),
            m=int(data["m"]),
            d=data["d"],
            a=data["a"],
            beta=data["beta"],
            tau=data["tau"],
            enforce_mortality_form=bool(data.get("enforce_mortality_form", True)),
        )


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[tuple[str, str], ...]
    derived_mortalities: Optional[np.ndarray] = None
    tau_max: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [{"rule": r, "message": m} for r, m in self.violations],
            "derived_mortalities": None if self.derived_mortalities is None else self.derived_mortalities.tolist(),
            "tau_max": self.tau_max,
        }


def validate_system(sys: PatchSystem) -> ValidationReport:
    """Check every structural rule; violations are data, not exceptions."""
    bad: list[tuple[str, str]] = []

    if sys.n < 1:
        bad.append(("n-positive", f"n must be a positive integer, got {sys.n}"))
    if sys.m < 1:
        bad.append(("m-positive", f"m must be a positive integer, got {sys.m}"))
    shape_ok = (
        sys.d.shape == (sys.n,)
        and sys.a.shape == (sys.n, sys.n)
        and sys.beta.shape == (sys.n, sys.m)
        and sys.tau.shape == (sys.n, sys.m)
    )
    if not shape_ok:
        bad.append((
            "shapes",
            f"expected d:({sys.n},) a:({sys.n},{sys.n}) beta/tau:({sys.n},{sys.m}), "
            f"got d:{sys.d.shape} a:{sys.a.shape} beta:{sys.beta.shape} tau:{sys.tau.shape}",
        ))
        return ValidationReport(False, tuple(bad))

    if np.any(sys.d <= 0):
        bad.append(("positive-decay", f"decay rates must be positive, d={sys.d.tolist()}"))
    if np.any(sys.a < 0):
        bad.append(("nonnegative-migration", "migration rates a_ij must be non-negative"))
    diag = np.diag(sys.a)
    if np.any(diag != 0):
        bad.append(("zero-diagonal", f"a_ii must be zero, got diagonal {diag.tolist()}"))
    if np.any(sys.beta < 0):
        bad.append(("nonnegative-birth", "birth coefficients beta_ik must be non-negative"))
    totals = sys.beta_totals
    if np.any(totals <= 0):
        idx = [i for i in range(sys.n) if totals[i] <= 0]
        bad.append(("birth-on-every-patch", f"beta_i must be positive on every patch, zero on patches {idx}"))
    if np.any(sys.tau <= 0):
        bad.append(("positive-delays", "delays tau_ik must be positive"))

    mort = sys.mortalities
    if sys.enforce_mortality_form:
        if np.any(mort <= 0):
            idx = [i for i in range(sys.n) if mort[i] <= 0]
            bad.append((
                "positive-mortality",
                f"d_i - sum_j a_ji must be positive on every patch, fails on {idx} (m={mort.tolist()})",
            ))
    else:
        from .matrices import is_nonsingular_m_matrix

        dma = np.diag(sys.d) - sys.a
        if not is_nonsingular_m_matrix(dma):
            bad.append((
                "decay-migration-m-matrix",
                "with enforce_mortality_form=False, D - A must be a non-singular M-matrix",
            ))

    tau_max = float(sys.tau.max()) if np.all(sys.tau > 0) else None
    return ValidationReport(
        ok=not bad,
        violations=tuple(bad),
        derived_mortalities=mort,
        tau_max=tau_max,
    )


def ricker(x):
    """Birth response h(x) = x e^{-x}; defined for x >= 0, maximum 1/e at x = 1."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("ricker is defined for non-negative arguments only")
    out = arr * np.exp(-arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def ricker_derivative(x):
    """h'(x) = (1 - x) e^{-x}."""
    arr = np.asarray(x, dtype=float)
    out = (1.0 - arr) * np.exp(-arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def gamma_coefficients(sys: PatchSystem) -> list[Optional[float]]:
    """gamma_i = beta_i / (d_i - sum_j a_ij); None where the denominator is <= 0.

    Downstream threshold checks must report "inapplicable" rather than "false"
    on degenerate patches, hence None instead of inf/nan.
    """
    totals = sys.beta_totals
    denom = sys.d - sys.a.sum(axis=1)
    out: list[Optional[float]] = []
    for i in range(sys.n):
        out.append(float(totals[i] / denom[i]) if denom[i] > 0 else None)
    return out


def _check_vector(x, n: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    return arr


def rhs_dde(sys: PatchSystem, x_now, x_delayed) -> np.ndarray:
    """Right-hand side with explicit delayed states x_delayed[i][k] = x_i(t - tau_ik)."""
    x = _check_vector(x_now, sys.n, "x_now")
    xd = np.asarray(x_delayed, dtype=float)
    if xd.shape != (sys.n, sys.m):
        raise ValueError(f"x_delayed must have shape ({sys.n},{sys.m}), got {xd.shape}")
    birth = (sys.beta * xd * np.exp(-xd)).sum(axis=1)
    return -sys.d * x + sys.a @ x + birth


def rhs_ode(sys: PatchSystem, x) -> np.ndarray:
    """Zero-delay vector field f(x): every delayed state collapsed to x(t)."""
    xv = _check_vector(x, sys.n, "x")
    return rhs_dde(sys, xv, np.repeat(xv[:, None], sys.m, axis=1))
