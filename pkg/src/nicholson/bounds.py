"""Explicit asymptotic bounds: the dissipativity ceiling, the closed-form
log-window bounds, and the permanence floor built from the recursive
lower-bound sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrices import linear_solve
from .model import PatchSystem

__all__ = [
    "AsymptoticBounds",
    "PermanenceConstants",
    "Theorem24Bounds",
    "dissipativity_bound",
    "theorem24_bounds",
    "gamma_exponent_range",
    "permanence_constants",
    "lemma21_sequence",
]


def dissipativity_bound(sys: PatchSystem) -> np.ndarray:
    """Componentwise limsup ceiling (D - A)^{-1} (beta_1, ..., beta_n)^T / e."""
    dma = np.diag(sys.d) - sys.a
    return linear_solve(dma, sys.beta_totals) * math.exp(-1.0)


@dataclass(frozen=True)
class Theorem24Bounds:
    """Closed-form tail window when every gamma_i sits in [e^alpha, e^beta]."""

    applicable: bool
    lower: Optional[float] = None
    upper: Optional[float] = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {"applicable": self.applicable, "lower": self.lower, "upper": self.upper,
                "reason": self.reason}


def theorem24_bounds(alpha_lo: float, beta_hi: float) -> Theorem24Bounds:
    """lower = min{alpha, exp(alpha + beta - 1 - e^{beta-1})}, upper = e^{beta-1}.

    Requires 0 < alpha < beta and beta > 1; a violated hypothesis yields an
    inapplicable marker rather than an exception.
    """
    if not (0.0 < alpha_lo < beta_hi):
        return Theorem24Bounds(False, reason=f"needs 0 < alpha < beta, got ({alpha_lo}, {beta_hi})")
    if not beta_hi > 1.0:
        return Theorem24Bounds(False, reason=f"needs beta > 1, got {beta_hi}")
    upper = math.exp(beta_hi - 1.0)
    lower = min(alpha_lo, math.exp(alpha_lo + beta_hi - 1.0 - upper))
    return Theorem24Bounds(True, lower=lower, upper=upper)


def gamma_exponent_range(sys: PatchSystem) -> Optional[tuple[float, float]]:
    """(min_i ln gamma_i, max_i ln gamma_i) when the log-window hypothesis holds.

    None when any gamma_i is undefined or <= 1, or when the strictness
    constraints (alpha < beta, beta > 1) fail; equal gammas are reported
    inapplicable rather than silently perturbed.
    """
    from .model import gamma_coefficients

    gammas = gamma_coefficients(sys)
    if any(g is None or g <= 1.0 for g in gammas):
        return None
    logs = [math.log(g) for g in gammas]
    alpha_lo, beta_hi = min(logs), max(logs)
    if not (0.0 < alpha_lo < beta_hi and beta_hi > 1.0):
        return None
    return alpha_lo, beta_hi


@dataclass(frozen=True)
class PermanenceConstants:
    """Constants (c, m, L) realizing the permanence floor/ceiling c_i*m <= x_i <= c_i*L."""

    c: np.ndarray
    m_const: float
    L_const: float
    gammas_scaled: np.ndarray    # per-patch ratios of the c-rescaled system

    @property
    def lower(self) -> np.ndarray:
        return self.c * self.m_const

    @property
    def upper(self) -> np.ndarray:
        return self.c * self.L_const

    def to_dict(self) -> dict:
        return {
            "c": self.c.tolist(),
            "m": self.m_const,
            "L": self.L_const,
            "gammas_scaled": self.gammas_scaled.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }


def scaled_gammas(sys: PatchSystem, c: np.ndarray) -> np.ndarray:
    """gamma ratios of the system rescaled by x_i -> x_i / c_i.

    Entry i is beta_i c_i / (d_i c_i - sum_j a_ij c_j); positive denominators
    with every ratio > 1 is exactly the persistence hypothesis for this c.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    denom = sys.d * c - sys.a @ c
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom > 0, sys.beta_totals * c / denom, -np.inf)


def _h(x: float, c: float) -> float:
    return x * math.exp(-c * x)


def permanence_constants(sys: PatchSystem, c) -> PermanenceConstants:
    """Least conservative (m, L) pair satisfying the floor/ceiling inequalities.

    L is the smallest value with L > max_i(1/c_i) and L >= (max_i gamma_i)/e;
    m is the largest value with c_i m < 1, e^{c_i m} <= gamma_i and
    h_i(m) <= h_i(L) for all i (h_i(x) = x e^{-c_i x}), the last cap found by
    bisection since h_i is increasing below 1/c_i.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.shape != (sys.n,) or np.any(c <= 0):
        raise ValueError("c must be a positive vector of length n")
    gammas = scaled_gammas(sys, c)
    if np.any(gammas <= 1.0):
        raise ValueError(
            f"permanence constants need every scaled gamma > 1, got {gammas.tolist()}"
        )
    inv_c = 1.0 / c
    L = max(float(inv_c.max()) * (1.0 + 1e-9), float(gammas.max()) * math.exp(-1.0))

    caps = [float(inv_c.min()) * (1.0 - 1e-9)]
    caps.append(float((inv_c * np.log(gammas)).min()))
    for i in range(sys.n):
        ci = float(c[i])
        target = _h(L, ci)
        peak = 1.0 / ci
        if _h(peak, ci) <= target:
            continue  # h_i(m) <= h_i(L) holds for every m below the peak
        lo, hi = 0.0, peak
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _h(mid, ci) <= target:
                lo = mid
            else:
                hi = mid
        caps.append(lo)
    m = min(caps)
    if m <= 0:
        raise ValueError("no positive m satisfies the floor inequalities")
    return PermanenceConstants(c=c, m_const=m, L_const=L, gammas_scaled=gammas)


def lemma21_sequence(gammas, cs, m_const: float, s0: float, k_max: int) -> np.ndarray:
    """Iterate s_{k+1} = min{m, min_j gamma_j h_j(s_k)} from s_0.

    Non-decreasing whenever 0 < s_0 <= m and the constants satisfy
    c_j m < 1 and e^{c_j m} <= gamma_j; the limit is m.
    """
    g = np.asarray(gammas, dtype=float).reshape(-1)
    c = np.asarray(cs, dtype=float).reshape(-1)
    if g.shape != c.shape:
        raise ValueError("gammas and cs must have the same length")
    if not (0.0 < s0 <= m_const):
        raise ValueError(f"s0 must lie in (0, m], got s0={s0}, m={m_const}")
    if np.any(c * m_const >= 1.0):
        raise ValueError("constants must satisfy c_j * m < 1")
    if np.any(np.exp(c * m_const) > g * (1.0 + 1e-12)):
        raise ValueError("constants must satisfy e^{c_j m} <= gamma_j")
    out = np.empty(k_max + 1)
    out[0] = s0
    s = s0
    for k in range(1, k_max + 1):
        s = min(m_const, float((g * s * np.exp(-c * s)).min()))
        out[k] = s
    return out


@dataclass(frozen=True)
class AsymptoticBounds:
    """Per-patch tail bounds with the provenance of each source kept separate."""

    dissipativity_upper: np.ndarray
    explicit_window: Theorem24Bounds
    permanence: Optional[PermanenceConstants]

    @property
    def upper(self) -> np.ndarray:
        """Componentwise best available limsup ceiling."""
        ub = np.array(self.dissipativity_upper, dtype=float)
        if self.explicit_window.applicable:
            ub = np.minimum(ub, self.explicit_window.upper)
        if self.permanence is not None:
            ub = np.minimum(ub, self.permanence.upper)
        return ub

    @property
    def lower(self) -> np.ndarray:
        """Componentwise best available liminf floor (zero when nothing applies)."""
        lb = np.zeros_like(self.dissipativity_upper)
        if self.explicit_window.applicable:
            lb = np.maximum(lb, self.explicit_window.lower)
        if self.permanence is not None:
            lb = np.maximum(lb, self.permanence.lower)
        return lb

    def to_dict(self) -> dict:
        return {
            "upper": self.upper.tolist(),
            "lower": self.lower.tolist(),
            "dissipativity_upper": self.dissipativity_upper.tolist(),
            "explicit_window": self.explicit_window.to_dict(),
            "permanence": None if self.permanence is None else self.permanence.to_dict(),
        }
