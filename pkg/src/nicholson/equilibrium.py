"""Positive-equilibrium search and certification.

The vector field f(x) = -Dx + Ax + (beta_i x_i e^{-x_i})_i is cooperative on
the positive cone; when Mc > 0 is feasible the unique positive root is found
by damped Newton and cross-checked by squeezing it between a rising
sub-equilibrium flow and a falling super-equilibrium flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import dissipativity_bound
from .matrices import (
    SingularMatrixError,
    community_matrix,
    determinant,
    find_positive_c_auto,
    is_nonsingular_m_matrix,
    linear_solve,
    spectral_bound,
)
from .model import PatchSystem, rhs_ode, ricker_derivative

__all__ = [
    "EquilibriumCertificate",
    "DelayRobustnessVerdict",
    "MonotoneBrackets",
    "NewtonError",
    "jacobian",
    "solve_positive_equilibrium",
    "monotone_bracket_flow",
    "certify_saturated",
    "delay_robustness",
]

NEWTON_MAX_ITER = 200
NEWTON_MAX_HALVINGS = 60
FLOW_SAMPLE_TOL = 1e-10
FLOW_HORIZON_CAP = 20000.0

ROBUSTLY_STABLE = "RobustlyStable"
POTENTIALLY_DELAY_UNSTABLE = "PotentiallyDelayUnstable"


class NewtonError(RuntimeError):
    """Damped Newton failed from every start."""


def jacobian(sys: PatchSystem, x) -> np.ndarray:
    """Df(x) = A - D + diag(beta_i h'(x_i))."""
    xv = np.asarray(x, dtype=float).reshape(-1)
    if xv.shape != (sys.n,):
        raise ValueError(f"x must have shape ({sys.n},), got {xv.shape}")
    return sys.a - np.diag(sys.d) + np.diag(sys.beta_totals * ricker_derivative(xv))


@dataclass(frozen=True)
class EquilibriumCertificate:
    x_star: np.ndarray
    residual: float
    jacobian_spectral_bound: float
    neg_jacobian_is_nsM: bool
    index: Optional[int]              # +1 / -1, None when det(-Df) ~ 0
    max_component: float
    a2_window: bool                   # all components <= 2
    newton_iterations: int = 0
    flow_agreement: Optional[float] = None   # max |newton - flow| when cross-checked
    flow_converged: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "x_star": self.x_star.tolist(),
            "residual": self.residual,
            "jacobian_spectral_bound": self.jacobian_spectral_bound,
            "neg_jacobian_is_nsM": self.neg_jacobian_is_nsM,
            "index": self.index,
            "max_component": self.max_component,
            "a2_window": self.a2_window,
            "newton_iterations": self.newton_iterations,
            "flow_agreement": self.flow_agreement,
            "flow_converged": self.flow_converged,
        }


@dataclass(frozen=True)
class DelayRobustnessVerdict:
    n_hat: np.ndarray
    diagonal_lambdas: np.ndarray      # lambda_i = d_i - beta_i |h'(x_i*)|
    verdict: str

    def to_dict(self) -> dict:
        return {
            "n_hat": self.n_hat.tolist(),
            "diagonal_lambdas": self.diagonal_lambdas.tolist(),
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class MonotoneBrackets:
    lower: np.ndarray
    upper: np.ndarray
    converged: bool
    horizon_used: float


def _sub_equilibrium_start(sys: PatchSystem, c: np.ndarray) -> np.ndarray:
    """Largest eps in {0.5, 0.1, 0.01, ...} with f(eps*c) > 0 componentwise."""
    for eps in (0.5, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        candidate = eps * c
        if np.all(rhs_ode(sys, candidate) > 0):
            return candidate
    raise NewtonError("no sub-equilibrium point found along c; is Mc > 0 really satisfied?")


def _damped_newton(sys: PatchSystem, x0: np.ndarray) -> Optional[tuple[np.ndarray, int]]:
    """Newton with positivity-preserving step halving; None when it fails.

    The birth response is non-monotone past x = 1, so a full step can
    overshoot into negative territory; halve until the iterate stays strictly
    positive and the residual norm decreases.
    """
    x = np.array(x0, dtype=float)
    if np.any(x <= 0):
        return None
    fx = rhs_ode(sys, x)
    for it in range(1, NEWTON_MAX_ITER + 1):
        norm = float(np.abs(fx).max())
        if norm <= 1e-13 * (1.0 + float(np.abs(x).max())):
            return x, it
        try:
            step = linear_solve(jacobian(sys, x), -fx)
        except SingularMatrixError:
            return None
        scale = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = x + scale * step
            if np.all(trial > 0):
                f_trial = rhs_ode(sys, trial)
                if float(np.abs(f_trial).max()) < norm:
                    x, fx = trial, f_trial
                    break
            scale *= 0.5
        else:
            return None
    return None


def monotone_bracket_flow(sys: PatchSystem, c) -> MonotoneBrackets:
    """Squeeze the equilibrium between two monotone zero-delay flows.

    Integrates from eps*c (componentwise rising) and from twice the
    dissipativity ceiling (componentwise falling) until successive samples
    move less than 1e-10; both limits are the unique positive equilibrium.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    M = community_matrix(sys).entries
    if c.shape != (sys.n,) or np.any(c <= 0) or np.any(M @ c <= 0):
        raise ValueError("monotone_bracket_flow needs c > 0 with Mc > 0")
    low0 = _sub_equilibrium_start(sys, c)
    high0 = 2.0 * dissipativity_bound(sys)

    from .simulate import integrate_ode  # local import to avoid a cycle

    def settle(x0: np.ndarray) -> tuple[np.ndarray, bool, float]:
        x = np.array(x0, dtype=float)
        chunk = 5.0
        t_used = 0.0
        while t_used < FLOW_HORIZON_CAP:
            traj = integrate_ode(sys, x, t_end=chunk, dt=0.02)
            nxt = traj.states[-1]
            t_used += chunk
            if float(np.abs(nxt - x).max()) < FLOW_SAMPLE_TOL:
                return nxt, True, t_used
            x = nxt
        return x, False, t_used

    lower, ok_lo, t_lo = settle(low0)
    upper, ok_hi, t_hi = settle(high0)
    return MonotoneBrackets(
        lower=lower,
        upper=upper,
        converged=ok_lo and ok_hi,
        horizon_used=max(t_lo, t_hi),
    )


def certify_saturated(sys: PatchSystem, x_star) -> EquilibriumCertificate:
    """Certificate for a claimed positive equilibrium.

    Checks -Df(x*) x* > 0 componentwise, runs the non-singular M-matrix test
    on -Df(x*), and records the spectral bound, the index sign and whether
    every component sits in the delay-robust window (0, 2].
    """
    xs = np.asarray(x_star, dtype=float).reshape(-1)
    if xs.shape != (sys.n,):
        raise ValueError(f"x_star must have shape ({sys.n},), got {xs.shape}")
    if np.any(xs <= 0):
        raise ValueError("x_star must be strictly positive")
    residual = float(np.abs(rhs_ode(sys, xs)).max())
    if residual > 1e-10 * (1.0 + float(np.abs(xs).max())):
        raise ValueError(f"residual {residual:.3e} too large for an equilibrium certificate")
    jac = jacobian(sys, xs)
    neg = -jac
    if not np.all(neg @ xs > 0):
        # cannot happen for a true positive root: -Df(x*)x* = (beta_i e^{-x_i*} x_i*^2)_i
        raise ValueError("-Df(x*) x* is not componentwise positive")
    ns_m = is_nonsingular_m_matrix(neg)
    s_jac = spectral_bound(jac).bound
    det_neg = determinant(neg)
    if abs(det_neg) <= 1e-12:
        index = None
    else:
        index = 1 if det_neg > 0 else -1
    return EquilibriumCertificate(
        x_star=xs,
        residual=residual,
        jacobian_spectral_bound=s_jac,
        neg_jacobian_is_nsM=ns_m,
        index=index,
        max_component=float(xs.max()),
        a2_window=bool(xs.max() <= 2.0),
    )


def solve_positive_equilibrium(
    sys: PatchSystem,
    *,
    cross_check: bool = True,
) -> Optional[EquilibriumCertificate]:
    """Find and certify the positive equilibrium, or None when none is expected.

    Existence is gated on finding c > 0 with Mc > 0 rather than on s(M) > 0:
    in the reducible case a positive spectral bound does not imply a positive
    equilibrium. Newton runs from a sub-equilibrium point along c and from
    the dissipativity ceiling; on failure the monotone flow limit is used.
    """
    M = community_matrix(sys)
    c = find_positive_c_auto(M.entries)
    if c is None:
        return None

    # 0 is always a root of f, so a Newton run can slide into it; certification
    # rejects such collapses and the next start (or the flow limit) takes over.
    starts = [dissipativity_bound(sys)]
    try:
        starts.append(_sub_equilibrium_start(sys, c))
    except NewtonError:
        pass

    root = None
    cert = None
    iterations = 0
    for x0 in starts:
        got = _damped_newton(sys, x0)
        if got is None:
            continue
        try:
            cert = certify_saturated(sys, got[0])
        except ValueError:
            continue
        root, iterations = got
        break

    flow_gap: Optional[float] = None
    flow_ok: Optional[bool] = None
    if root is None or cross_check:
        brackets = monotone_bracket_flow(sys, c)
        flow_ok = brackets.converged
        if root is None:
            if not brackets.converged:
                raise NewtonError("Newton failed from every start and the flow hit its horizon")
            # polish the flow limit so the certificate residual holds
            got = _damped_newton(sys, brackets.upper)
            if got is None:
                raise NewtonError("Newton could not polish the monotone-flow limit")
            root, iterations = got
            cert = certify_saturated(sys, root)
        flow_gap = float(
            max(np.abs(root - brackets.lower).max(), np.abs(root - brackets.upper).max())
        )
    return EquilibriumCertificate(
        x_star=cert.x_star,
        residual=cert.residual,
        jacobian_spectral_bound=cert.jacobian_spectral_bound,
        neg_jacobian_is_nsM=cert.neg_jacobian_is_nsM,
        index=cert.index,
        max_component=cert.max_component,
        a2_window=cert.a2_window,
        newton_iterations=iterations,
        flow_agreement=flow_gap,
        flow_converged=flow_ok,
    )


def delay_robustness(sys: PatchSystem, x_star) -> DelayRobustnessVerdict:
    """Delay-independent stability indicator for a certified equilibrium.

    Builds N with N_ii = d_i - beta_i |h'(x_i*)| and N_ij = -a_ij; when N is
    a non-singular M-matrix the equilibrium is stable for every choice of the
    delays, otherwise large delays may destabilize it. Every off-diagonal
    coupling is included with its full operator norm a_ij.
    """
    xs = np.asarray(x_star, dtype=float).reshape(-1)
    if xs.shape != (sys.n,) or np.any(xs <= 0):
        raise ValueError("delay_robustness needs a positive equilibrium vector")
    lambdas = sys.d - sys.beta_totals * np.abs(ricker_derivative(xs))
    n_hat = np.diag(lambdas) - sys.a
    verdict = ROBUSTLY_STABLE if is_nonsingular_m_matrix(n_hat) else POTENTIALLY_DELAY_UNSTABLE
    return DelayRobustnessVerdict(n_hat=n_hat, diagonal_lambdas=lambdas, verdict=verdict)
