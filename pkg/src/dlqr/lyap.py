"""Lyapunov solves, stability predicate, closed-loop Gramians, LQR cost.

Everything is dense and double precision; the Lyapunov equation is solved
through its Kronecker vectorization with partial-pivoting LU, which is
exact arithmetic-wise at these sizes and reports a condition estimate so
boundary-of-stability iterates can be flagged instead of silently
returning garbage.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import (
    LyapunovSingularError,
    NotStabilizingError,
    NumericFailureError,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "StabilityReport",
    "GramianPair",
    "closed_loop",
    "spectral_abscissa",
    "solve_lyapunov",
    "stability_report",
    "is_stabilizing",
    "closed_loop_gramians",
    "weighted_state_cost",
    "cost",
]


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds used by the stability and Lyapunov routines."""

    stability_margin: float = 1e-9
    lyap_cond_limit: float = 1e12


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class StabilityReport:
    is_stable: bool
    spectral_abscissa: float
    margin: float


@dataclass(frozen=True)
class GramianPair:
    """Closed-loop controllability (L) and observability (P) Gramians."""

    L: np.ndarray
    P: np.ndarray


def closed_loop(sys, K):
    """The closed-loop state matrix A - B K C."""
    return sys.A - sys.B @ np.asarray(K, dtype=np.float64) @ sys.C


def spectral_abscissa(M):
    """Max real part over eigenvalues of M.

    Raises on eigenvalue-iteration non-convergence (the backends signal
    it as NaN).
    """
    a = kernels.spectral_abscissa(np.ascontiguousarray(M, dtype=np.float64))
    if np.isnan(a):
        raise NumericFailureError("eigenvalue iteration did not converge")
    return a


def solve_lyapunov(M, Q, cond_limit=None):
    """Solve M^T X + X M = -Q for symmetric X.

    Raises LyapunovSingularError when the Kronecker system's condition
    estimate exceeds `cond_limit` (default 1e12), which happens exactly
    when M has an eigenvalue pair summing to ~0, e.g. at the stability
    boundary.
    """
    if cond_limit is None:
        cond_limit = DEFAULT_TOLERANCES.lyap_cond_limit
    M = np.ascontiguousarray(M, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    X, cond_est = kernels.lyap_solve(M, Q)
    if not np.isfinite(cond_est) or cond_est > cond_limit:
        raise LyapunovSingularError(cond_est)
    if not np.all(np.isfinite(X)):
        raise LyapunovSingularError(float("inf"), "Lyapunov solve produced non-finite values")
    return X


def stability_report(sys, K, margin=None):
    """Classify K by the spectral abscissa of A - B K C."""
    if margin is None:
        margin = DEFAULT_TOLERANCES.stability_margin
    a = spectral_abscissa(closed_loop(sys, K))
    return StabilityReport(is_stable=bool(a < -margin), spectral_abscissa=a, margin=margin)


def is_stabilizing(sys, K, margin=None):
    return stability_report(sys, K, margin=margin).is_stable


def weighted_state_cost(weights, C, K):
    """R_hat(K) = R1 - R12 K C - (R12 K C)^T + C^T K^T R2 K C.

    The effective state-cost weight once u = -K C x is substituted into
    the quadratic performance measure.
    """
    K = np.asarray(K, dtype=np.float64)
    KC = K @ C
    S = weights.R12 @ KC
    return weights.R1 - S - S.T + KC.T @ weights.R2 @ KC


def closed_loop_gramians(sys, weights, K, margin=None, cond_limit=None):
    """Gramians L, P of the closed loop under gain K.

    L solves A_cl L + L A_cl^T = -D0 and P solves
    A_cl^T P + P A_cl = -R_hat(K). Raises NotStabilizingError when K is
    not stabilizing.
    """
    rep = stability_report(sys, K, margin=margin)
    if not rep.is_stable:
        raise NotStabilizingError(rep.spectral_abscissa)
    Acl = closed_loop(sys, K)
    L = solve_lyapunov(Acl.T, sys.D0, cond_limit=cond_limit)
    P = solve_lyapunov(Acl, weighted_state_cost(weights, sys.C, K), cond_limit=cond_limit)
    return GramianPair(L=L, P=P)


def cost(sys, weights, K, gramians=None):
    """J(K) = trace(P(K) D0), finite for every stabilizing K."""
    if gramians is None:
        gramians = closed_loop_gramians(sys, weights, K)
    return float(np.trace(gramians.P @ sys.D0))
