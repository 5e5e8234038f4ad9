"""First- and second-order information of the LQR cost and its augmented
Lagrangian.

The gradient is closed-form once the two Gramians are known; each
Hessian-vector action costs two additional Lyapunov solves driven by the
direction. Both are exact (no differencing); the finite-difference
versions used to cross-check them live in the test suite only.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .lyap import (
    GramianPair,
    closed_loop,
    closed_loop_gramians,
    cost,
    solve_lyapunov,
)

__all__ = [
    "GradientEval",
    "AlmState",
    "gain_residual",
    "gradient",
    "hessian_action",
    "alm_value",
    "alm_gradient",
    "alm_hessian_action",
]


@dataclass(frozen=True)
class GradientEval:
    """Gradient of J at K, with the projected gradient and point data."""

    grad: np.ndarray
    projected_grad: np.ndarray
    cost: float
    gramians: GramianPair


@dataclass(frozen=True)
class AlmState:
    """Multiplier V (supported on the constrained entries) and penalty c."""

    V: np.ndarray
    c: float

    def __post_init__(self):
        V = np.asarray(self.V, dtype=np.float64)
        if not np.all(np.isfinite(V)):
            raise InvalidParameterError("multiplier V must be finite")
        if not (np.isfinite(self.c) and self.c > 0):
            raise InvalidParameterError(f"penalty weight must be positive, got {self.c}")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "c", float(self.c))

    def check_support(self, mask):
        if np.abs(self.V * mask.pattern).max(initial=0.0) != 0.0:
            raise InvalidParameterError("multiplier V must vanish on the free entries")


def gain_residual(sys, weights, K, P):
    """R2 K C - R12^T - B^T P, the m x n stationarity residual factor.

    The gradient is 2 * gain_residual @ L @ C^T; the residual vanishing on
    the structure is the first-order optimality condition.
    """
    return weights.R2 @ np.asarray(K, dtype=np.float64) @ sys.C - weights.R12.T - sys.B.T @ P


def gradient(sys, weights, K, mask=None, gramians=None):
    """Evaluate J, its gradient, and the structure-projected gradient at K.

    With no mask the projected gradient equals the gradient. Gramians may
    be passed in when already computed at this K.
    """
    K = np.asarray(K, dtype=np.float64)
    if gramians is None:
        gramians = closed_loop_gramians(sys, weights, K)
    g = 2.0 * gain_residual(sys, weights, K, gramians.P) @ gramians.L @ sys.C.T
    pg = g if mask is None else g * mask.pattern
    return GradientEval(
        grad=g,
        projected_grad=pg,
        cost=cost(sys, weights, K, gramians=gramians),
        gramians=gramians,
    )


def hessian_action(sys, weights, K, Ktilde, gramians=None):
    """Hessian-vector action H_J(K, Ktilde) of the cost at K.

    Solves the two direction-driven Lyapunov equations

        A_cl Lt + Lt A_cl^T = B Kt C L + (B Kt C L)^T
        A_cl^T Pt + Pt A_cl = W + W^T,  W = (R12^T + B^T P - R2 K C)^T Kt C

    and returns 2((R2 Kt C - B^T Pt) L C^T + (R2 K C - R12^T - B^T P) Lt C^T).
    The direction weight on Kt C is R2, matching the input-cost position.
    """
    K = np.asarray(K, dtype=np.float64)
    Ktilde = np.asarray(Ktilde, dtype=np.float64)
    if gramians is None:
        gramians = closed_loop_gramians(sys, weights, K)
    L, P = gramians.L, gramians.P
    Acl = closed_loop(sys, K)
    BKtCL = sys.B @ Ktilde @ sys.C @ L
    Lt = solve_lyapunov(Acl.T, -(BKtCL + BKtCL.T))
    W = -gain_residual(sys, weights, K, P).T @ Ktilde @ sys.C
    Pt = solve_lyapunov(Acl, -(W + W.T))
    R2KtC = weights.R2 @ Ktilde @ sys.C
    return 2.0 * (
        (R2KtC - sys.B.T @ Pt) @ L @ sys.C.T
        + gain_residual(sys, weights, K, P) @ Lt @ sys.C.T
    )


def alm_value(sys, weights, mask, K, state, gramians=None):
    """L_c(K, V) = J(K) + <V, K o I_S^c> + (c/2) ||K o I_S^c||_F^2."""
    state.check_support(mask)
    K = np.asarray(K, dtype=np.float64)
    Koff = mask.project_complement(K)
    return (
        cost(sys, weights, K, gramians=gramians)
        + float(np.sum(state.V * Koff))
        + 0.5 * state.c * float(np.sum(Koff * Koff))
    )


def alm_gradient(sys, weights, mask, K, state, gramians=None):
    """Gradient of the augmented Lagrangian: grad J + V + c (K o I_S^c)."""
    state.check_support(mask)
    K = np.asarray(K, dtype=np.float64)
    ev = gradient(sys, weights, K, mask=mask, gramians=gramians)
    return ev.grad + state.V + state.c * mask.project_complement(K)


def alm_hessian_action(sys, weights, mask, K, state, Ktilde, gramians=None,
                       penalize_all_entries=False):
    """Hessian-vector action of the augmented Lagrangian.

    The penalty term contributes c (Ktilde o I_S^c): differentiating the
    quadratic penalty twice only touches the constrained entries. Setting
    `penalize_all_entries` switches to the blanket c * Ktilde
    regularization for fidelity comparisons; the two forms agree on
    directions supported off the structure and differ by c (Ktilde o I_S)
    otherwise.
    """
    state.check_support(mask)
    H = hessian_action(sys, weights, K, Ktilde, gramians=gramians)
    Ktilde = np.asarray(Ktilde, dtype=np.float64)
    if penalize_all_entries:
        return H + state.c * Ktilde
    return H + state.c * mask.project_complement(Ktilde)
