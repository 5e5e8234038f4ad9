"""Local-search solvers for the structured LQR problem.

Two outer strategies share one Armijo backtracking line search:

* projection-based iteration, which keeps every iterate inside the
  structure subspace S and steps along structured descent directions
  (alternating/"Anderson-Moore" steps, Newton-CG steps, or plain
  projected gradient descent);
* an augmented Lagrangian loop, which iterates over unstructured gains
  and drives the off-structure entries to zero through multiplier and
  penalty updates.

Unstable trial points during backtracking are treated as objective
value +inf, never as errors: step acceptance requires the trial gain to
be stabilizing.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .derivatives import (
    AlmState,
    alm_hessian_action,
    gradient,
    hessian_action,
)
from .errors import (
    DegenerateStepError,
    InvalidParameterError,
    LineSearchError,
    LyapunovSingularError,
    NotStabilizingError,
    NumericFailureError,
)
from .lyap import (
    closed_loop,
    solve_lyapunov,
    stability_report,
    weighted_state_cost,
)
from .model import StructureMask

__all__ = [
    "ArmijoParams",
    "AlmParams",
    "Iterate",
    "RunRecord",
    "ArmijoResult",
    "armijo_search",
    "anderson_moore_direction",
    "alm_anderson_moore_direction",
    "newton_cg_direction",
    "solve_projection_method",
    "solve_alm",
    "is_descent_direction",
    "PROJECTION_METHODS",
]

PROJECTION_METHODS = ("am", "newton", "gd")

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"
STATUS_LINE_SEARCH_FAILED = "line-search-failed"
STATUS_NUMERIC_FAILURE = "numeric-failure"


@dataclass(frozen=True)
class ArmijoParams:
    """Backtracking parameters: trial steps are s_bar * beta^k."""

    s_bar: float = 1.0
    beta: float = 0.5
    alpha: float = 1e-2
    max_backtracks: int = 60

    def __post_init__(self):
        if not (self.s_bar > 0):
            raise InvalidParameterError(f"s_bar must be positive, got {self.s_bar}")
        if not (0 < self.beta < 1):
            raise InvalidParameterError(f"beta must be in (0,1), got {self.beta}")
        if not (0 < self.alpha < 1):
            raise InvalidParameterError(f"alpha must be in (0,1), got {self.alpha}")
        if self.max_backtracks < 1:
            raise InvalidParameterError("max_backtracks must be >= 1")


@dataclass(frozen=True)
class AlmParams:
    """Augmented Lagrangian schedule.

    V0 = None means a zero initial multiplier. The penalty grows by gamma
    after every multiplier update, capped at tau. The outer loop stops
    when the off-structure residual norm drops below eps_feas; inner
    minimizations stop at gradient norm inner_tol or max_inner steps.
    """

    V0: Optional[np.ndarray] = None
    c0: float = 10.0
    gamma: float = 3.0
    tau: float = 1e5
    eps_feas: float = 1e-4
    inner_tol: float = 1e-2
    max_inner: int = 500

    def __post_init__(self):
        if not (self.c0 > 0):
            raise InvalidParameterError(f"c0 must be positive, got {self.c0}")
        if not (self.gamma > 1):
            raise InvalidParameterError(f"gamma must exceed 1, got {self.gamma}")
        if not (self.tau >= self.c0):
            raise InvalidParameterError("tau must be >= c0")
        if not (self.eps_feas > 0):
            raise InvalidParameterError("eps_feas must be positive")
        if not (self.inner_tol > 0):
            raise InvalidParameterError("inner_tol must be positive")
        if self.max_inner < 1:
            raise InvalidParameterError("max_inner must be >= 1")


@dataclass(frozen=True)
class Iterate:
    """One accepted iterate: the gain, its cost, how it was reached."""

    K: np.ndarray
    cost: float
    step: Optional[float]  # None for the initial point
    grad_norm: float
    line_search_trials: tuple = ()  # (step, objective value) pairs, accepted last


@dataclass
class RunRecord:
    """Full trajectory of one solver run."""

    method: str
    iterates: list
    final_K: np.ndarray
    final_cost: float
    status: str
    component_labels: Optional[list] = None
    final_K_preprojection: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def n_iters(self):
        return len(self.iterates) - 1

    def costs(self):
        return np.array([it.cost for it in self.iterates])

    def gains(self):
        return np.array([it.K for it in self.iterates])

    def to_json_dict(self):
        doc = {
            "method": self.method,
            "status": self.status,
            "n_iters": self.n_iters,
            "final_cost": self.final_cost,
            "final_K": np.asarray(self.final_K).tolist(),
            "meta": dict(self.meta),
            "iterates": [
                {
                    "iter": i,
                    "K": np.asarray(it.K).tolist(),
                    "cost": it.cost,
                    "step": it.step,
                    "grad_norm": it.grad_norm,
                    "component": None
                    if self.component_labels is None
                    else int(self.component_labels[i]),
                }
                for i, it in enumerate(self.iterates)
            ],
        }
        if self.final_K_preprojection is not None:
            doc["final_K_preprojection"] = np.asarray(self.final_K_preprojection).tolist()
        return doc

    def csv_header(self):
        m, p = np.asarray(self.final_K).shape
        cols = ["iter"]
        cols += [f"k_{r}_{c}" for r in range(m) for c in range(p)]
        cols += ["cost", "step", "grad_norm", "component_label"]
        return cols

    def to_csv_rows(self):
        rows = []
        for i, it in enumerate(self.iterates):
            label = "" if self.component_labels is None else str(int(self.component_labels[i]))
            row = [str(i)]
            row += [repr(float(v)) for v in np.asarray(it.K).ravel()]
            row += [
                repr(float(it.cost)),
                "" if it.step is None else repr(float(it.step)),
                repr(float(it.grad_norm)),
                label,
            ]
            rows.append(row)
        return rows


class ArmijoResult(NamedTuple):
    step: float
    K_next: np.ndarray
    value: float
    trials: tuple  # (step, objective value) pairs in trial order


def _fro(X, Y):
    return float(np.sum(X * Y))


def armijo_search(objective, K, direction, grad_at_K, params):
    """Largest step s in {s_bar, s_bar*beta, ...} passing the Armijo test.

    Acceptance requires objective(K + s*direction) finite (unstable trial
    points must be reported as +inf by the objective) and below
    objective(K) + alpha*s*<grad, direction>. Raises LineSearchError,
    carrying the trial log, when no trial passes or the direction is not
    a descent direction.
    """
    slope = _fro(grad_at_K, direction)
    if not (slope < 0):
        raise LineSearchError([], f"not a descent direction (slope {slope:.3g})")
    f0 = objective(K)
    if not np.isfinite(f0):
        raise LineSearchError([], "objective not finite at the base point")
    trials = []
    s = params.s_bar
    for _ in range(params.max_backtracks):
        K_trial = K + s * direction
        val = objective(K_trial)
        trials.append((s, val))
        if np.isfinite(val) and val < f0 + params.alpha * s * slope:
            return ArmijoResult(step=s, K_next=K_trial, value=val, trials=tuple(trials))
        s *= params.beta
    raise LineSearchError(trials)


def _vec(M):
    return np.asarray(M).reshape(-1, order="F")


def _unvec(v, shape):
    return np.asarray(v).reshape(shape, order="F")


def anderson_moore_direction(sys, weights, mask, K, gramians):
    """Alternating step: stationarity in K with the Gramians frozen.

    Solves ((R2 K' C - R12^T - B^T P) L C^T) o I_S = 0 over the free
    entries of K', keeping the constrained entries at K's values, and
    returns K' - K. Uses vec(R2 K' G) = (G^T kron R2) vec(K') with
    G = C L C^T to assemble the restricted linear system.
    """
    K = np.asarray(K, dtype=np.float64)
    m, p = K.shape
    L, P = gramians.L, gramians.P
    G = sys.C @ L @ sys.C.T
    M_full = np.kron(G.T, weights.R2)
    rhs_mat = (weights.R12.T + sys.B.T @ P) @ L @ sys.C.T
    pattern_vec = _vec(mask.pattern)
    free = np.flatnonzero(pattern_vec > 0)
    fixed = np.flatnonzero(pattern_vec == 0)
    rhs = _vec(rhs_mat)[free]
    if fixed.size:
        rhs = rhs - M_full[np.ix_(free, fixed)] @ _vec(K)[fixed]
    try:
        sol = np.linalg.solve(M_full[np.ix_(free, free)], rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateStepError(f"restricted alternating system is singular: {exc}") from None
    if not np.all(np.isfinite(sol)):
        raise DegenerateStepError("restricted alternating system produced non-finite values")
    K_new_vec = _vec(K).copy()
    K_new_vec[free] = sol
    return _unvec(K_new_vec, (m, p)) - K


def alm_anderson_moore_direction(sys, weights, mask, K, gramians, state):
    """Alternating step for the augmented Lagrangian inner problem.

    With the Gramians frozen, the stationarity condition of L_c over all
    m*p entries is linear in K':

        2 R2 K' (C L C^T) + c (K' o I_S^c) = 2 (R12^T + B^T P) L C^T - V.
    """
    K = np.asarray(K, dtype=np.float64)
    m, p = K.shape
    L, P = gramians.L, gramians.P
    G = sys.C @ L @ sys.C.T
    M_full = 2.0 * np.kron(G.T, weights.R2) + state.c * np.diag(_vec(mask.complement))
    rhs = _vec(2.0 * (weights.R12.T + sys.B.T @ P) @ L @ sys.C.T - state.V)
    try:
        sol = np.linalg.solve(M_full, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateStepError(f"alternating ALM system is singular: {exc}") from None
    if not np.all(np.isfinite(sol)):
        raise DegenerateStepError("alternating ALM system produced non-finite values")
    return _unvec(sol, (m, p)) - K


def newton_cg_direction(hessian_action_closure, projected_grad, mask,
                        cg_tol=1e-8, cg_max_iters=None):
    """Approximate Newton direction on the structure subspace by CG.

    Runs conjugate gradient on X -> hessian_action(X o I_S) o I_S with
    right-hand side -projected_grad, stopping on relative residual
    cg_tol, the iteration cap, or non-positive curvature
    (<p, Hp> <= 1e-12 ||p||^2), returning the last iterate in that case
    (or steepest descent when the very first direction is bad). The
    result always satisfies <projected_grad, direction> < 0.
    """
    pg = np.asarray(projected_grad, dtype=np.float64)
    if cg_max_iters is None:
        cg_max_iters = 2 * max(1, mask.n_free) + 10

    def op(X):
        return hessian_action_closure(mask.project(X)) * mask.pattern

    x = np.zeros_like(pg)
    r = -pg
    p = r.copy()
    rs = _fro(r, r)
    rhs_norm = math.sqrt(rs)
    if rhs_norm == 0.0:
        return x
    for it in range(cg_max_iters):
        Hp = op(p)
        pHp = _fro(p, Hp)
        if pHp <= 1e-12 * _fro(p, p):
            if it == 0:
                return -pg
            break
        a = rs / pHp
        x = x + a * p
        r = r - a * Hp
        rs_new = _fro(r, r)
        if math.sqrt(rs_new) <= cg_tol * rhs_norm:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    if not np.all(np.isfinite(x)) or _fro(pg, x) >= 0:
        return -pg
    return x


def _cost_or_inf(sys, weights, K):
    """J(K), or +inf when K is not stabilizing or the solve degenerates."""
    try:
        rep = stability_report(sys, K)
        if not rep.is_stable:
            return math.inf
        Acl = closed_loop(sys, K)
        P = solve_lyapunov(Acl, weighted_state_cost(weights, sys.C, K))
        return float(np.trace(P @ sys.D0))
    except (LyapunovSingularError, NumericFailureError):
        return math.inf


def is_descent_direction(sys, weights, K, target):
    """Whether target - K is a descent direction of J at K."""
    K = np.asarray(K, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    ev = gradient(sys, weights, K)
    return _fro(ev.grad, target - K) < 0


def solve_projection_method(sys, weights, mask, K0, method="am",
                            armijo=None, stop_tol=1e-3, max_iters=500):
    """Structured local search: K stays in S, every step is a descent step.

    method is one of "am" (alternating), "newton" (CG Newton), "gd"
    (projected gradient). Stops when the projected gradient norm drops
    below stop_tol. The record carries every accepted iterate including
    the initial point.
    """
    if method not in PROJECTION_METHODS:
        raise InvalidParameterError(f"unknown method {method!r}; expected one of {PROJECTION_METHODS}")
    if armijo is None:
        armijo = ArmijoParams()
    K = mask.project(np.asarray(K0, dtype=np.float64))
    if not mask.is_structured(np.asarray(K0, dtype=np.float64)):
        raise InvalidParameterError("K0 must be structured (K0 o I_S = K0)")
    rep = stability_report(sys, K)
    if not rep.is_stable:
        raise NotStabilizingError(rep.spectral_abscissa, "K0 must be stabilizing")

    objective = lambda Kt: _cost_or_inf(sys, weights, Kt)
    iterates = []
    status = STATUS_MAX_ITERS
    step_taken = None
    trials_taken = ()
    failed_trials = None
    for _ in range(max_iters + 1):
        try:
            ev = gradient(sys, weights, K, mask=mask)
        except (NotStabilizingError, LyapunovSingularError, NumericFailureError):
            status = STATUS_NUMERIC_FAILURE
            break
        pg = ev.projected_grad
        pg_norm = float(np.linalg.norm(pg))
        iterates.append(Iterate(K=K.copy(), cost=ev.cost, step=step_taken,
                                grad_norm=pg_norm, line_search_trials=trials_taken))
        if pg_norm < stop_tol:
            status = STATUS_CONVERGED
            break
        if len(iterates) > max_iters:
            status = STATUS_MAX_ITERS
            break
        if method == "am":
            try:
                d = anderson_moore_direction(sys, weights, mask, K, ev.gramians)
            except DegenerateStepError:
                d = -pg
        elif method == "newton":
            closure = lambda X: hessian_action(sys, weights, K, X, gramians=ev.gramians)
            d = newton_cg_direction(closure, pg, mask)
        else:
            d = -pg
        if _fro(pg, d) >= 0:
            d = -pg
        try:
            res = armijo_search(objective, K, d, pg, armijo)
        except LineSearchError as exc:
            status = STATUS_LINE_SEARCH_FAILED
            failed_trials = tuple(exc.trials)
            break
        K = mask.project(res.K_next)
        step_taken = res.step
        trials_taken = res.trials
    final = iterates[-1] if iterates else Iterate(K=K.copy(), cost=math.inf, step=None,
                                                  grad_norm=math.nan)
    if not iterates:
        iterates = [final]
    meta = {"stop_tol": stop_tol, "max_iters": max_iters,
            "armijo": {"s_bar": armijo.s_bar, "beta": armijo.beta,
                       "alpha": armijo.alpha, "max_backtracks": armijo.max_backtracks}}
    if failed_trials is not None:
        meta["failed_line_search_trials"] = [list(t) for t in failed_trials]
    return RunRecord(
        method=method,
        iterates=iterates,
        final_K=final.K,
        final_cost=final.cost,
        status=status,
        meta=meta,
    )


def solve_alm(sys, weights, mask, K0, inner_method="am", armijo=None,
              alm=None, max_outer=50):
    """Augmented Lagrangian outer loop with alternating or Newton inner steps.

    K0 must be stabilizing but need not be structured. Terminates once
    the off-structure residual satisfies ||K o I_S^c|| < eps_feas; the
    final gain is then projected onto S (the unprojected gain is kept in
    final_K_preprojection). Iterates record J(K), not L_c, in the cost
    column; grad_norm is the augmented Lagrangian gradient norm.
    """
    if inner_method not in ("am", "newton"):
        raise InvalidParameterError(
            f"unknown inner method {inner_method!r}; expected 'am' or 'newton'")
    if armijo is None:
        armijo = ArmijoParams()
    if alm is None:
        alm = AlmParams()
    max_outer_cfg = int(max_outer)
    K = np.asarray(K0, dtype=np.float64).copy()
    rep = stability_report(sys, K)
    if not rep.is_stable:
        raise NotStabilizingError(rep.spectral_abscissa, "K0 must be stabilizing")
    V = np.zeros_like(K) if alm.V0 is None else mask.project_complement(np.asarray(alm.V0, dtype=np.float64))
    c = float(alm.c0)
    full_mask = StructureMask.full(*K.shape)

    iterates = []
    outer_log = []
    status = STATUS_MAX_ITERS
    step_taken = None
    trials_taken = ()
    feas = float(np.linalg.norm(mask.project_complement(K)))
    final_pre = None

    def alm_objective(state):
        def f(Kt):
            base = _cost_or_inf(sys, weights, Kt)
            if not np.isfinite(base):
                return math.inf
            Koff = mask.project_complement(Kt)
            return base + _fro(state.V, Koff) + 0.5 * state.c * _fro(Koff, Koff)
        return f

    # the stopping rule fires as soon as the off-structure residual is
    # small, including at entry: an already-feasible K0 is returned as-is
    if feas < alm.eps_feas:
        status = STATUS_CONVERGED
        final_pre = K.copy()
        K_proj = mask.project(K)
        if _cost_or_inf(sys, weights, K_proj) < math.inf:
            K = K_proj
        outer_log.append({"outer": 0, "c": c, "feasibility": feas})
        max_outer = 0

    for outer in range(max_outer):
        state = AlmState(V=V, c=c)
        objective = alm_objective(state)
        inner_failed = False
        for _ in range(alm.max_inner):
            try:
                ev = gradient(sys, weights, K, mask=mask)
                g = ev.grad + state.V + state.c * mask.project_complement(K)
            except (NotStabilizingError, LyapunovSingularError, NumericFailureError):
                status = STATUS_NUMERIC_FAILURE
                inner_failed = True
                break
            g_norm = float(np.linalg.norm(g))
            iterates.append(Iterate(K=K.copy(), cost=ev.cost, step=step_taken,
                                    grad_norm=g_norm, line_search_trials=trials_taken))
            if g_norm < alm.inner_tol:
                break
            if inner_method == "am":
                try:
                    d = alm_anderson_moore_direction(sys, weights, mask, K, ev.gramians, state)
                except DegenerateStepError:
                    d = -g
            else:
                closure = lambda X: alm_hessian_action(sys, weights, mask, K, state, X,
                                                       gramians=ev.gramians)
                d = newton_cg_direction(closure, g, full_mask)
            if _fro(g, d) >= 0:
                d = -g
            try:
                res = armijo_search(objective, K, d, g, armijo)
            except LineSearchError as exc:
                trials_taken = tuple(exc.trials)
                inner_failed = True
                break
            K = res.K_next
            step_taken = res.step
            trials_taken = res.trials
        if status == STATUS_NUMERIC_FAILURE:
            break
        feas = float(np.linalg.norm(mask.project_complement(K)))
        outer_log.append({"outer": outer, "c": c, "feasibility": feas})
        if feas < alm.eps_feas:
            status = STATUS_CONVERGED
            final_pre = K.copy()
            K_proj = mask.project(K)
            if _cost_or_inf(sys, weights, K_proj) < math.inf:
                K = K_proj
            break
        if inner_failed and status != STATUS_NUMERIC_FAILURE:
            status = STATUS_LINE_SEARCH_FAILED
            break
        V = V + c * mask.project_complement(K)
        c = min(alm.gamma * c, alm.tau)

    final_cost = _cost_or_inf(sys, weights, K)
    if not iterates or not np.array_equal(iterates[-1].K, K):
        iterates.append(Iterate(K=K.copy(), cost=final_cost, step=step_taken,
                                grad_norm=iterates[-1].grad_norm if iterates else math.nan,
                                line_search_trials=trials_taken))
    return RunRecord(
        method=f"alm-{inner_method}",
        iterates=iterates,
        final_K=K.copy(),
        final_cost=final_cost,
        status=status,
        final_K_preprojection=final_pre,
        meta={"outer_log": outer_log, "feasibility": feas,
              "alm": {"c0": alm.c0, "gamma": alm.gamma, "tau": alm.tau,
                      "eps_feas": alm.eps_feas, "inner_tol": alm.inner_tol,
                      "max_inner": alm.max_inner, "max_outer": max_outer_cfg},
              "armijo": {"s_bar": armijo.s_bar, "beta": armijo.beta,
                         "alpha": armijo.alpha, "max_backtracks": armijo.max_backtracks}},
    )
