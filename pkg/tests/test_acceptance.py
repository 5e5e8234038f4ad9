"""Acceptance suite: one test per headline claim, tolerances pinned.

Each test is self-contained and deterministic: sampling protocols (seeds,
boxes, stream keys) are frozen so reruns give identical statistics. Jump
counts depend on the sampler box and seed, so only the claimed orderings
are asserted, never raw counts. The batch statistics test dominates the
runtime (several minutes with 8 worker threads); everything else finishes
in seconds.
"""

import math
import time

import numpy as np
import pytest

import dlqr
from dlqr.search import is_descent_direction

from conftest import K_C, chain_n3a
from test_derivatives import fd_gradient, fd_hessian_action, rel_err
from test_search import ALM_K0, check_armijo_maximality

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")

D1 = np.diag([40.0, 40.0, 40.0])
D2 = np.zeros((3, 3))
D3 = np.diag([-10.0, 5.0, 10.0])
K2_DIAG = np.array([6.06, -3.16, -0.63])
K3_DIAG = np.array([6.48, 6.46, 3.02])
K01 = np.array([[172.0, -260.0, 42.0], [130.0, 184.0, -130.0], [352.0, 0.0, -140.0]])


def alm_problem(eps=0.0):
    sys = dlqr.build_chain_system(dlqr.ChainFamilyParams(3, (-1.0, 2.0, 1.0), (2.0, 1.0), eps))
    Kc = np.array([[6.0, -10.0, 0.0], [0.0, 2.0, -10.0], [4.0, 0.0, 0.0]])
    weights = dlqr.inverse_optimal_weights(sys, Kc, np.eye(3))
    return sys, weights, dlqr.StructureMask.identity(3)


def diag_gain(v):
    return np.diag(np.asarray(v, dtype=np.float64))


def first_exit(sys, anchor, d, t0, cap):
    """Ray parameter of the first stable-to-unstable crossing, or None."""
    def stable(t):
        return dlqr.stability_report(sys, diag_gain(anchor + t * d)).is_stable
    t = t0
    while stable(t):
        t *= 2.0
        if t > cap:
            return None
    lo, hi = (t / 2.0 if t > t0 else 0.0), t
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo


def test_criterion_1_global_optimum_certification():
    t0 = time.time()
    for eps in (0.0, 0.05, 0.1):
        sys, weights, mask = chain_n3a(eps)
        assert abs(dlqr.cost(sys, weights, K_C)) <= 1e-6
        ev = dlqr.gradient(sys, weights, K_C, mask=mask)
        assert np.linalg.norm(ev.projected_grad) <= 1e-6
    assert time.time() - t0 < 1.0


def test_criterion_2_benchmark_table_spot_reproduction():
    t0 = time.time()
    sys, weights, mask = chain_n3a(0.0)
    for method in ("am", "newton"):
        rec = dlqr.solve_projection_method(sys, weights, mask, D1, method=method)
        assert rec.status == "converged"
        assert rec.final_cost <= 1e-3

        rec = dlqr.solve_projection_method(sys, weights, mask, D2, method=method)
        assert rec.status == "converged"
        assert rec.final_cost == pytest.approx(16237.0, rel=0.01)
        assert np.allclose(np.diag(rec.final_K), K2_DIAG, atol=1e-2)

        rec = dlqr.solve_projection_method(sys, weights, mask, D3, method=method)
        assert rec.status == "converged"
        assert rec.final_cost == pytest.approx(7357.5, rel=0.01)
        assert np.allclose(np.diag(rec.final_K), K3_DIAG, atol=1e-2)
    assert time.time() - t0 < 10.0


def test_criterion_3_alm_from_structured_start():
    sys, weights, mask = alm_problem()
    rec = dlqr.solve_alm(sys, weights, mask, ALM_K0, inner_method="am",
                         alm=dlqr.AlmParams(c0=10.0, gamma=3.0, tau=1e5, eps_feas=1e-4))
    assert rec.final_cost == pytest.approx(332.5, rel=0.01)
    assert np.linalg.norm(rec.final_K * (1.0 - mask.pattern)) < 1e-4


@pytest.mark.xfail(strict=True, reason=(
    "from the dense start K01 the method settles at J near 331.4 inside the "
    "lowest basin; the advertised level 454.3 is not attained from any tested "
    "configuration of this solver"))
def test_criterion_3_alm_from_dense_start():
    sys, weights, mask = alm_problem()
    rec = dlqr.solve_alm(sys, weights, mask, K01, inner_method="am",
                         alm=dlqr.AlmParams(c0=10.0, gamma=3.0, tau=1e5, eps_feas=1e-4))
    assert np.linalg.norm(rec.final_K * (1.0 - mask.pattern)) < 1e-4
    assert rec.final_cost == pytest.approx(454.3, rel=0.01)


def test_criterion_4_jump_statistics_orderings():
    t0 = time.time()

    def factory(e):
        return dlqr.build_chain_system(
            dlqr.ChainFamilyParams(3, (-1.0, 10.0, 1.0), (10.0, 1.0), e))

    def wfactory(e):
        R2 = np.array([[20.0, 1.0, -1.0], [1.0, 5.0, 2.0], [-1.0, 2.0, 2.0]])
        return dlqr.inverse_optimal_weights(factory(e), 20.0 * np.eye(3), R2)

    mask = dlqr.StructureMask.identity(3)
    anchors = {"D1": diag_gain([20.0, 20.0, 20.0]),
               "D2": diag_gain(K2_DIAG), "D3": diag_gain(K3_DIAG)}
    common = dict(trials=2000, box=(-40.0, 40.0), seed=0,
                  anchors=anchors, global_anchor="D1")

    # aggressive vs conservative backtracking, second-order direction
    cfg = dlqr.JumpExperimentConfig(
        grid=((5.0, 0.9), (1.0, 0.5)), methods=("newton",), eps_values=(0.05,),
        **common)
    rep = dlqr.run_jump_experiment(factory, wfactory, mask, cfg, threads=8)
    aggressive = next(c for c in rep.cells if c["s_bar"] == 5.0)
    conservative = next(c for c in rep.cells if c["s_bar"] == 1.0)
    n_agg = aggressive["to_global"]["D2"]
    n_con = conservative["to_global"]["D2"]
    assert n_con > 0
    assert n_agg >= 3 * n_con

    # escape frequency falls as the separation margin grows
    cfg = dlqr.JumpExperimentConfig(
        grid=((1.0, 0.5),), methods=("am",), eps_values=(0.0, 0.05, 0.1),
        **common)
    rep = dlqr.run_jump_experiment(factory, wfactory, mask, cfg, threads=8)
    counts = [c["to_global"]["D2"] for c in rep.cells]
    assert counts[0] >= counts[1] >= counts[2]
    assert time.time() - t0 < 20 * 60


def test_criterion_5_component_counts():
    sys, _, mask = chain_n3a(0.05)
    atlas = dlqr.build_atlas(sys, mask, (-60.0, 60.0), 120)
    assert atlas.component_count == 3

    sys4 = dlqr.build_chain_system(dlqr.default_chain_params(4, eps=0.1))
    atlas4 = dlqr.build_atlas(sys4, dlqr.StructureMask.identity(4), (-60.0, 60.0), 32)
    assert atlas4.component_count >= dlqr.fibonacci(4) == 5


def test_criterion_6_derivative_oracles():
    t0 = time.time()

    def margin_samples(sys, count, seed, box, margin=-0.05):
        full = dlqr.StructureMask(np.ones((3, 3)))
        rng = dlqr.philox_rng(seed)
        out = []
        while len(out) < count:
            K = dlqr.sample_stabilizing(sys, full, box, rng)
            if dlqr.stability_report(sys, K).spectral_abscissa <= margin:
                out.append(K)
        return out

    for (sys, weights, _), box in ((chain_n3a(0.05), (-60.0, 60.0)),
                                   (alm_problem(), (-20.0, 20.0))):
        f = lambda K: dlqr.cost(sys, weights, K)
        grad_f = lambda K: dlqr.gradient(sys, weights, K).grad
        dir_rng = dlqr.philox_rng(17, (1,))
        for K in margin_samples(sys, 20, 11, box):
            h = 1e-5 * (1.0 + np.linalg.norm(K))
            ev = dlqr.gradient(sys, weights, K)
            assert rel_err(ev.grad, fd_gradient(f, K, h)) <= 1e-5

            Kt = dir_rng.standard_normal((3, 3))
            Kt /= np.linalg.norm(Kt)
            H1 = dlqr.hessian_action(sys, weights, K, Kt)
            assert rel_err(H1, fd_hessian_action(grad_f, K, Kt, h)) <= 1e-4

            Vt = dir_rng.standard_normal((3, 3))
            Vt /= np.linalg.norm(Vt)
            H2 = dlqr.hessian_action(sys, weights, K, Vt)
            b1 = float(np.sum(H1 * Vt))
            b2 = float(np.sum(H2 * Kt))
            assert abs(b1 - b2) <= 1e-8 * (1.0 + abs(b2))
    assert time.time() - t0 < 30.0


def test_criterion_7_solver_contracts():
    t0 = time.time()
    runs = 0
    armijo = dlqr.ArmijoParams()
    for eps in (0.0, 0.05):
        sys, weights, mask = chain_n3a(eps)
        rng = dlqr.philox_rng(23, (int(eps * 100),))
        starts = [dlqr.sample_stabilizing(sys, mask, (-60.0, 60.0), rng)
                  for _ in range(12)]
        for K0 in starts:
            for method in ("am", "newton", "gd"):
                rec = dlqr.solve_projection_method(
                    sys, weights, mask, K0, method=method, armijo=armijo)
                costs = [it.cost for it in rec.iterates]
                assert all(b < a for a, b in zip(costs, costs[1:]))
                for it in rec.iterates:
                    assert mask.is_structured(it.K)
                    assert dlqr.stability_report(sys, it.K).is_stable
                check_armijo_maximality(sys, weights, mask, rec, armijo)
                runs += 1

    sys, weights, mask = alm_problem()
    dense = dlqr.StructureMask(np.ones((3, 3)))
    rng = dlqr.philox_rng(29, (4,))
    while runs < 100:
        K0 = dlqr.sample_stabilizing(sys, dense, (-15.0, 15.0), rng)
        rec = dlqr.solve_alm(sys, weights, mask, K0, inner_method="am")
        assert np.linalg.norm(rec.final_K * (1.0 - mask.pattern)) < 1e-4
        runs += 1
    assert runs == 100
    assert time.time() - t0 < 120.0


def test_criterion_8_coercivity():
    t0 = time.time()

    # cost blows up along rays approaching the stability boundary
    sys, weights, _ = chain_n3a(0.05)
    anchor = np.full(3, 20.0)
    rng = dlqr.philox_rng(2)
    checked = 0
    while checked < 20:
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        tb = first_exit(sys, anchor, d, t0=0.125, cap=2.0**40)
        if tb is None:
            continue  # the ray never leaves the stabilizing set
        j_mid = dlqr.cost(sys, weights, diag_gain(anchor + 0.5 * tb * d))
        j_near = dlqr.cost(sys, weights, diag_gain(anchor + 0.99 * tb * d))
        assert j_near >= 10.0 * j_mid
        checked += 1

    # every descent run stays bounded
    worst = 0.0
    for eps in (0.0, 0.05):
        sys, weights, mask = chain_n3a(eps)
        starts = [D1.copy(), D3.copy()]
        if eps == 0.0:
            starts.append(D2.copy())
        srng = dlqr.philox_rng(8, (3,))
        starts += [dlqr.sample_stabilizing(sys, mask, (-60.0, 60.0), srng)
                   for _ in range(7)]
        for K0 in starts:
            for method in ("am", "newton"):
                for s_bar, beta in ((1.0, 0.5), (5.0, 0.9)):
                    rec = dlqr.solve_projection_method(
                        sys, weights, mask, K0, method=method,
                        armijo=dlqr.ArmijoParams(s_bar=s_bar, beta=beta))
                    worst = max(worst, max(np.linalg.norm(it.K)
                                           for it in rec.iterates))
    assert worst < 1e3
    assert time.time() - t0 < 60.0


def test_criterion_9_descent_paths():
    t0 = time.time()
    sys, weights, mask = chain_n3a(0.0)
    rec = dlqr.solve_projection_method(sys, weights, mask, D2, method="am")
    K2 = rec.final_K
    k2 = np.diag(K2)

    # every point of a small ball around the minimum sees it downhill
    ball_rng = dlqr.philox_rng(0, (9,))
    for _ in range(100):
        u = ball_rng.standard_normal(3)
        u *= (1e-2 * ball_rng.random() ** (1.0 / 3.0)) / np.linalg.norm(u)
        K = K2 + diag_gain(u)
        assert dlqr.stability_report(sys, K).is_stable
        assert is_descent_direction(sys, weights, K, K2)

    # some point near the component's boundary sees a neighborhood of the
    # global optimum downhill, across the infeasible gap
    target_rng = dlqr.philox_rng(5, (77,))
    targets = [diag_gain(np.full(3, 20.0))]
    for _ in range(8):
        delta = target_rng.standard_normal(3)
        delta *= (1e-1 * target_rng.random()) / np.linalg.norm(delta)
        targets.append(diag_gain(20.0 + delta))
    assert all(dlqr.stability_report(sys, T).is_stable for T in targets)
    assert all(np.linalg.norm(T - 20.0 * np.eye(3)) <= 1e-1 + 1e-12
               for T in targets[1:])

    ray_rng = dlqr.philox_rng(0, (99,))
    hits = 0
    for _ in range(300):
        d = ray_rng.standard_normal(3)
        d /= np.linalg.norm(d)
        tb = first_exit(sys, k2, d, t0=0.03125, cap=2.0**20)
        if tb is None:
            continue
        Kn = diag_gain(k2 + 0.9 * tb * d)
        # the stabilizing set along a ray need not be an interval
        if not dlqr.stability_report(sys, Kn).is_stable:
            continue
        if any(is_descent_direction(sys, weights, Kn, T) for T in targets):
            hits += 1
    assert hits >= 1
    assert time.time() - t0 < 60.0
