"""Gradient and Hessian actions cross-checked against finite differences."""

import numpy as np
import pytest

import dlqr
from dlqr.derivatives import AlmState, gain_residual
from dlqr.errors import InvalidParameterError

from conftest import K2_STAR, K_C, sample_gains


def fd_gradient(f, K, h):
    """Central-difference gradient of a scalar map on matrices."""
    G = np.zeros_like(K)
    for idx in np.ndindex(*K.shape):
        E = np.zeros_like(K)
        E[idx] = h
        G[idx] = (f(K + E) - f(K - E)) / (2.0 * h)
    return G


def fd_hessian_action(grad_f, K, Kt, h):
    return (grad_f(K + h * Kt) - grad_f(K - h * Kt)) / (2.0 * h)


def rel_err(a, b):
    return np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b)))


class TestGradient:
    def test_closed_form_identity_plant(self):
        # A = -I, B = C = D0 = I, R1 = R2 = I, R12 = 0, K = 0:
        # L = P = I/2 and grad = 2(0 - 0 - P/2) ... = -B^T P L C^T * 2 = -I/2
        sys = dlqr.LtiSystem(-np.eye(3), np.eye(3), np.eye(3), np.eye(3))
        w = dlqr.PerformanceWeights(np.eye(3), np.zeros((3, 3)), np.eye(3))
        ev = dlqr.gradient(sys, w, np.zeros((3, 3)))
        assert np.allclose(ev.grad, -0.5 * np.eye(3), atol=1e-12)
        assert ev.cost == pytest.approx(1.5)

    def test_matches_finite_differences(self, n3a):
        sys, weights, _ = n3a
        mask = dlqr.StructureMask(np.ones((3, 3)))
        f = lambda K: dlqr.cost(sys, weights, K)
        for K in sample_gains(sys, mask, 10, seed=21):
            h = 1e-5 * (1.0 + np.linalg.norm(K))
            ev = dlqr.gradient(sys, weights, K)
            assert rel_err(ev.grad, fd_gradient(f, K, h)) <= 1e-5

    def test_vanishes_at_global_minimum(self, n3a):
        sys, weights, _ = n3a
        ev = dlqr.gradient(sys, weights, K_C)
        assert np.max(np.abs(ev.grad)) <= 1e-8 * (1.0 + np.linalg.norm(K_C))

    def test_projection_consistency(self, n3a):
        sys, weights, mask = n3a
        K = np.diag([8.0, 4.0, 2.0])
        ev = dlqr.gradient(sys, weights, K, mask=mask)
        assert np.array_equal(ev.projected_grad, ev.grad * mask.pattern)

    def test_gain_residual_is_gradient_factor(self, n3a):
        sys, weights, _ = n3a
        K = np.diag([8.0, 4.0, 2.0])
        g = dlqr.closed_loop_gramians(sys, weights, K)
        ev = dlqr.gradient(sys, weights, K, gramians=g)
        expected = 2.0 * gain_residual(sys, weights, K, g.P) @ g.L @ sys.C.T
        assert np.array_equal(ev.grad, expected)


class TestHessianAction:
    def test_matches_finite_differences(self, n3a):
        sys, weights, _ = n3a
        mask = dlqr.StructureMask(np.ones((3, 3)))
        grad_f = lambda K: dlqr.gradient(sys, weights, K).grad
        rng = np.random.default_rng(77)
        for K in sample_gains(sys, mask, 10, seed=42):
            Kt = rng.normal(size=(3, 3))
            Kt /= np.linalg.norm(Kt)
            h = 1e-5 * (1.0 + np.linalg.norm(K))
            H = dlqr.hessian_action(sys, weights, K, Kt)
            assert rel_err(H, fd_hessian_action(grad_f, K, Kt, h)) <= 1e-4

    def test_bilinear_symmetry(self, n3a):
        """<H(K, X), Y> == <H(K, Y), X> since it is a second derivative."""
        sys, weights, _ = n3a
        mask = dlqr.StructureMask(np.ones((3, 3)))
        rng = np.random.default_rng(3)
        for K in sample_gains(sys, mask, 10, seed=8):
            X = rng.normal(size=(3, 3))
            Y = rng.normal(size=(3, 3))
            lhs = np.sum(dlqr.hessian_action(sys, weights, K, X) * Y)
            rhs = np.sum(dlqr.hessian_action(sys, weights, K, Y) * X)
            scale = 1.0 + abs(lhs) + abs(rhs)
            assert abs(lhs - rhs) <= 1e-8 * scale

    def test_linear_in_direction(self, n3a):
        sys, weights, _ = n3a
        K = np.diag([8.0, 4.0, 2.0])
        g = dlqr.closed_loop_gramians(sys, weights, K)
        rng = np.random.default_rng(14)
        X = rng.normal(size=(3, 3))
        Y = rng.normal(size=(3, 3))
        H = lambda D: dlqr.hessian_action(sys, weights, K, D, gramians=g)
        combo = H(2.0 * X - 3.0 * Y)
        assert np.allclose(combo, 2.0 * H(X) - 3.0 * H(Y), atol=1e-9)
        assert np.allclose(H(np.zeros((3, 3))), 0.0)

    def test_positive_definite_near_strict_minimum(self, n3a):
        sys, weights, _ = n3a
        rng = np.random.default_rng(4)
        for _ in range(10):
            Kt = np.diag(rng.normal(size=3))
            Kt /= np.linalg.norm(Kt)
            curv = np.sum(dlqr.hessian_action(sys, weights, K2_STAR, Kt) * Kt)
            assert curv > 0


class TestAlmState:
    def test_rejects_nonpositive_penalty(self):
        with pytest.raises(InvalidParameterError):
            AlmState(np.zeros((3, 3)), 0.0)
        with pytest.raises(InvalidParameterError):
            AlmState(np.zeros((3, 3)), -1.0)

    def test_rejects_nonfinite_multiplier(self):
        V = np.zeros((3, 3))
        V[0, 1] = np.inf
        with pytest.raises(InvalidParameterError):
            AlmState(V, 1.0)

    def test_support_check(self, n3a):
        _, _, mask = n3a
        V = np.zeros((3, 3))
        V[0, 0] = 1.0  # diagonal is free on this mask
        with pytest.raises(InvalidParameterError):
            AlmState(V, 1.0).check_support(mask)


class TestAlmDerivatives:
    def test_value_reduces_to_cost_on_structure(self, n3a):
        sys, weights, mask = n3a
        K = np.diag([8.0, 4.0, 2.0])
        st = AlmState(np.zeros((3, 3)), 2.0)
        val = dlqr.alm_value(sys, weights, mask, K, st)
        assert val == pytest.approx(dlqr.cost(sys, weights, K))

    def test_value_single_off_entry(self, n3a):
        sys, weights, mask = n3a
        K = np.diag([8.0, 4.0, 2.0])
        kappa = 0.7
        K_off = K.copy()
        K_off[0, 1] = kappa
        st = AlmState(np.zeros((3, 3)), 2.0)
        val = dlqr.alm_value(sys, weights, mask, K_off, st)
        # with c = 2 and V = 0 the penalty adds exactly kappa^2
        assert val == pytest.approx(dlqr.cost(sys, weights, K_off) + kappa ** 2)

    def test_multiplier_term(self, n3a):
        sys, weights, mask = n3a
        K = np.diag([8.0, 4.0, 2.0])
        K[1, 0] = 0.3
        V = np.zeros((3, 3))
        V[1, 0] = 4.0
        st = AlmState(V, 1.0)
        base = AlmState(np.zeros((3, 3)), 1.0)
        delta = dlqr.alm_value(sys, weights, mask, K, st) - dlqr.alm_value(
            sys, weights, mask, K, base)
        assert delta == pytest.approx(4.0 * 0.3)

    def test_gradient_matches_finite_differences(self, n3a):
        sys, weights, mask = n3a
        rng = np.random.default_rng(31)
        V = mask.project_complement(rng.normal(size=(3, 3)))
        st = AlmState(V, 7.0)
        f = lambda K: dlqr.alm_value(sys, weights, mask, K, st)
        full = dlqr.StructureMask(np.ones((3, 3)))
        for K in sample_gains(sys, full, 5, seed=61):
            h = 1e-5 * (1.0 + np.linalg.norm(K))
            G = dlqr.alm_gradient(sys, weights, mask, K, st)
            assert rel_err(G, fd_gradient(f, K, h)) <= 1e-5

    def test_hessian_action_matches_finite_differences(self, n3a):
        sys, weights, mask = n3a
        st = AlmState(np.zeros((3, 3)), 5.0)
        grad_f = lambda K: dlqr.alm_gradient(sys, weights, mask, K, st)
        full = dlqr.StructureMask(np.ones((3, 3)))
        rng = np.random.default_rng(9)
        for K in sample_gains(sys, full, 5, seed=91):
            Kt = rng.normal(size=(3, 3))
            Kt /= np.linalg.norm(Kt)
            h = 1e-5 * (1.0 + np.linalg.norm(K))
            H = dlqr.alm_hessian_action(sys, weights, mask, K, st, Kt)
            assert rel_err(H, fd_hessian_action(grad_f, K, Kt, h)) <= 1e-4

    def test_structured_direction_reduces_to_plain_hessian(self, n3a):
        sys, weights, mask = n3a
        st = AlmState(np.zeros((3, 3)), 5.0)
        K = np.diag([8.0, 4.0, 2.0])
        Kt = np.diag([1.0, -1.0, 2.0])  # structured direction
        a = dlqr.alm_hessian_action(sys, weights, mask, K, st, Kt)
        assert np.allclose(a, dlqr.hessian_action(sys, weights, K, Kt))

    def test_vanishing_penalty_limit(self, n3a):
        sys, weights, mask = n3a
        K = np.diag([8.0, 4.0, 2.0])
        rng = np.random.default_rng(6)
        Kt = rng.normal(size=(3, 3))
        st = AlmState(np.zeros((3, 3)), 1e-12)
        a = dlqr.alm_hessian_action(sys, weights, mask, K, st, Kt)
        assert np.allclose(a, dlqr.hessian_action(sys, weights, K, Kt),
                           atol=1e-10)

    def test_blanket_form_agrees_off_structure(self, n3a):
        sys, weights, mask = n3a
        st = AlmState(np.zeros((3, 3)), 5.0)
        K = np.diag([8.0, 4.0, 2.0])
        rng = np.random.default_rng(16)
        Kt = mask.project_complement(rng.normal(size=(3, 3)))
        a = dlqr.alm_hessian_action(sys, weights, mask, K, st, Kt)
        b = dlqr.alm_hessian_action(sys, weights, mask, K, st, Kt,
                                    penalize_all_entries=True)
        assert np.allclose(a, b)
