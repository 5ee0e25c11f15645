# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from lieswarm._se2 import *

angles = st.floats(min_value=-math.pi, max_value=math.pi, allow_nan=False)
coords = st.floats(min_value=-10, max_value=10, allow_nan=False)
small = st.floats(min_value=-3, max_value=3, allow_nan=False)


def _rng_poses(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.column_stack([rng.uniform(-np.pi, np.pi, n), rng.uniform(-5, 5, n), rng.uniform(-5, 5, n)])


def _series_exp(m: np.ndarray, terms: int = 40) -> np.ndarray:
    out = np.eye(3)
    term = np.eye(3)
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


class TestPose2:
    def test_wrap(self):
        assert Pose2(math.pi, 0, 0).theta == pytest.approx(math.pi)
        assert Pose2(-math.pi, 0, 0).theta == pytest.approx(math.pi)
        assert Pose2(3 * math.pi, 0, 0).theta == pytest.approx(math.pi)
        assert Pose2(2 * math.pi + 0.5, 0, 0).theta == pytest.approx(0.5)

    def test_compose(self):
        assert_allclose(compose(Pose2(0, 1, 2), Pose2(0, 3, 4)).array, [0, 4, 6])
        g = Pose2(0.7, -1, 5)
        assert_allclose(compose(Pose2.identity(), g).array, g.array)
        assert_allclose((Pose2(math.pi / 2, 0, 0) @ Pose2(0, 1, 0)).array, [math.pi / 2, 0, 1], atol=1e-15)

    def test_compose_matches_matrices(self):
        rng = np.random.default_rng(1)
        for a, b in zip(_rng_poses(rng, 50), _rng_poses(rng, 50), strict=True):
            g, h = Pose2.from_array(a), Pose2.from_array(b)
            expected = Pose2.from_matrix(g.to_matrix() @ h.to_matrix())
            assert_allclose((g @ h).array, expected.array, atol=1e-12)

    def test_inverse(self):
        assert_allclose(inverse(Pose2(0.4, 0, 0)).array, [-0.4, 0, 0])
        assert_allclose(inverse(Pose2(0, 2, -3)).array, [0, -2, 3])
        g = Pose2(math.pi / 3, 2, -1)
        assert_allclose((g @ g.inverse()).array, [0, 0, 0], atol=1e-12)

    @given(angles, coords, coords)
    @settings(max_examples=200)
    def test_matrix_round_trip(self, theta, x, y):
        g = Pose2(theta, x, y)
        m = g.to_matrix()
        r = m[:2, :2]
        assert_allclose(r.T @ r, np.eye(2), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)
        back = Pose2.from_matrix(m)
        assert back.x == pytest.approx(x, abs=1e-12)
        assert back.y == pytest.approx(y, abs=1e-12)
        assert math.cos(back.theta - g.theta) == pytest.approx(1.0, abs=1e-12)


class TestExpLog:
    def test_exp(self):
        assert_allclose(exp(Twist.zero()).array, [0, 0, 0])
        assert_allclose(exp(Twist(0, 1, 2)).array, [0, 1, 2])
        assert_allclose(exp(Twist(math.pi / 2, 1, 0)).array, [math.pi / 2, 2 / math.pi, 2 / math.pi], atol=1e-12)

    def test_exp_small_angle(self):
        g = exp(Twist(1e-10, 1, 0))
        assert g.theta == pytest.approx(1e-10, abs=1e-15)
        assert g.x == pytest.approx(1.0)
        assert g.y == pytest.approx(5e-11, rel=1e-9)

    def test_exp_matches_series(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            xi = Twist(rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(-2, 2))
            assert_allclose(xi.exp().to_matrix(), _series_exp(xi.to_matrix()), atol=1e-10)

    def test_log(self):
        assert_allclose(log(Pose2.identity()).array, [0, 0, 0])
        assert_allclose(log(Pose2(0, 3, -4)).array, [0, 3, -4])
        assert_allclose(log(Pose2(math.pi / 2, 2 / math.pi, 2 / math.pi)).array, [math.pi / 2, 1, 0], atol=1e-12)

    def test_log_at_pi(self):
        xi = log(Pose2(math.pi, 1, 2))
        assert xi.a == pytest.approx(math.pi)
        assert_allclose(exp(xi).array, [math.pi, 1, 2], atol=1e-10)

    def test_round_trip_samples(self):
        rng = np.random.default_rng(3)
        xi = np.column_stack([rng.uniform(-3.1, 3.1, 1000), rng.uniform(-5, 5, 1000), rng.uniform(-5, 5, 1000)])
        assert_allclose(Se2.log(Se2.exp(xi)), xi, atol=1e-10)

    @given(small, coords, coords)
    @settings(max_examples=200)
    def test_exp_of_log(self, theta, x, y):
        g = Pose2(theta, x, y)
        back = exp(log(g))
        assert_allclose(back.array, g.array, atol=1e-10)


class TestAlgebra:
    def test_structure_constants(self):
        e1, e2, e3 = (Twist.basis(k) for k in (1, 2, 3))
        assert_allclose(bracket(e1, e2).array, e3.array)
        assert_allclose(bracket(e2, e3).array, [0, 0, 0])
        assert_allclose(bracket(e3, e1).array, e2.array)

    def test_bracket_matches_commutator(self):
        xi, eta = Twist(1, 1, 0), Twist(0, 0, 1)
        x, y = xi.to_matrix(), eta.to_matrix()
        assert_allclose(bracket(xi, eta).to_matrix(), x @ y - y @ x)

    def test_basis_bounds(self):
        with pytest.raises(IndexError):
            Twist.basis(0)
        with pytest.raises(IndexError):
            Momentum.basis(4)

    def test_dual_basis(self):
        for i in range(1, 4):
            for j in range(1, 4):
                trace = np.trace(Momentum.basis(i).to_matrix() @ Twist.basis(j).to_matrix())
                assert trace == pytest.approx(float(i == j), abs=1e-15)
                assert pairing(Momentum.basis(i), Twist.basis(j)) == float(i == j)

    def test_pairing(self):
        assert pairing(Momentum(1, 2, 3), Twist(4, 5, 6)) == 32
        assert pairing(Momentum.zero(), Twist(4, 5, 6)) == 0
        mu, xi = Momentum(0.3, -1.2, 2.0), Twist(-0.7, 0.4, 1.1)
        assert pairing(mu, xi) == pytest.approx(np.trace(mu.to_matrix() @ xi.to_matrix()), abs=1e-14)

    def test_inner(self):
        e1, e2 = Twist.basis(1), Twist.basis(2)
        assert inner(e1, e1) == 2
        assert inner(e2, e2) == 1
        assert inner(e1, e2) == 0
        assert norm_sq(Twist(1, 1, 1)) == 4
        xi = Twist(0.5, -2, 3)
        assert inner(xi, xi) == pytest.approx(np.trace(xi.to_matrix().T @ xi.to_matrix()))

    def test_arithmetic(self):
        assert (Twist(1, 2, 3) + Twist(1, 1, 1)) == Twist(2, 3, 4)
        assert (2 * Twist(1, 2, 3)) == Twist(2, 4, 6)
        assert -Momentum(1, -2, 0) == Momentum(-1, 2, 0)


class TestActions:
    def test_adjoint_identity(self):
        xi = Twist(0.3, -1, 2)
        assert_allclose(adjoint(Pose2.identity(), xi).array, xi.array)

    def test_adjoint_of_e1(self):
        rng = np.random.default_rng(4)
        for theta, x, y in _rng_poses(rng, 50):
            g = Pose2(theta, x, y)
            expected = [1, x * math.sin(theta) - y * math.cos(theta), x * math.cos(theta) + y * math.sin(theta)]
            assert_allclose(adjoint(g.inverse(), Twist.basis(1)).array, expected, atol=1e-12)
        assert_allclose(adjoint(Pose2(math.pi / 2, 1, 0).inverse(), Twist.basis(1)).array, [1, 1, 0], atol=1e-15)

    def test_adjoint_matches_conjugation(self):
        rng = np.random.default_rng(5)
        for g, xi in zip(_rng_poses(rng, 50), rng.uniform(-2, 2, (50, 3)), strict=True):
            m = Se2.pose_matrix(g)
            expected = m @ Se2.twist_matrix(xi) @ np.linalg.inv(m)
            assert_allclose(Se2.twist_matrix(Se2.adjoint(g, xi)), expected, atol=1e-12)

    def test_adjoint_homomorphism(self):
        rng = np.random.default_rng(6)
        g, h, xi = _rng_poses(rng, 1000), _rng_poses(rng, 1000), rng.uniform(-2, 2, (1000, 3))
        assert_allclose(Se2.adjoint(Se2.compose(g, h), xi), Se2.adjoint(g, Se2.adjoint(h, xi)), atol=1e-10)

    def test_adjoint_preserves_bracket(self):
        rng = np.random.default_rng(7)
        g, xi, eta = _rng_poses(rng, 1000), rng.uniform(-2, 2, (1000, 3)), rng.uniform(-2, 2, (1000, 3))
        lhs = Se2.bracket(Se2.adjoint(g, xi), Se2.adjoint(g, eta))
        assert_allclose(lhs, Se2.adjoint(g, Se2.bracket(xi, eta)), atol=1e-10)

    def test_coadjoint(self):
        mu = Momentum(1.5, -2, 3)
        assert_allclose(coadjoint_star(Twist.basis(1), mu).array, [0, 3, 2])
        assert_allclose(coadjoint_star(Twist.basis(2), mu).array, [-3, 0, 0])
        assert_allclose(coadjoint_star(Twist.zero(), mu).array, [0, 0, 0])

    def test_coadjoint_adjointness(self):
        rng = np.random.default_rng(8)
        xi, mu, eta = (rng.uniform(-2, 2, (1000, 3)) for _ in range(3))
        lhs = Se2.pairing(Se2.coadjoint_star(xi, mu), eta)
        assert_allclose(lhs, Se2.pairing(mu, Se2.bracket(xi, eta)), atol=1e-12)

    def test_cotangent_lift(self):
        assert_allclose(cotangent_lift_position_gradient(Pose2(0, 1, 1), 0.3, -0.2).array, [0, 0.3, -0.2])
        lifted = cotangent_lift_position_gradient(Pose2(math.pi / 2, 0, 0), 1, 0)
        assert_allclose(lifted.array, [0, 0, -1], atol=1e-15)
        assert_allclose(cotangent_lift_position_gradient(Pose2(1, 2, 3), 0, 0).array, [0, 0, 0])

    def test_cotangent_lift_matches_finite_differences(self):
        # U(x, y) = x^2 y + 3 y
        def u(g: Pose2) -> float:
            return g.x**2 * g.y + 3 * g.y

        rng = np.random.default_rng(9)
        t = 1e-5
        for theta, x, y in _rng_poses(rng, 20):
            g = Pose2(theta, x, y)
            lifted = g.cotangent_lift(2 * x * y, x**2 + 3)
            for k in (2, 3):
                e = Twist.basis(k) * t
                fd = (u(g @ e.exp()) - u(g @ (-e).exp())) / (2 * t)
                assert fd == pytest.approx(lifted.array[k - 1], rel=1e-6, abs=1e-8)

    def test_dexpinv_matches_finite_differences(self):
        # d/dh log(exp(u) exp(h w)) at h = 0
        rng = np.random.default_rng(10)
        h = 1e-6
        for u, w in zip(rng.uniform(-0.1, 0.1, (50, 3)), rng.uniform(-1, 1, (50, 3)), strict=True):
            ahead = Se2.log(Se2.compose(Se2.exp(u), Se2.exp(h * w)))
            behind = Se2.log(Se2.compose(Se2.exp(u), Se2.exp(-h * w)))
            assert_allclose(Se2.dexpinv(u, w), (ahead - behind) / (2 * h), atol=1e-6)

    def test_dexpinv_leading_terms(self):
        u, w = np.array([0.2, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        # [u, w] = 0.2 e3 and [u, [u, w]] = -0.04 e2
        assert_allclose(Se2.dexpinv(u, w), [0.0, 1 - 0.04 / 12, 0.1], atol=1e-15)
        assert_allclose(Se2.dexpinv(np.zeros(3), w), w)


if __name__ == "__main__":
    pytest.main()
