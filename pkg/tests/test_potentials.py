# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from lieswarm._error import InvalidParameterError, SingularityError
from lieswarm._graph import InteractionGraph
from lieswarm._potentials import *
from lieswarm._se2 import Momentum, Pose2, Se2, Twist

E1 = Twist.basis(1)


def _far_poses(rng: np.random.Generator, n: int, *, min_radius: float = 3.0) -> list[Pose2]:
    poses = []
    while len(poses) < n:
        theta, x, y = rng.uniform(-np.pi, np.pi), rng.uniform(-8, 8), rng.uniform(-8, 8)
        if math.hypot(x, y) > min_radius and all(math.hypot(x - p.x, y - p.y) > 2.5 for p in poses):
            poses.append(Pose2(theta, x, y))
    return poses


class TestCost:
    def test_cost(self):
        assert Potentials.cost(Twist(1, 0, 0)) == 1
        assert Potentials.cost(Twist(0, 3, 4)) == 12.5
        assert Potentials.cost(Twist.zero()) == 0


class TestPairPotential:
    def test_value(self):
        assert Potentials.u_pair(Pose2(0, 0, 0), Pose2(0, 4, 0), 1.0, 1.0) == pytest.approx(1 / 24)
        assert Potentials.u_pair(Pose2(1.2, 0, 0), Pose2(-0.4, 4, 0), 2.0, 1.0) == pytest.approx(1 / 12)
        assert Potentials.u_pair(Pose2(0, 0, 0), Pose2(0, 0.1, 0), 0.0, 1.0) == 0

    def test_contact(self):
        with pytest.raises(SingularityError) as e:
            Potentials.u_pair(Pose2(0, 0, 0), Pose2(0, 2, 0), 1.0, 1.0)
        assert e.value.kind == "pair"
        assert e.value.margin == pytest.approx(0.0)
        with pytest.raises(SingularityError):
            Potentials.u_pair(Pose2(0, 0, 0), Pose2(0, 1, 0), 1.0, 1.0)

    def test_contact_names_agents(self):
        with pytest.raises(SingularityError) as e:
            Potentials.u_pair(Pose2(0, 0, 0), Pose2(0, 2, 0), 1.0, 1.0, agents=(3, 5))
        assert e.value.agents == (3, 5)
        with pytest.raises(SingularityError) as e:
            Potentials.grad_pair_body(Pose2(0, 0, 0), Pose2(0, 1, 0), 1.0, 1.0, agents=(2, 4))
        assert e.value.agents == (2, 4)
        with pytest.raises(SingularityError) as e:
            Potentials.u_pair(Pose2(0, 0, 0), Pose2(0, 2, 0), 1.0, 1.0)
        assert e.value.agents == (0, 1)

    def test_gradient(self):
        grad = Potentials.grad_pair_body(Pose2(0, 4, 0), Pose2(0, 0, 0), 1.0, 1.0)
        assert_allclose(grad.array, [0, -1 / 36, 0], atol=1e-15)
        printed = Potentials.grad_pair_body(Pose2(0, 4, 0), Pose2(0, 0, 0), 1.0, 1.0, "printed")
        assert_allclose(printed.array, grad.array, atol=1e-15)

    def test_gradient_rotated(self):
        rotated = Potentials.grad_pair_body(Pose2(math.pi / 2, 4, 0), Pose2(0, 0, 0), 1.0, 1.0)
        assert_allclose(rotated.array, [0, 0, 1 / 36], atol=1e-15)
        printed = Potentials.grad_pair_body(Pose2(math.pi / 2, 4, 0), Pose2(0, 0, 0), 1.0, 1.0, "printed")
        assert_allclose(printed.array, [0, -1 / 36, 0], atol=1e-15)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            gi, gj = _far_poses(rng, 2, min_radius=0)
            sigma, r_bar = rng.uniform(0.1, 3), rng.uniform(0.2, 1.0)
            fd = Potentials.body_gradient_fd(lambda g, gj=gj, s=sigma, r=r_bar: Potentials.u_pair(g, gj, s, r), gi)
            grad = Potentials.grad_pair_body(gi, gj, sigma, r_bar)
            assert_allclose(grad.array, fd.array, rtol=1e-6, atol=1e-9)

    def test_printed_gradient_only_at_zero_heading(self):
        gi, gj = Pose2(0.7, 3, 1), Pose2(0, 0, 0)
        fd = Potentials.body_gradient_fd(lambda g: Potentials.u_pair(g, gj, 1.0, 1.0), gi)
        printed = Potentials.grad_pair_body(gi, gj, 1.0, 1.0, GradientVariant.printed)
        assert not np.allclose(printed.array, fd.array, rtol=1e-6, atol=1e-9)

    def test_left_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            gi, gj = _far_poses(rng, 2, min_radius=0)
            h = Pose2(rng.uniform(-np.pi, np.pi), rng.uniform(-5, 5), rng.uniform(-5, 5))
            before = Potentials.u_pair(gi, gj, 1.0, 1.0)
            assert Potentials.u_pair(h @ gi, h @ gj, 1.0, 1.0) == pytest.approx(before, rel=1e-12)

    @given(st.floats(min_value=2.5, max_value=50), st.floats(min_value=-math.pi, max_value=math.pi))
    @settings(max_examples=100)
    def test_positive_outside_contact(self, dist, heading):
        gi, gj = Pose2(heading, dist, 0), Pose2(0, 0, 0)
        assert Potentials.u_pair(gi, gj, 1.0, 1.0) > 0


class TestObstaclePotential:
    def test_value(self):
        assert Potentials.u_obs(Pose2(0, 3, 4), 1.0, 1.0) == pytest.approx(1 / 42)
        assert Potentials.u_obs(Pose2(0, 5, 5), 1.0, 1.0, center=(2, 1)) == pytest.approx(1 / 42)
        assert Potentials.u_obs(Pose2(0, 0, 0), 0.0, 1.0) == 0

    def test_inside_clearance(self):
        with pytest.raises(SingularityError) as e:
            Potentials.u_obs(Pose2(0, 1, 1), 1.0, 1.0)
        assert e.value.kind == "obstacle"

    def test_inside_clearance_names_agent(self):
        with pytest.raises(SingularityError) as e:
            Potentials.u_obs(Pose2(0, 1, 1), 1.0, 1.0, agent=7)
        assert e.value.agents == (7,)
        with pytest.raises(SingularityError) as e:
            Potentials.u_ext(Twist(1, 0, 1), 1.0, agent=2)
        assert e.value.agents == (2,)
        with pytest.raises(SingularityError) as e:
            Potentials.grad_obs_ext(Twist(1, 0, 1), 1.0, agent=4)
        assert e.value.agents == (4,)

    def test_extended(self):
        assert Potentials.u_ext(Twist(1, 0, 3), 1.0) == pytest.approx(1 / 10)
        with pytest.raises(SingularityError):
            Potentials.u_ext(Twist(1, 0, 1), 1.0)

    def test_extended_matches_obstacle(self):
        rng = np.random.default_rng(12)
        center = (2.0, 1.0)
        alpha0 = PotentialParams.of(1, obstacle_center=center).alpha0
        for g in _far_poses(rng, 50, min_radius=5):
            alpha = g.inverse().adjoint(alpha0)
            u = Potentials.u_obs(g, 1.0, 0.5, center)
            assert Potentials.u_ext(alpha, 1.0, 0.5) == pytest.approx(u, rel=1e-10)

    def test_extended_gradient(self):
        assert_allclose(Potentials.grad_obs_ext(Twist(1, 0, 3), 1.0).array, [0, -3 / 25, 0], atol=1e-15)
        assert Potentials.grad_obs_ext(Twist(1, 0, 3), 0.0) == Momentum.zero()

    def test_extended_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        for g in _far_poses(rng, 100):
            fd = Potentials.body_gradient_fd(lambda p: Potentials.u_obs(p, 1.0, 1.0), g)
            grad = Potentials.grad_obs_ext(g.inverse().adjoint(E1), 1.0, 1.0)
            assert_allclose(grad.array, fd.array, rtol=1e-6, atol=1e-9)

    def test_isotropy(self):
        rng = np.random.default_rng(14)
        for g in _far_poses(rng, 100):
            phi = rng.uniform(-np.pi, np.pi)
            rotated = Pose2.rotation(phi) @ g
            assert Potentials.u_obs(rotated, 1.0, 1.0) == pytest.approx(Potentials.u_obs(g, 1.0, 1.0), rel=1e-10)


class TestCombinedPotential:
    def test_no_neighbours(self):
        assert Potentials.u_combined(Pose2(0, 3, 4), [], 1.0, 1.0) == pytest.approx(1 / 42)

    def test_one_neighbour(self):
        u = Potentials.u_combined(Pose2(0, 3, 4), [Pose2(0, 3, 7)], 1.0, 1.0)
        assert u == pytest.approx(1 / (2 * 21 * 5))

    def test_neighbour_contact(self):
        with pytest.raises(SingularityError) as e:
            Potentials.u_combined(Pose2(0, 3, 4), [Pose2(0, 3, 5)], 1.0, 1.0)
        assert e.value.kind == "combined"
        with pytest.raises(SingularityError) as e:
            Potentials.u_combined(Pose2(0, 3, 4), [Pose2(0, -4, 0), Pose2(0, 3, 5)], 1.0, 1.0, agents=(6, 1, 9))
        assert e.value.agents == (6, 9)
        with pytest.raises(SingularityError) as e:
            Potentials.u_combined(Pose2(0, 1, 0), [], 1.0, 1.0, agents=(6,))
        assert e.value.agents == (6,)

    def test_energy_matches_scalar(self):
        poses = [Pose2(0, 3, 4), Pose2(0.3, 3, 8), Pose2(-1, -4, 0)]
        graph = InteractionGraph.of(3, [(0, 1), (1, 2)])
        params = PotentialParams.of(3, sigma_obs=1.0)
        g = np.stack([p.array for p in poses])
        expected = sum(
            Potentials.u_combined(poses[i], [poses[j] for j in graph.neighbors(i)], 1.0, 1.0) for i in range(3)
        )
        assert Potentials.combined_energy(g, params, graph.adjacency) == pytest.approx(expected)

    def test_field_matches_scalar_oracle(self):
        poses = [Pose2(0, 3, 4), Pose2(0.3, 3, 8)]
        params = PotentialParams.of(2, sigma_obs=1.0)
        g = np.stack([p.array for p in poses])
        adjacency = InteractionGraph.complete(2).adjacency
        _, grads = Potentials.combined_field(g, params, adjacency)

        def total(p: Pose2) -> float:
            return Potentials.combined_energy(np.stack([p.array, poses[1].array]), params, adjacency)

        assert_allclose(grads[0], Potentials.body_gradient_fd(total, poses[0]).array, rtol=1e-8, atol=1e-12)


class TestFields:
    def test_pair_field(self):
        rng = np.random.default_rng(15)
        poses = _far_poses(rng, 4, min_radius=0)
        graph = InteractionGraph.complete(4)
        params = PotentialParams.of(4, sigma_pair=1.5, r_bar=0.5)
        g = np.stack([p.array for p in poses])
        energy, grads = Potentials.pair_field(g, params.sigma_pair * graph.adjacency, 0.5)
        expected = sum(Potentials.u_pair(poses[i], poses[j], 1.5, 0.5) for i, j in graph.sorted_edges)
        assert energy == pytest.approx(expected)
        for i in range(4):
            total = sum(
                (Potentials.grad_pair_body(poses[i], poses[j], 1.5, 0.5) for j in graph.neighbors(i)),
                Momentum.zero(),
            )
            assert_allclose(grads[i], total.array, atol=1e-14)

    def test_pair_field_reports_agents(self):
        g = np.array([[0, 0, 0], [0, 10, 0], [0, 10.5, 0]], dtype=float)
        weights = np.ones((3, 3)) - np.eye(3)
        with pytest.raises(SingularityError) as e:
            Potentials.pair_field(g, weights, 1.0)
        assert e.value.agents == (1, 2)

    def test_pair_field_skips_non_edges(self):
        g = np.array([[0, 0, 0], [0, 1, 0]], dtype=float)
        energy, grads = Potentials.pair_field(g, np.zeros((2, 2)), 1.0)
        assert energy == 0
        assert not np.any(grads)

    def test_obstacle_field(self):
        alpha = np.array([[1, 0, 3], [1, 10, 0]], dtype=float)
        energy, grads = Potentials.obstacle_field(alpha, np.array([1.0, 0.0]), 1.0)
        assert energy == pytest.approx(1 / 10)
        assert_allclose(grads[0], [0, -3 / 25, 0])
        assert_allclose(grads[1], [0, 0, 0])

    def test_distances(self):
        g = np.array([[0, 0, 0], [0, 3, 4], [1, 0, 1]], dtype=float)
        assert_allclose(Potentials.pair_distances(g), [5, 1, math.sqrt(18)])
        assert_allclose(Potentials.obstacle_distance(g, (0, 1)), [1, math.sqrt(18), 0])


class TestPotentialParams:
    def test_of(self):
        params = PotentialParams.of(3, sigma_pair=2.0, sigma_obs=0.5, r_bar=0.5, obstacle_center=(2, 1))
        assert_allclose(params.sigma_pair, [[0, 2, 2], [2, 0, 2], [2, 2, 0]])
        assert_allclose(params.sigma_obs, [0.5, 0.5, 0.5])
        assert params.alpha0 == Twist(1, 1, -2)
        assert_allclose(params.desired_distances, np.full((3, 3), 1.0))
        assert params.n_agents == 3

    def test_alpha0_at_origin(self):
        assert PotentialParams.free(2).alpha0 == E1

    def test_read_only(self):
        params = PotentialParams.of(2, sigma_pair=1.0)
        with pytest.raises(ValueError):
            params.sigma_pair[0, 1] = 3.0

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            PotentialParams(np.array([[0, 1], [2, 0]]), np.zeros(2))
        with pytest.raises(InvalidParameterError):
            PotentialParams(np.array([[0, -1], [-1, 0]]), np.zeros(2))
        with pytest.raises(InvalidParameterError):
            PotentialParams(np.eye(2), np.zeros(2))
        with pytest.raises(InvalidParameterError):
            PotentialParams.of(2, sigma_obs=-1.0)
        with pytest.raises(InvalidParameterError):
            PotentialParams.of(2, r_bar=0)
        with pytest.raises(InvalidParameterError):
            PotentialParams(np.zeros((3, 3)), np.zeros(2))

    def test_gradient_variant(self):
        assert GradientVariant.of("Printed") is GradientVariant.printed
        assert GradientVariant.of(GradientVariant.rotated) is GradientVariant.rotated
        with pytest.raises(KeyError):
            GradientVariant.of("sideways")

    def test_cotangent_lift_of_field(self):
        # the vectorized lift agrees with the scalar one
        g = np.array([[0.3, 1, 2], [-2, 0, 0]])
        lifted = Se2.cotangent_lift(g, np.array([[1, 0], [0.5, -1]]))
        assert_allclose(lifted[0], Pose2(0.3, 1, 2).cotangent_lift(1, 0).array)
        assert_allclose(lifted[1], Pose2(-2, 0, 0).cotangent_lift(0.5, -1).array)


if __name__ == "__main__":
    pytest.main()
