# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Running cost, barrier potentials and their body-frame gradients.

The obstacle is a unit disk; its centre enters only through the advected parameter
``alpha0 = Ad_{(0, c_x, c_y)} e1 = (1, c_y, -c_x)``, which is ``e1`` at the origin.
"""

from __future__ import annotations

import dataclasses
import enum
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lieswarm._error import InvalidParameterError, SingularityError
from lieswarm._global import LieswarmGlobals
from lieswarm._se2 import Momentum, Pose2, Se2, Twist

FloatArray = NDArray[np.float64]


class GradientVariant(enum.Enum):
    """
    How the pair-potential covector is brought to the body frame.

    ``rotated`` is the true cotangent lift; ``printed`` keeps the world-frame
    components unrotated, which only agrees at zero heading.
    """

    printed = enum.auto()
    rotated = enum.auto()

    @classmethod
    def of(cls, variant: str | GradientVariant) -> GradientVariant:
        if isinstance(variant, GradientVariant):
            return variant
        return cls[variant.lower().strip().replace("-", "_").replace(" ", "_")]


def _guard(denominator: float, *, kind: str, agents: Sequence[int], what: str) -> None:
    if denominator <= LieswarmGlobals.SINGULARITY_GUARD:
        msg = f"{what} is at or inside its pole (denominator {denominator:.3g}) for agents {tuple(agents)}"
        raise SingularityError(msg, kind=kind, agents=agents, margin=float(denominator))


def _readonly(arr: ArrayLike) -> FloatArray:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, repr=True, eq=False)
class PotentialParams:
    """
    Weights and geometry of the barrier potentials.

    Attributes:
        sigma_pair: symmetric, nonnegative ``s x s`` weights with zero diagonal
        sigma_obs: nonnegative obstacle weights, one per agent (0 disables)
        r_bar: agent radius in meters
        obstacle_center: centre of the unit obstacle
        d_des: optional desired distances for the combined potential (default ``2 r_bar``)
        sigma_combined: optional weights for the combined potential (default ``sigma_obs``)
    """

    sigma_pair: FloatArray
    sigma_obs: FloatArray
    r_bar: float = 1.0
    obstacle_center: tuple[float, float] = (0.0, 0.0)
    d_des: FloatArray | None = None
    sigma_combined: FloatArray | None = None

    def __post_init__(self):
        sigma_pair = _readonly(self.sigma_pair)
        sigma_obs = _readonly(self.sigma_obs)
        s = len(sigma_obs)
        if sigma_obs.ndim != 1 or sigma_pair.shape != (s, s):
            msg = f"Weights have shapes {sigma_pair.shape} and {sigma_obs.shape}; expected ({s}, {s}) and ({s},)"
            raise InvalidParameterError(msg)
        if not np.allclose(sigma_pair, sigma_pair.T, rtol=0, atol=1e-15):
            msg = "sigma_pair is not symmetric"
            raise InvalidParameterError(msg)
        if np.any(sigma_pair < 0) or np.any(np.diag(sigma_pair) != 0):
            msg = "sigma_pair must be nonnegative with a zero diagonal"
            raise InvalidParameterError(msg)
        if np.any(sigma_obs < 0):
            msg = "sigma_obs must be nonnegative"
            raise InvalidParameterError(msg)
        if not self.r_bar > 0:
            msg = f"r_bar must be positive, not {self.r_bar}"
            raise InvalidParameterError(msg)
        object.__setattr__(self, "sigma_pair", sigma_pair)
        object.__setattr__(self, "sigma_obs", sigma_obs)
        object.__setattr__(self, "r_bar", float(self.r_bar))
        object.__setattr__(self, "obstacle_center", (float(self.obstacle_center[0]), float(self.obstacle_center[1])))
        if self.d_des is not None:
            d_des = _readonly(self.d_des)
            if d_des.shape != (s, s) or not np.allclose(d_des, d_des.T):
                msg = f"d_des must be a symmetric ({s}, {s}) matrix"
                raise InvalidParameterError(msg)
            object.__setattr__(self, "d_des", d_des)
        if self.sigma_combined is not None:
            sigma_combined = _readonly(self.sigma_combined)
            if sigma_combined.shape != (s,) or np.any(sigma_combined < 0):
                msg = f"sigma_combined must be {s} nonnegative weights"
                raise InvalidParameterError(msg)
            object.__setattr__(self, "sigma_combined", sigma_combined)

    @classmethod
    def of(
        cls,
        n_agents: int,
        *,
        sigma_pair: float | ArrayLike = 0.0,
        sigma_obs: float | ArrayLike = 0.0,
        r_bar: float = 1.0,
        obstacle_center: tuple[float, float] = (0.0, 0.0),
        d_des: ArrayLike | None = None,
        sigma_combined: ArrayLike | None = None,
    ) -> PotentialParams:
        """
        Convenience constructor; scalars broadcast (a scalar ``sigma_pair`` fills the off-diagonal).
        """
        if np.isscalar(sigma_pair):
            pair = np.full((n_agents, n_agents), float(sigma_pair))
            np.fill_diagonal(pair, 0.0)
        else:
            pair = np.asarray(sigma_pair, dtype=np.float64)
        obs = np.full(n_agents, float(sigma_obs)) if np.isscalar(sigma_obs) else np.asarray(sigma_obs, dtype=float)
        return cls(pair, obs, r_bar, obstacle_center, d_des, sigma_combined)

    @classmethod
    def free(cls, n_agents: int, r_bar: float = 1.0) -> PotentialParams:
        return cls.of(n_agents, r_bar=r_bar)

    def copy(self, **kwargs) -> PotentialParams:
        return dataclasses.replace(self, **kwargs)

    @property
    def n_agents(self) -> int:
        return len(self.sigma_obs)

    @cached_property
    def alpha0(self) -> Twist:
        cx, cy = self.obstacle_center
        return Twist(1.0, cy, -cx)

    @cached_property
    def desired_distances(self) -> FloatArray:
        if self.d_des is not None:
            return self.d_des
        return _readonly(np.full((self.n_agents, self.n_agents), 2 * self.r_bar))

    @cached_property
    def combined_weights(self) -> FloatArray:
        return self.sigma_obs if self.sigma_combined is None else self.sigma_combined


class Potentials:
    """
    Scalar potentials, analytic gradients and the finite-difference oracle.
    """

    @classmethod
    def cost(cls, u: Twist) -> float:
        """
        ``C(u) = 1/2 <u, u>``; no pose argument, so invariant under left translation.
        """
        return 0.5 * u.norm_sq

    @classmethod
    def u_pair(
        cls, gi: Pose2, gj: Pose2, sigma: float, r_bar: float, *, agents: tuple[int, int] = (0, 1)
    ) -> float:
        """
        ``sigma / (2 (|p_i - p_j|^2 - 4 r_bar^2))``; ``agents`` only labels a :class:`SingularityError`.
        """
        if sigma == 0:
            return 0.0
        d = (gi.x - gj.x) ** 2 + (gi.y - gj.y) ** 2 - 4 * r_bar**2
        _guard(d, kind="pair", agents=agents, what="Pair potential")
        return sigma / (2 * d)

    @classmethod
    def u_obs(
        cls,
        g: Pose2,
        sigma: float,
        r_bar: float,
        center: tuple[float, float] = (0.0, 0.0),
        *,
        agent: int = 0,
    ) -> float:
        if sigma == 0:
            return 0.0
        d = (g.x - center[0]) ** 2 + (g.y - center[1]) ** 2 - (r_bar + 1) ** 2
        _guard(d, kind="obstacle", agents=(agent,), what="Obstacle potential")
        return sigma / (2 * d)

    @classmethod
    def u_ext(cls, alpha: Twist, sigma: float, r_bar: float = 1.0, *, agent: int = 0) -> float:
        """
        Extended obstacle potential of the advected parameter;
        ``norm_sq(alpha) - 2 - (r_bar + 1)^2`` is ``norm_sq(alpha) - 6`` at ``r_bar = 1``.
        """
        if sigma == 0:
            return 0.0
        d = alpha.norm_sq - 2 - (r_bar + 1) ** 2
        _guard(d, kind="obstacle", agents=(agent,), what="Extended obstacle potential")
        return sigma / (2 * d)

    @classmethod
    def grad_pair_body(
        cls,
        gi: Pose2,
        gj: Pose2,
        sigma: float,
        r_bar: float,
        variant: GradientVariant | str = GradientVariant.rotated,
        *,
        agents: tuple[int, int] = (0, 1),
    ) -> Momentum:
        variant = GradientVariant.of(variant)
        if sigma == 0:
            return Momentum.zero()
        dx, dy = gi.x - gj.x, gi.y - gj.y
        d = dx**2 + dy**2 - 4 * r_bar**2
        _guard(d, kind="pair", agents=agents, what="Pair potential")
        wx, wy = -sigma * dx / d**2, -sigma * dy / d**2
        if variant is GradientVariant.printed:
            return Momentum(0.0, wx, wy)
        return gi.cotangent_lift(wx, wy)

    @classmethod
    def grad_obs_ext(cls, alpha: Twist, sigma: float, r_bar: float = 1.0, *, agent: int = 0) -> Momentum:
        """
        ``ad*_alpha (dU_ext/dalpha)``, the momentum-map term of the obstacle.
        """
        if sigma == 0:
            return Momentum.zero()
        d = alpha.norm_sq - 2 - (r_bar + 1) ** 2
        _guard(d, kind="obstacle", agents=(agent,), what="Extended obstacle potential")
        k = sigma * alpha.a / d**2
        return Momentum(0.0, -k * alpha.v2, k * alpha.v1)

    @classmethod
    def u_combined(
        cls,
        gi: Pose2,
        neighbors: Sequence[Pose2],
        sigma: float,
        r_bar: float,
        d_des: float | Sequence[float] | None = None,
        center: tuple[float, float] = (0.0, 0.0),
        *,
        agents: Sequence[int] | None = None,
    ) -> float:
        """
        Obstacle clearance and neighbour spacing folded into one barrier,
        ``sigma / (2 (|p - c|^2 - (r_bar + 1)^2) prod_j (|p - p_j|^2 - d_j^2))``.
        ``agents`` names ``gi`` and then each neighbour for error reports (default ``0, 1, ...``).
        """
        if d_des is None:
            d_des = 2 * r_bar
        dists = [float(d_des)] * len(neighbors) if np.isscalar(d_des) else list(d_des)
        ids = list(range(len(neighbors) + 1)) if agents is None else list(agents)
        d0 = (gi.x - center[0]) ** 2 + (gi.y - center[1]) ** 2 - (r_bar + 1) ** 2
        _guard(d0, kind="combined", agents=(ids[0],), what="Combined potential (obstacle factor)")
        upsilon = 1.0
        for k, (gj, dist) in enumerate(zip(neighbors, dists, strict=True)):
            factor = (gi.x - gj.x) ** 2 + (gi.y - gj.y) ** 2 - dist**2
            _guard(factor, kind="combined", agents=(ids[0], ids[k + 1]), what="Combined potential (neighbour factor)")
            upsilon *= factor
        return sigma / (2 * d0 * upsilon)

    @classmethod
    def grad_combined_fd(
        cls,
        gi: Pose2,
        neighbors: Sequence[Pose2],
        sigma: float,
        r_bar: float,
        d_des: float | Sequence[float] | None = None,
        center: tuple[float, float] = (0.0, 0.0),
        step: float | None = None,
    ) -> Momentum:
        return cls.body_gradient_fd(
            lambda g: cls.u_combined(g, neighbors, sigma, r_bar, d_des, center),
            gi,
            step,
        )

    @classmethod
    def body_gradient_fd(
        cls,
        fn: Callable[[Pose2], float],
        g: Pose2,
        step: float | None = None,
    ) -> Momentum:
        """
        Central differences of ``t -> fn(g exp(t e_k))`` at ``t = 0`` for k = 1, 2, 3.
        """
        t = LieswarmGlobals.FD_STEP if step is None else step
        out = np.zeros(3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = t
            plus = fn(Pose2.from_array(Se2.compose(g.array, Se2.exp(e))))
            minus = fn(Pose2.from_array(Se2.compose(g.array, Se2.exp(-e))))
            out[k] = (plus - minus) / (2 * t)
        return Momentum.from_array(out)

    # vectorized fields used by the integrators

    @classmethod
    def pair_field(
        cls,
        g: FloatArray,
        weights: FloatArray,
        r_bar: float,
        variant: GradientVariant = GradientVariant.rotated,
    ) -> tuple[float, FloatArray]:
        """
        Total pair energy ``sum_{i<j} U_ij`` and per-agent body covectors ``sum_j T*L(dU_ij/dg_i)``.
        """
        n = len(g)
        grads = np.zeros((n, 3))
        if n < 2 or not np.any(weights):
            return 0.0, grads
        dx = g[:, 1, None] - g[None, :, 1]
        dy = g[:, 2, None] - g[None, :, 2]
        d = dx**2 + dy**2 - 4 * r_bar**2
        active = weights > 0
        if np.any(d[active] <= LieswarmGlobals.SINGULARITY_GUARD):
            i, j = np.argwhere(active & (d <= LieswarmGlobals.SINGULARITY_GUARD))[0]
            _guard(float(d[i, j]), kind="pair", agents=(int(min(i, j)), int(max(i, j))), what="Pair potential")
        safe = np.where(active, d, 1.0)
        energy = 0.25 * float(np.sum(np.where(active, weights / safe, 0.0)))
        coef = np.where(active, -weights / safe**2, 0.0)
        world = np.stack([np.sum(coef * dx, axis=1), np.sum(coef * dy, axis=1)], axis=-1)
        if variant is GradientVariant.printed:
            grads[:, 1:] = world
        else:
            grads = Se2.cotangent_lift(g, world)
        return energy, grads

    @classmethod
    def obstacle_field(cls, alpha: FloatArray, sigma_obs: FloatArray, r_bar: float) -> tuple[float, FloatArray]:
        """
        Total extended obstacle energy and per-agent ``ad*_alpha (dU_ext/dalpha)``.
        """
        grads = np.zeros((len(alpha), 3))
        active = sigma_obs > 0
        if not np.any(active):
            return 0.0, grads
        d = Se2.norm_sq(alpha) - 2 - (r_bar + 1) ** 2
        if np.any(d[active] <= LieswarmGlobals.SINGULARITY_GUARD):
            i = int(np.flatnonzero(active & (d <= LieswarmGlobals.SINGULARITY_GUARD))[0])
            _guard(float(d[i]), kind="obstacle", agents=(i,), what="Extended obstacle potential")
        safe = np.where(active, d, 1.0)
        energy = float(np.sum(np.where(active, sigma_obs / (2 * safe), 0.0)))
        k = np.where(active, sigma_obs * alpha[:, 0] / safe**2, 0.0)
        grads[:, 1] = -k * alpha[:, 2]
        grads[:, 2] = k * alpha[:, 1]
        return energy, grads

    @classmethod
    def combined_energy(cls, g: FloatArray, params: PotentialParams, adjacency: FloatArray) -> float:
        """
        ``sum_i U_i`` for the combined potential, neighbours taken from ``adjacency``.
        """
        cx, cy = params.obstacle_center
        weights = params.combined_weights
        d0 = (g[:, 1] - cx) ** 2 + (g[:, 2] - cy) ** 2 - (params.r_bar + 1) ** 2
        dx = g[:, 1, None] - g[None, :, 1]
        dy = g[:, 2, None] - g[None, :, 2]
        factors = dx**2 + dy**2 - params.desired_distances**2
        edges = adjacency > 0
        total = 0.0
        for i in np.flatnonzero(weights > 0):
            _guard(float(d0[i]), kind="combined", agents=(int(i),), what="Combined potential (obstacle factor)")
            row = factors[i][edges[i]]
            if np.any(row <= LieswarmGlobals.SINGULARITY_GUARD):
                j = int(np.flatnonzero(edges[i])[np.argmin(row)])
                _guard(float(row.min()), kind="combined", agents=(int(i), j), what="Combined potential")
            total += weights[i] / (2 * d0[i] * float(np.prod(row)))
        return total

    @classmethod
    def combined_field(
        cls,
        g: FloatArray,
        params: PotentialParams,
        adjacency: FloatArray,
    ) -> tuple[float, FloatArray]:
        """
        Combined energy and its body covectors by central differences in the exp chart of each agent.
        """
        energy = cls.combined_energy(g, params, adjacency)
        t = LieswarmGlobals.FD_STEP
        grads = np.zeros((len(g), 3))
        for i in range(len(g)):
            for k in range(3):
                e = np.zeros(3)
                e[k] = t
                plus, minus = g.copy(), g.copy()
                plus[i] = Se2.compose(g[i], Se2.exp(e))
                minus[i] = Se2.compose(g[i], Se2.exp(-e))
                grads[i, k] = (
                    cls.combined_energy(plus, params, adjacency) - cls.combined_energy(minus, params, adjacency)
                ) / (2 * t)
        return energy, grads

    @classmethod
    def obstacle_distance(cls, g: FloatArray, center: tuple[float, float] = (0.0, 0.0)) -> FloatArray:
        """
        Euclidean distance of each agent from the obstacle centre.
        """
        return np.hypot(g[..., 1] - center[0], g[..., 2] - center[1])

    @classmethod
    def pair_distances(cls, g: FloatArray) -> FloatArray:
        """
        Distances between all unordered pairs of agents, ``i < j`` in row-major order.
        """
        i, j = np.triu_indices(len(g), k=1)
        return np.hypot(g[i, 1] - g[j, 1], g[i, 2] - g[j, 2])


__all__ = ["GradientVariant", "PotentialParams", "Potentials"]
