# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Reduced optimality system: control law, vector fields, Hamiltonian and fixed-step integrators.

Internally a system is packed as an ``(s, 9)`` array of rows ``[theta, x, y, m1, m2, m3, a1, a2, a3]``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from lieswarm._error import InvalidParameterError, SingularityError
from lieswarm._model import ALPHA, MU, POSE, Diagnostics, SystemState, Trajectory
from lieswarm._potentials import GradientVariant, PotentialParams, Potentials
from lieswarm._se2 import METRIC, Momentum, Pose2, Se2, Twist
from lieswarm._setup import logger

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from lieswarm._graph import InteractionGraph

    FloatArray = NDArray[np.float64]


class _NamedEnum(enum.Enum):
    @classmethod
    def of(cls, value: str | _NamedEnum):
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).lower().strip().replace("-", "_").replace(" ", "_")]
        except KeyError:
            msg = f"Unknown {cls.__name__} '{value}'; choose from {', '.join(m.name for m in cls)}"
            raise InvalidParameterError(msg) from None


class DynamicsMode(_NamedEnum):
    """
    ``paper_printed`` integrates the scalar system as published (including its factor and frame slips);
    ``first_principles`` assembles the Lie-Poisson equations from the kernel and conserves the Hamiltonian.
    """

    paper_printed = enum.auto()
    first_principles = enum.auto()


class Integrator(_NamedEnum):
    euler = enum.auto()
    rk4 = enum.auto()


class PotentialModel(_NamedEnum):
    """
    ``separate`` uses pair barriers plus the advected obstacle barrier;
    ``combined`` uses the product-form potential with a numerical gradient.
    """

    separate = enum.auto()
    combined = enum.auto()


@dataclass(frozen=True, repr=True)
class DynOptions:
    """
    Options for the extremal flow.

    Attributes:
        mode: which vector field to integrate
        integrator: fixed-step scheme
        dt: step size (seconds)
        drift_e0: uncontrolled body velocity
        control_dims: actuated algebra directions, 1-based (``(1, 2)`` for the unicycle)
        potential: separate barriers or the combined potential
        record_every: keep every k-th step in the trajectory (the last step is always kept)
    """

    mode: DynamicsMode = DynamicsMode.first_principles
    integrator: Integrator = Integrator.rk4
    dt: float = 1e-3
    drift_e0: Twist = dataclasses.field(default_factory=Twist.zero)
    control_dims: tuple[int, ...] = (1, 2)
    potential: PotentialModel = PotentialModel.separate
    record_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", DynamicsMode.of(self.mode))
        object.__setattr__(self, "integrator", Integrator.of(self.integrator))
        object.__setattr__(self, "potential", PotentialModel.of(self.potential))
        object.__setattr__(self, "control_dims", tuple(int(k) for k in self.control_dims))
        if not isinstance(self.drift_e0, Twist):
            object.__setattr__(self, "drift_e0", Twist.from_array(self.drift_e0))
        if not (math.isfinite(self.dt) and self.dt > 0):
            msg = f"dt must be positive and finite, not {self.dt}"
            raise InvalidParameterError(msg)
        if len(self.control_dims) == 0:
            msg = "control_dims must not be empty"
            raise InvalidParameterError(msg)
        if len(set(self.control_dims)) != len(self.control_dims) or not set(self.control_dims) <= {1, 2, 3}:
            msg = f"control_dims must be distinct basis indices in 1..3, not {self.control_dims}"
            raise InvalidParameterError(msg)
        if self.record_every < 1:
            msg = f"record_every must be at least 1, not {self.record_every}"
            raise InvalidParameterError(msg)
        if self.mode is DynamicsMode.paper_printed:
            if self.drift_e0 != Twist.zero() or self.control_dims != (1, 2):
                msg = "paper_printed mode only covers the driftless two-input unicycle"
                raise InvalidParameterError(msg)
            if self.potential is PotentialModel.combined:
                msg = "The combined potential is only available in first_principles mode"
                raise InvalidParameterError(msg)

    def copy(self, **kwargs) -> DynOptions:
        return dataclasses.replace(self, **kwargs)

    @cached_property
    def control_mask(self) -> FloatArray:
        mask = np.zeros(3)
        mask[[k - 1 for k in self.control_dims]] = 1.0
        return mask


@dataclass(frozen=True, repr=True)
class StateDerivative:
    """
    Time derivative of a system state.

    Attributes:
        velocity: body velocity ``e0 + u*`` per agent, so that ``g' = g velocity``
        pose_rate: coordinate rates ``(theta', x', y')`` per agent
        mu_dot: costate rates
        alpha_dot: advected parameter rates
    """

    velocity: FloatArray
    pose_rate: FloatArray
    mu_dot: FloatArray
    alpha_dot: FloatArray


def _velocity(mu: FloatArray, opts: DynOptions) -> FloatArray:
    return opts.drift_e0.array + opts.control_mask * mu / METRIC


def _pose_rate(g: FloatArray, vel: FloatArray) -> FloatArray:
    c, s = np.cos(g[:, 0]), np.sin(g[:, 0])
    return np.stack([vel[:, 0], c * vel[:, 1] - s * vel[:, 2], s * vel[:, 1] + c * vel[:, 2]], axis=-1)


class _Field:
    """
    The vector field for fixed parameters, graph and options.
    """

    def __init__(self, params: PotentialParams, graph: InteractionGraph, opts: DynOptions) -> None:
        if params.n_agents != graph.n_agents:
            msg = f"Potential parameters cover {params.n_agents} agents but the graph has {graph.n_agents}"
            raise InvalidParameterError(msg)
        self.params = params
        self.graph = graph
        self.opts = opts
        self.weights = params.sigma_pair * graph.adjacency
        self.combined = opts.potential is PotentialModel.combined

    def energy_and_forces(self, arr: FloatArray, variant: GradientVariant) -> tuple[float, FloatArray, FloatArray]:
        """
        Returns total potential energy, pair (or combined) body covectors and obstacle covectors.
        """
        g = arr[:, POSE]
        if self.combined:
            energy, grads = Potentials.combined_field(g, self.params, self.graph.adjacency)
            return energy, grads, np.zeros_like(grads)
        e_pair, pair = Potentials.pair_field(g, self.weights, self.params.r_bar, variant)
        e_obs, obs = Potentials.obstacle_field(arr[:, ALPHA], self.params.sigma_obs, self.params.r_bar)
        return e_pair + e_obs, pair, obs

    def __call__(self, arr: FloatArray) -> StateDerivative:
        g, mu, alpha = arr[:, POSE], arr[:, MU], arr[:, ALPHA]
        vel = _velocity(mu, self.opts)
        alpha_dot = -Se2.bracket(vel, alpha)
        if self.opts.mode is DynamicsMode.paper_printed:
            _, pair, obs = self.energy_and_forces(arr, GradientVariant.printed)
            mu_dot = np.empty_like(mu)
            mu_dot[:, 0] = -0.5 * mu[:, 1] * mu[:, 2]
            mu_dot[:, 1] = 0.5 * mu[:, 0] * mu[:, 2] - obs[:, 1] + pair[:, 1]
            mu_dot[:, 2] = -0.5 * mu[:, 0] * mu[:, 1] - obs[:, 2] + pair[:, 2]
        else:
            _, pair, obs = self.energy_and_forces(arr, GradientVariant.rotated)
            mu_dot = Se2.coadjoint_star(vel, mu) + pair + obs
        return StateDerivative(vel, _pose_rate(g, vel), mu_dot, alpha_dot)

    def hamiltonian(self, arr: FloatArray) -> float:
        mu = arr[:, MU]
        energy, _, _ = self.energy_and_forces(arr, GradientVariant.rotated)
        kinetic = np.sum(self.opts.control_mask * mu**2 / (2 * METRIC))
        drift = np.sum(mu @ self.opts.drift_e0.array)
        return float(drift + kinetic - energy)

    def diagnostics(self, arr: FloatArray) -> Diagnostics:
        g, mu = arr[:, POSE], arr[:, MU]
        dists = Potentials.pair_distances(g)
        return Diagnostics(
            h=self.hamiltonian(arr),
            min_pair_dist=float(dists.min()) if len(dists) else math.inf,
            min_obs_clearance=float(Potentials.obstacle_distance(g, self.params.obstacle_center).min()),
            casimir=tuple(float(c) for c in mu[:, 1] ** 2 + mu[:, 2] ** 2),
        )

    # steppers

    def _coordinate_update(self, arr: FloatArray, d: StateDerivative, h: float) -> FloatArray:
        return arr + h * np.concatenate([d.pose_rate, d.mu_dot, d.alpha_dot], axis=1)

    def _lie_update(self, arr: FloatArray, d: StateDerivative, h: float) -> FloatArray:
        out = np.empty_like(arr)
        out[:, POSE] = Se2.compose(arr[:, POSE], Se2.exp(h * d.velocity))
        out[:, MU] = arr[:, MU] + h * d.mu_dot
        out[:, ALPHA] = arr[:, ALPHA] + h * d.alpha_dot
        return out

    def step(self, arr: FloatArray) -> FloatArray:
        dt = self.opts.dt
        lie = self.opts.mode is DynamicsMode.first_principles
        if self.opts.integrator is Integrator.euler:
            d = self(arr)
            out = self._lie_update(arr, d, dt) if lie else self._coordinate_update(arr, d, dt)
        elif lie:
            out = self._rkmk4(arr, dt)
        else:
            out = self._rk4(arr, dt)
        out[:, 0] = Se2.wrap(out[:, 0])
        return out

    def _rk4(self, arr: FloatArray, dt: float) -> FloatArray:
        k1 = self(arr)
        k2 = self(self._coordinate_update(arr, k1, dt / 2))
        k3 = self(self._coordinate_update(arr, k2, dt / 2))
        k4 = self(self._coordinate_update(arr, k3, dt))
        rates = [np.concatenate([k.pose_rate, k.mu_dot, k.alpha_dot], axis=1) for k in (k1, k2, k3, k4)]
        return arr + dt / 6 * (rates[0] + 2 * rates[1] + 2 * rates[2] + rates[3])

    def _rkmk4(self, arr: FloatArray, dt: float) -> FloatArray:
        g, mu, alpha = arr[:, POSE], arr[:, MU], arr[:, ALPHA]

        def stage(u: FloatArray, prev: StateDerivative, h: float) -> StateDerivative:
            staged = np.concatenate(
                [Se2.compose(g, Se2.exp(u)), mu + h * prev.mu_dot, alpha + h * prev.alpha_dot], axis=1
            )
            return self(staged)

        d1 = self(arr)
        k1 = dt * d1.velocity
        d2 = stage(k1 / 2, d1, dt / 2)
        k2 = dt * Se2.dexpinv(k1 / 2, d2.velocity)
        d3 = stage(k2 / 2, d2, dt / 2)
        k3 = dt * Se2.dexpinv(k2 / 2, d3.velocity)
        d4 = stage(k3, d3, dt)
        k4 = dt * Se2.dexpinv(k3, d4.velocity)
        out = np.empty_like(arr)
        out[:, POSE] = Se2.compose(g, Se2.exp((k1 + 2 * k2 + 2 * k3 + k4) / 6))
        out[:, MU] = mu + dt / 6 * (d1.mu_dot + 2 * d2.mu_dot + 2 * d3.mu_dot + d4.mu_dot)
        out[:, ALPHA] = alpha + dt / 6 * (d1.alpha_dot + 2 * d2.alpha_dot + 2 * d3.alpha_dot + d4.alpha_dot)
        return out


def _warn_printed(opts: DynOptions) -> None:
    if opts.mode is DynamicsMode.paper_printed:
        logger.warning(
            "paper_printed mode: mu1' uses the published factor -1/2 and pair gradients are not rotated"
            " into the body frame; the Hamiltonian is not conserved in this mode"
        )


def pmp_controls(mu: Momentum, opts: DynOptions | None = None) -> Twist:
    """
    Maximizer of ``<mu, u> - |u|^2 / 2`` over the actuated directions: ``u_k = mu_k / w_k``.

    For the unicycle this is ``(m1 / 2, m2, 0)``; ``e3`` is unactuated.
    """
    opts = DynOptions() if opts is None else opts
    return Twist.from_array(opts.control_mask * mu.array / METRIC)


def hamiltonian(
    state: SystemState,
    params: PotentialParams,
    graph: InteractionGraph,
    opts: DynOptions | None = None,
) -> float:
    """
    Reduced Hamiltonian after maximization over controls.

    ``sum_i [<mu_i, e0> + (m1_i)^2 / 4 + (m2_i)^2 / 2 - U_ext(alpha_i)] - sum_{i<j} U_ij``,
    or with the combined potential in place of the barriers.
    """
    opts = DynOptions() if opts is None else opts
    return _Field(params, graph, opts).hamiltonian(state.array)


def rhs(
    state: SystemState,
    params: PotentialParams,
    graph: InteractionGraph,
    opts: DynOptions | None = None,
) -> StateDerivative:
    """
    Evaluates the extremal vector field.

    Raises:
        SingularityError: if a barrier is at or inside its pole
    """
    opts = DynOptions() if opts is None else opts
    return _Field(params, graph, opts)(np.array(state.array))


def step(
    state: SystemState,
    params: PotentialParams,
    graph: InteractionGraph,
    opts: DynOptions | None = None,
) -> SystemState:
    """
    Advances the state by one step of ``opts.dt``.
    """
    opts = DynOptions() if opts is None else opts
    out = _Field(params, graph, opts).step(np.array(state.array))
    return SystemState.from_array(out, state.t + opts.dt)


def diagnostics(
    state: SystemState,
    params: PotentialParams,
    graph: InteractionGraph,
    opts: DynOptions | None = None,
) -> Diagnostics:
    opts = DynOptions() if opts is None else opts
    return _Field(params, graph, opts).diagnostics(state.array)


def relative_poses(state: SystemState, graph: InteractionGraph) -> dict[tuple[int, int], Pose2]:
    """
    ``g_i^-1 g_j`` for every edge ``(i, j)``, ``i < j``: the reduced configuration.
    """
    g = state.array[:, POSE]
    return {
        (i, j): Pose2.from_array(Se2.compose(Se2.inverse(g[i]), g[j])) for i, j in graph.sorted_edges
    }


def integrate(
    initial: SystemState,
    params: PotentialParams,
    graph: InteractionGraph,
    opts: DynOptions | None = None,
    n_steps: int = 0,
    *,
    endpoints_only: bool = False,
) -> Trajectory:
    """
    Runs ``n_steps`` fixed steps from ``initial``.

    Samples every ``opts.record_every`` steps plus the final step, or only the first and last
    samples if ``endpoints_only``.

    Raises:
        SingularityError: on approaching a pole; its ``trajectory`` holds the samples recorded so far
    """
    opts = DynOptions() if opts is None else opts
    if n_steps < 0:
        msg = f"n_steps must be non-negative, not {n_steps}"
        raise InvalidParameterError(msg)
    field = _Field(params, graph, opts)
    if not endpoints_only:
        _warn_printed(opts)
    every = n_steps if endpoints_only else opts.record_every
    times, states, controls, diags = [], [], [], []

    def record(k: int, arr: FloatArray) -> None:
        diag = field.diagnostics(arr)
        times.append(initial.t + k * opts.dt)
        states.append(arr.copy())
        controls.append(_velocity(arr[:, MU], opts))
        diags.append(diag)

    def partial() -> Trajectory | None:
        if not states:
            return None
        return Trajectory.from_samples(times, states, controls, diags, aborted=True)

    arr = np.array(initial.array)
    logger.debug(f"Integrating {initial.n_agents} agents, {n_steps} steps ({opts.mode.name}, {opts.integrator.name})")
    try:
        record(0, arr)
        for k in range(1, n_steps + 1):
            arr = field.step(arr)
            if not np.all(np.isfinite(arr)):
                msg = f"State became non-finite at step {k}"
                raise SingularityError(msg, kind="state", agents=(), margin=math.nan)
            if k == n_steps or (every > 0 and k % every == 0):
                record(k, arr)
    except SingularityError as e:
        e.trajectory = partial()
        logger.debug(f"Integration aborted after {len(states)} samples: {e}")
        raise
    return Trajectory.from_samples(times, states, controls, diags)


__all__ = [
    "DynOptions",
    "DynamicsMode",
    "Integrator",
    "PotentialModel",
    "StateDerivative",
    "diagnostics",
    "hamiltonian",
    "integrate",
    "pmp_controls",
    "relative_poses",
    "rhs",
    "step",
]
