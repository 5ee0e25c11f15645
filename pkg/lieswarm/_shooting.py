# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Single shooting for the two-point boundary value problem on initial costates.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lieswarm._dynamics import DynOptions, integrate
from lieswarm._error import InfeasibleShotError, InvalidParameterError, NonConvergenceError, SingularityError
from lieswarm._graph import InteractionGraph
from lieswarm._model import POSE, SystemState, Trajectory
from lieswarm._potentials import PotentialParams
from lieswarm._se2 import METRIC, Momentum, Pose2, Se2
from lieswarm._setup import logger

FloatArray = NDArray[np.float64]

# damped trials per iteration before giving up on the iterate
_MAX_TRIALS = 24


@dataclass(frozen=True, repr=True)
class BoundaryData:
    """
    Boundary poses and horizon.

    Attributes:
        g0: initial poses
        gT: target poses at time ``T``
        T: horizon (seconds)
    """

    g0: tuple[Pose2, ...]
    gT: tuple[Pose2, ...]
    T: float

    def __post_init__(self):
        object.__setattr__(self, "g0", tuple(self.g0))
        object.__setattr__(self, "gT", tuple(self.gT))
        if len(self.g0) == 0:
            msg = "Boundary data needs at least one agent"
            raise InvalidParameterError(msg)
        if len(self.g0) != len(self.gT):
            msg = f"{len(self.g0)} initial poses but {len(self.gT)} targets"
            raise InvalidParameterError(msg)
        if not (math.isfinite(self.T) and self.T > 0):
            msg = f"Horizon T must be positive, not {self.T}"
            raise InvalidParameterError(msg)

    @property
    def n_agents(self) -> int:
        return len(self.g0)

    def n_steps(self, dt: float) -> int:
        n = round(self.T / dt)
        if n < 1 or abs(n * dt - self.T) > 1e-9 * max(1.0, self.T):
            msg = f"Horizon {self.T} is not a whole number of steps of {dt}"
            raise InvalidParameterError(msg)
        return n


@dataclass(frozen=True, repr=True)
class ShootOptions:
    """
    Levenberg-Marquardt settings.

    Attributes:
        tol: residual norm at which the solve stops
        max_iter: iteration cap
        fd_step: relative forward-difference step, scaled by ``max(1, |mu0_k|)``
        damping0: initial damping
        dyn: forwarded integration options
        workers: threads used for Jacobian columns
    """

    tol: float = 1e-8
    max_iter: int = 50
    fd_step: float = 1e-6
    damping0: float = 1e-3
    dyn: DynOptions = dataclasses.field(default_factory=DynOptions)
    workers: int = 1

    def __post_init__(self):
        if not self.tol > 0:
            msg = f"tol must be positive, not {self.tol}"
            raise InvalidParameterError(msg)
        if not self.fd_step > 0:
            msg = f"fd_step must be positive, not {self.fd_step}"
            raise InvalidParameterError(msg)
        if not self.damping0 > 0:
            msg = f"damping0 must be positive, not {self.damping0}"
            raise InvalidParameterError(msg)
        if self.max_iter < 0 or self.workers < 1:
            msg = f"Need max_iter >= 0 and workers >= 1 (got {self.max_iter}, {self.workers})"
            raise InvalidParameterError(msg)

    def copy(self, **kwargs) -> ShootOptions:
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True, repr=True)
class IterationRecord:
    iteration: int
    residual_norm: float
    damping: float


@dataclass(frozen=True, repr=True)
class ShootResult:
    """
    Outcome of a shooting solve.

    Attributes:
        mu0_star: best initial costates found
        iterations: accepted or attempted iterations
        residual_norm: Euclidean norm of the residual at ``mu0_star``
        trajectory: the flow from ``mu0_star``, recorded per ``opts.dyn.record_every``
        converged: ``residual_norm <= tol``
        history: one record per iteration, starting with the initial guess
    """

    mu0_star: tuple[Momentum, ...]
    iterations: int
    residual_norm: float
    trajectory: Trajectory | None
    converged: bool
    history: tuple[IterationRecord, ...] = ()


def _flat(mu0: Sequence[Momentum] | ArrayLike) -> FloatArray:
    if len(mu0) > 0 and isinstance(mu0[0], Momentum):
        return np.concatenate([m.array for m in mu0])
    return np.asarray(mu0, dtype=np.float64).ravel()


def _unflat(x: FloatArray) -> tuple[Momentum, ...]:
    return tuple(Momentum.from_array(row) for row in x.reshape(-1, 3))


class _Shooter:
    def __init__(
        self,
        boundary: BoundaryData,
        params: PotentialParams,
        graph: InteractionGraph,
        opts: ShootOptions,
    ) -> None:
        self.boundary = boundary
        self.params = params
        self.graph = graph
        self.opts = opts
        self.n_steps = boundary.n_steps(opts.dyn.dt)
        self.target_inv = Se2.inverse(np.stack([g.array for g in boundary.gT]))

    def initial(self, x: FloatArray) -> SystemState:
        return SystemState.of(self.boundary.g0, _unflat(x), self.params.alpha0)

    def flow(self, x: FloatArray, *, endpoints_only: bool) -> Trajectory:
        return integrate(
            self.initial(x), self.params, self.graph, self.opts.dyn, self.n_steps, endpoints_only=endpoints_only
        )

    def residual(self, x: FloatArray) -> FloatArray:
        final = self.flow(x, endpoints_only=True).states[-1][:, POSE]
        return Se2.log(Se2.compose(self.target_inv, final)).ravel()

    def jacobian(self, x: FloatArray, r: FloatArray) -> FloatArray:
        steps = self.opts.fd_step * np.maximum(1.0, np.abs(x))

        def column(k: int) -> FloatArray:
            shifted = x.copy()
            shifted[k] += steps[k]
            try:
                return (self.residual(shifted) - r) / steps[k]
            except SingularityError:
                shifted[k] = x[k] - steps[k]
                return (r - self.residual(shifted)) / steps[k]

        if self.opts.workers > 1:
            with ThreadPoolExecutor(max_workers=self.opts.workers) as pool:
                cols = list(pool.map(column, range(len(x))))
        else:
            cols = [column(k) for k in range(len(x))]
        return np.stack(cols, axis=1)

    def result(self, x: FloatArray, norm: float, iterations: int, history: list[IterationRecord]) -> ShootResult:
        try:
            trajectory = self.flow(x, endpoints_only=False)
        except SingularityError as e:
            trajectory = e.trajectory
        return ShootResult(
            mu0_star=_unflat(x),
            iterations=iterations,
            residual_norm=norm,
            trajectory=trajectory,
            converged=norm <= self.opts.tol,
            history=tuple(history),
        )


def residual(
    mu0_stack: Sequence[Momentum],
    boundary: BoundaryData,
    params: PotentialParams,
    graph: InteractionGraph,
    opts: ShootOptions | None = None,
) -> FloatArray:
    """
    Concatenated ``log(gT_i^-1 g_i(T))`` over agents, a vector of ``3 s`` numbers.

    Raises:
        SingularityError: if the forward flow from ``mu0_stack`` reaches a pole
    """
    opts = ShootOptions() if opts is None else opts
    return _Shooter(boundary, params, graph, opts).residual(_flat(mu0_stack))


def solve_shooting(
    guess: Sequence[Momentum],
    boundary: BoundaryData,
    params: PotentialParams,
    graph: InteractionGraph,
    opts: ShootOptions | None = None,
) -> ShootResult:
    """
    Levenberg-Marquardt on the shooting residual with a forward-difference Jacobian.

    Damping starts at ``opts.damping0``, is multiplied by 4 after a rejected trial and divided by 4
    after an accepted one; a trial that reaches a singularity counts as rejected.

    Raises:
        InfeasibleShotError: if the first shot, a Jacobian column in both directions,
            or every trial of an iteration hits a singularity
        NonConvergenceError: on stagnation or after ``max_iter`` iterations; holds the best result
    """
    opts = ShootOptions() if opts is None else opts
    if len(guess) != boundary.n_agents:
        msg = f"Guess has {len(guess)} costates for {boundary.n_agents} agents"
        raise InvalidParameterError(msg)
    shooter = _Shooter(boundary, params, graph, opts)
    x = _flat(guess)
    try:
        r = shooter.residual(x)
    except SingularityError as e:
        msg = f"The initial guess runs into a singularity: {e}"
        raise InfeasibleShotError(msg) from e
    norm = float(np.linalg.norm(r))
    damping = opts.damping0
    history = [IterationRecord(0, norm, damping)]
    logger.debug(f"Shooting: initial residual {norm:.3e}")
    iterations = 0
    while norm > opts.tol and iterations < opts.max_iter:
        iterations += 1
        try:
            jac = shooter.jacobian(x, r)
        except SingularityError as e:
            msg = f"Both difference directions of iteration {iterations} hit a singularity: {e}"
            raise InfeasibleShotError(msg) from e
        normal = jac.T @ jac
        grad = jac.T @ r
        accepted, feasible = False, False
        for _ in range(_MAX_TRIALS):
            delta = np.linalg.solve(normal + damping * np.eye(len(x)), -grad)
            try:
                r_new = shooter.residual(x + delta)
            except SingularityError:
                damping *= 4
                continue
            feasible = True
            norm_new = float(np.linalg.norm(r_new))
            if norm_new < norm:
                x, r, norm = x + delta, r_new, norm_new
                damping /= 4
                accepted = True
                break
            damping *= 4
        history.append(IterationRecord(iterations, norm, damping))
        logger.debug(f"Shooting iteration {iterations}: residual {norm:.3e}, damping {damping:.3e}")
        if not accepted:
            if not feasible:
                msg = f"Every damped step of iteration {iterations} hit a singularity"
                raise InfeasibleShotError(msg)
            best = shooter.result(x, norm, iterations, history)
            msg = f"Shooting stagnated at residual {norm:.3e} after {iterations} iterations"
            raise NonConvergenceError(msg, result=best)
    result = shooter.result(x, norm, iterations, history)
    if not result.converged:
        msg = f"Shooting did not reach tol {opts.tol:.1e} in {opts.max_iter} iterations (residual {norm:.3e})"
        raise NonConvergenceError(msg, result=result)
    logger.info(f"Shooting converged in {iterations} iterations; residual {norm:.3e}")
    return result


def costates_from_velocities(velocities: Sequence[ArrayLike], opts: DynOptions | None = None) -> list[Momentum]:
    """
    Inverts the control law on the actuated directions, ``mu_k = w_k u_k``; unactuated components are 0.

    For the unicycle, ``(u1, u2)`` maps to ``(2 u1, u2, 0)``.
    """
    opts = DynOptions() if opts is None else opts
    out = []
    for u in velocities:
        u = np.asarray(u, dtype=np.float64)
        padded = np.zeros(3)
        padded[: len(u)] = u
        out.append(Momentum.from_array(opts.control_mask * METRIC * padded))
    return out


def ivp_run(
    u0: Sequence[ArrayLike],
    g0: Sequence[Pose2],
    params: PotentialParams,
    graph: InteractionGraph,
    opts: DynOptions | None = None,
    n_steps: int = 0,
) -> Trajectory:
    """
    Forward run from initial velocities, as used to replay the published experiment.
    """
    opts = DynOptions() if opts is None else opts
    costates = costates_from_velocities(u0, opts)
    initial = SystemState.of(g0, costates, params.alpha0)
    logger.info(f"Running {len(g0)} agents for {n_steps} steps of {opts.dt} ({opts.mode.name}, {opts.integrator.name})")
    trajectory = integrate(initial, params, graph, opts, n_steps)
    logger.info(f"Finished at t = {trajectory.times[-1]:.6g}")
    return trajectory


__all__ = [
    "BoundaryData",
    "IterationRecord",
    "ShootOptions",
    "ShootResult",
    "costates_from_velocities",
    "ivp_run",
    "residual",
    "solve_shooting",
]
