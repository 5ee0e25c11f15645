# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Model classes for lieswarm.

States of the reduced system ``(g, mu, alpha)`` per agent, diagnostics and recorded trajectories.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lieswarm._error import InvalidParameterError
from lieswarm._se2 import Momentum, Pose2, Se2, Twist

FloatArray = NDArray[np.float64]

# column layout of a packed agent row
POSE = slice(0, 3)
MU = slice(3, 6)
ALPHA = slice(6, 9)
N_COLUMNS = 9


@dataclass(frozen=True, repr=True)
class AgentState:
    """
    State of one agent.

    Attributes:
        g: pose
        mu: body-frame costate
        alpha: advected obstacle parameter, ``Ad_{g^-1} alpha0`` along exact flows
    """

    g: Pose2
    mu: Momentum
    alpha: Twist

    @classmethod
    def of(cls, g: Pose2, mu: Momentum, alpha0: Twist | None = None) -> AgentState:
        """
        Starts an agent with its parameter transported from ``alpha0`` (default ``e1``).
        """
        alpha0 = Twist.basis(1) if alpha0 is None else alpha0
        return cls(g, mu, g.inverse().adjoint(alpha0))

    @classmethod
    def from_array(cls, row: ArrayLike) -> AgentState:
        row = np.asarray(row, dtype=np.float64)
        return cls(Pose2.from_array(row[POSE]), Momentum.from_array(row[MU]), Twist.from_array(row[ALPHA]))

    def copy(self, **kwargs) -> AgentState:
        return dataclasses.replace(self, **kwargs)

    @cached_property
    def array(self) -> FloatArray:
        return np.concatenate([self.g.array, self.mu.array, self.alpha.array])


@dataclass(frozen=True, repr=True)
class SystemState:
    """
    Stacked state of all ``s`` agents at time ``t``.
    """

    agents: tuple[AgentState, ...]
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if len(self.agents) == 0:
            msg = "A system needs at least one agent"
            raise InvalidParameterError(msg)

    @classmethod
    def of(
        cls,
        poses: Sequence[Pose2],
        costates: Sequence[Momentum],
        alpha0: Twist | None = None,
        t: float = 0.0,
    ) -> SystemState:
        if len(poses) != len(costates):
            msg = f"{len(poses)} poses but {len(costates)} costates"
            raise InvalidParameterError(msg)
        return cls(tuple(AgentState.of(g, mu, alpha0) for g, mu in zip(poses, costates, strict=True)), t)

    @classmethod
    def from_array(cls, arr: ArrayLike, t: float = 0.0) -> SystemState:
        arr = np.asarray(arr, dtype=np.float64).reshape(-1, N_COLUMNS)
        return cls(tuple(AgentState.from_array(row) for row in arr), float(t))

    def copy(self, **kwargs) -> SystemState:
        return dataclasses.replace(self, **kwargs)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @cached_property
    def array(self) -> FloatArray:
        arr = np.stack([a.array for a in self.agents])
        arr.setflags(write=False)
        return arr

    @property
    def poses(self) -> list[Pose2]:
        return [a.g for a in self.agents]

    @property
    def costates(self) -> list[Momentum]:
        return [a.mu for a in self.agents]

    @property
    def alphas(self) -> list[Twist]:
        return [a.alpha for a in self.agents]


@dataclass(frozen=True, repr=True)
class Diagnostics:
    """
    Readouts of a state.

    Attributes:
        h: reduced Hamiltonian
        min_pair_dist: smallest centre distance over all agent pairs (inf for one agent)
        min_obs_clearance: smallest distance of an agent centre from the obstacle centre
        casimir: per-agent ``(mu2)^2 + (mu3)^2``
    """

    h: float
    min_pair_dist: float
    min_obs_clearance: float
    casimir: tuple[float, ...]


@dataclass(frozen=True, repr=True)
class Summary:
    final_poses: tuple[Pose2, ...]
    h_drift: float
    min_pair_dist: float
    min_obs_clearance: float
    n_samples: int
    t_final: float
    aborted: bool


@dataclass(frozen=True, repr=True, eq=False)
class Trajectory:
    """
    Recorded samples of a run.

    Attributes:
        times: sample times, strictly increasing, shape ``(n,)``
        states: packed states, shape ``(n, s, 9)``
        controls: body velocities applied at each sample, shape ``(n, s, 3)``
        h: reduced Hamiltonian per sample
        min_pair_dist: per sample
        min_obs_clearance: per sample
        aborted: True if the run stopped at a singularity
    """

    times: FloatArray
    states: FloatArray
    controls: FloatArray
    h: FloatArray
    min_pair_dist: FloatArray
    min_obs_clearance: FloatArray
    aborted: bool = False

    def __post_init__(self):
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            msg = "Trajectory times are not strictly increasing"
            raise InvalidParameterError(msg)

    @classmethod
    def from_samples(
        cls,
        times: Sequence[float],
        states: Sequence[FloatArray],
        controls: Sequence[FloatArray],
        diagnostics: Sequence[Diagnostics],
        *,
        aborted: bool = False,
    ) -> Trajectory:
        n_agents = len(states[0]) if states else 0
        return cls(
            times=np.asarray(times, dtype=np.float64),
            states=np.asarray(states, dtype=np.float64).reshape(len(states), n_agents, N_COLUMNS),
            controls=np.asarray(controls, dtype=np.float64).reshape(len(controls), n_agents, 3),
            h=np.asarray([d.h for d in diagnostics], dtype=np.float64),
            min_pair_dist=np.asarray([d.min_pair_dist for d in diagnostics], dtype=np.float64),
            min_obs_clearance=np.asarray([d.min_obs_clearance for d in diagnostics], dtype=np.float64),
            aborted=aborted,
        )

    def copy(self, **kwargs) -> Trajectory:
        return dataclasses.replace(self, **kwargs)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_agents(self) -> int:
        return self.states.shape[1]

    def state(self, k: int) -> SystemState:
        return SystemState.from_array(self.states[k], float(self.times[k]))

    @property
    def final(self) -> SystemState:
        return self.state(-1)

    @property
    def initial(self) -> SystemState:
        return self.state(0)

    @property
    def h_drift(self) -> float:
        """
        ``max_t |h(t) - h(0)| / max(1, |h(0)|)``.
        """
        if len(self.h) == 0:
            return 0.0
        return float(np.max(np.abs(self.h - self.h[0])) / max(1.0, abs(self.h[0])))

    def alpha_error(self, alpha0: Twist | None = None) -> float:
        """
        ``max_t |alpha_i(t) - Ad_{g_i(t)^-1} alpha0|`` over all agents, Euclidean in coordinates.
        """
        alpha0 = Twist.basis(1) if alpha0 is None else alpha0
        exact = Se2.adjoint(Se2.inverse(self.states[..., POSE]), alpha0.array)
        return float(np.max(np.linalg.norm(self.states[..., ALPHA] - exact, axis=-1)))

    def summary(self) -> Summary:
        return Summary(
            final_poses=tuple(Pose2.from_array(row[POSE]) for row in self.states[-1]),
            h_drift=self.h_drift,
            min_pair_dist=float(np.min(self.min_pair_dist)),
            min_obs_clearance=float(np.min(self.min_obs_clearance)),
            n_samples=len(self),
            t_final=float(self.times[-1]),
            aborted=self.aborted,
        )


__all__ = [
    "ALPHA",
    "MU",
    "N_COLUMNS",
    "POSE",
    "AgentState",
    "Diagnostics",
    "Summary",
    "SystemState",
    "Trajectory",
]
