# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Scenario files: JSON ingestion, validation and conversion to solver inputs.
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path
from typing import Any

import numpy as np

from lieswarm._dynamics import DynamicsMode, DynOptions, Integrator, PotentialModel
from lieswarm._error import InvalidParameterError, ScenarioParseError, ScenarioValidationError
from lieswarm._global import LieswarmGlobals
from lieswarm._graph import InteractionGraph
from lieswarm._model import SystemState
from lieswarm._potentials import PotentialParams
from lieswarm._se2 import Momentum, Pose2
from lieswarm._shooting import BoundaryData, costates_from_velocities
from lieswarm._setup import logger

PAPER_FIXTURE = "paper_three_unicycles.json"


def _numbers(value: Any, n: int, what: str) -> tuple[float, ...]:
    if (
        not isinstance(value, Sequence)
        or isinstance(value, str)
        or len(value) != n
        or not all(isinstance(v, int | float) and not isinstance(v, bool) for v in value)
    ):
        msg = f"{what} must be a list of {n} numbers, not {value!r}"
        raise ScenarioValidationError(msg)
    out = tuple(float(v) for v in value)
    if not all(math.isfinite(v) for v in out):
        msg = f"{what} must be finite, not {value!r}"
        raise ScenarioValidationError(msg)
    return out


def _number(value: Any, what: str) -> float:
    return _numbers([value], 1, what)[0]


@dataclass(frozen=True, repr=True)
class AgentSpec:
    """
    One agent entry.

    Attributes:
        id: identifier used by the graph and weight maps
        g0: initial pose ``(theta, x, y)``
        u0: initial velocities ``(u1, u2)``, or None
        mu0: initial costate, or None
        gT: target pose for shooting, or None
    """

    id: str
    g0: Pose2
    u0: tuple[float, ...] | None = None
    mu0: Momentum | None = None
    gT: Pose2 | None = None

    @classmethod
    def from_json(cls, obj: Any, index: int) -> AgentSpec:
        if not isinstance(obj, Mapping):
            msg = f"agents[{index}] must be an object"
            raise ScenarioValidationError(msg)
        if "id" not in obj or "g0" not in obj:
            msg = f"agents[{index}] needs 'id' and 'g0'"
            raise ScenarioValidationError(msg)
        unknown = set(obj) - {"id", "g0", "u0", "mu0", "gT"}
        if unknown:
            msg = f"agents[{index}] has unknown keys {sorted(unknown)}"
            raise ScenarioValidationError(msg)
        aid = str(obj["id"])
        if "u0" in obj and "mu0" in obj:
            msg = f"agent {aid} gives both u0 and mu0; exactly one is allowed"
            raise ScenarioValidationError(msg)
        return cls(
            id=aid,
            g0=Pose2(*_numbers(obj["g0"], 3, f"agent {aid} g0")),
            u0=_numbers(obj["u0"], 2, f"agent {aid} u0") if "u0" in obj else None,
            mu0=Momentum(*_numbers(obj["mu0"], 3, f"agent {aid} mu0")) if "mu0" in obj else None,
            gT=Pose2(*_numbers(obj["gT"], 3, f"agent {aid} gT")) if "gT" in obj else None,
        )


@dataclass(frozen=True, repr=True)
class ScenarioFile:
    """
    A validated scenario.

    Attributes:
        agents: agent entries in file order
        edges: undirected edges as index pairs ``(i, j)``, ``i < j``
        sigma_pair: weight per edge
        sigma_obs: obstacle weight per agent
        r_bar: agent radius
        obstacle_center: centre of the unit obstacle
        horizon_T: horizon in seconds
        dt: step size
        n_steps: number of steps
        mode: dynamics mode
        integrator: integration scheme
        potential: separate or combined potential
        record_every: sampling stride of written trajectories
        notes: free-text remarks carried by the file
    """

    agents: tuple[AgentSpec, ...]
    edges: tuple[tuple[int, int], ...]
    sigma_pair: Mapping[tuple[int, int], float]
    sigma_obs: tuple[float, ...]
    r_bar: float
    obstacle_center: tuple[float, float]
    horizon_T: float
    dt: float
    n_steps: int
    mode: DynamicsMode = DynamicsMode.first_principles
    integrator: Integrator = Integrator.rk4
    potential: PotentialModel = PotentialModel.separate
    record_every: int = 1
    notes: tuple[str, ...] = ()

    def copy(self, **kwargs) -> ScenarioFile:
        return dataclasses.replace(self, **kwargs)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def ids(self) -> list[str]:
        return [a.id for a in self.agents]

    @property
    def graph(self) -> InteractionGraph:
        return InteractionGraph.of(self.n_agents, self.edges)

    @property
    def params(self) -> PotentialParams:
        pair = np.zeros((self.n_agents, self.n_agents))
        for (i, j), w in self.sigma_pair.items():
            pair[i, j] = pair[j, i] = w
        return PotentialParams(pair, np.array(self.sigma_obs), self.r_bar, self.obstacle_center)

    def dyn_options(self, **overrides) -> DynOptions:
        kwargs = {
            "mode": self.mode,
            "integrator": self.integrator,
            "dt": self.dt,
            "potential": self.potential,
            "record_every": self.record_every,
        }
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return DynOptions(**kwargs)
        except InvalidParameterError as e:
            raise ScenarioValidationError(str(e)) from e

    def initial_costates(self, opts: DynOptions | None = None) -> list[Momentum]:
        """
        Costates from ``mu0``, or from ``u0`` through the inverse control law; missing entries are zero.
        """
        out = []
        for a in self.agents:
            if a.mu0 is not None:
                out.append(a.mu0)
            elif a.u0 is not None:
                out.extend(costates_from_velocities([a.u0], opts))
            else:
                out.append(Momentum.zero())
        return out

    def initial_state(self, opts: DynOptions | None = None) -> SystemState:
        self.require_simulate()
        return SystemState.of([a.g0 for a in self.agents], self.initial_costates(opts), self.params.alpha0)

    def boundary(self) -> BoundaryData:
        self.require_shoot()
        return BoundaryData(tuple(a.g0 for a in self.agents), tuple(a.gT for a in self.agents), self.horizon_T)

    def require_simulate(self) -> None:
        for a in self.agents:
            if a.u0 is None and a.mu0 is None:
                msg = f"agent {a.id} needs exactly one of u0 or mu0 to simulate"
                raise ScenarioValidationError(msg)

    def require_shoot(self) -> None:
        missing = [a.id for a in self.agents if a.gT is None]
        if missing:
            msg = f"agents {','.join(missing)} have no gT target to shoot for"
            raise ScenarioValidationError(msg)


class _ScenarioReader:
    def __init__(self, data: Any, source: str) -> None:
        if not isinstance(data, Mapping):
            msg = f"{source}: a scenario must be a JSON object"
            raise ScenarioValidationError(msg)
        self.data = data
        self.source = source

    def read(self) -> ScenarioFile:
        data = self.data
        unknown = set(data) - {
            "agents",
            "graph",
            "sigma_pair",
            "sigma_obs",
            "r_bar",
            "obstacle",
            "horizon_T",
            "dt",
            "n_steps",
            "mode",
            "integrator",
            "potential",
            "record_every",
            "notes",
        }
        if unknown:
            msg = f"unknown keys {sorted(unknown)}"
            raise ScenarioValidationError(msg)
        raw_agents = data.get("agents")
        if not isinstance(raw_agents, list) or len(raw_agents) == 0:
            msg = "'agents' must be a non-empty list"
            raise ScenarioValidationError(msg)
        agents = tuple(AgentSpec.from_json(a, k) for k, a in enumerate(raw_agents))
        index = {}
        for k, a in enumerate(agents):
            if a.id in index:
                msg = f"duplicate agent id {a.id}"
                raise ScenarioValidationError(msg)
            index[a.id] = k
        edges = self._edges(data.get("graph", []), index)
        graph = InteractionGraph.of(len(agents), edges)
        if not graph.is_connected:
            msg = "graph not connected"
            raise ScenarioValidationError(msg)
        sigma_pair = self._sigma_pair(data.get("sigma_pair", LieswarmGlobals.DEFAULT_SIGMA), index, graph)
        sigma_obs = self._sigma_obs(data.get("sigma_obs", LieswarmGlobals.DEFAULT_SIGMA), agents, index)
        r_bar = _number(data.get("r_bar", 1.0), "r_bar")
        if r_bar <= 0:
            msg = f"r_bar must be positive, not {r_bar}"
            raise ScenarioValidationError(msg)
        center = self._obstacle(data.get("obstacle", {}))
        dt, n_steps, horizon = self._timing(data)
        scenario = ScenarioFile(
            agents=agents,
            edges=tuple(graph.sorted_edges),
            sigma_pair=sigma_pair,
            sigma_obs=sigma_obs,
            r_bar=r_bar,
            obstacle_center=center,
            horizon_T=horizon,
            dt=dt,
            n_steps=n_steps,
            mode=self._enum(DynamicsMode, data.get("mode", "first_principles")),
            integrator=self._enum(Integrator, data.get("integrator", "rk4")),
            potential=self._enum(PotentialModel, data.get("potential", "separate")),
            record_every=self._record_every(data.get("record_every", 1)),
            notes=tuple(str(n) for n in data.get("notes", [])),
        )
        scenario.dyn_options()
        self._check_feasible(scenario)
        return scenario

    def _edges(self, raw: Any, index: Mapping[str, int]) -> list[tuple[int, int]]:
        if raw == "complete":
            n = len(index)
            return [(i, j) for i in range(n) for j in range(i + 1, n)]
        if not isinstance(raw, list):
            msg = "'graph' must be a list of id pairs or \"complete\""
            raise ScenarioValidationError(msg)
        edges = []
        for pair in raw:
            i, j = self._pair(pair, index)
            if i == j:
                msg = f"self-loop on agent {pair[0]}"
                raise ScenarioValidationError(msg)
            edges.append((min(i, j), max(i, j)))
        return edges

    def _pair(self, pair: Any, index: Mapping[str, int]) -> tuple[int, int]:
        if not isinstance(pair, list | tuple) or len(pair) != 2:
            msg = f"edge {pair!r} must be a pair of agent ids"
            raise ScenarioValidationError(msg)
        a, b = str(pair[0]), str(pair[1])
        for aid in (a, b):
            if aid not in index:
                msg = f"edge {pair!r} names unknown agent {aid}"
                raise ScenarioValidationError(msg)
        return index[a], index[b]

    def _sigma_pair(
        self, raw: Any, index: Mapping[str, int], graph: InteractionGraph
    ) -> dict[tuple[int, int], float]:
        if not isinstance(raw, Mapping):
            w = _number(raw, "sigma_pair")
            if w < 0:
                msg = f"sigma_pair must be nonnegative, not {w}"
                raise ScenarioValidationError(msg)
            return {e: w for e in graph.sorted_edges}
        out = {e: LieswarmGlobals.DEFAULT_SIGMA for e in graph.sorted_edges}
        given: dict[tuple[int, int], float] = {}
        for key, value in raw.items():
            parts = [p.strip() for p in str(key).split(",")]
            i, j = self._pair(parts, index)
            w = _number(value, f"sigma_pair[{key}]")
            if w < 0:
                msg = f"sigma_pair[{key}] must be nonnegative, not {w}"
                raise ScenarioValidationError(msg)
            edge = (min(i, j), max(i, j))
            if not graph.has_edge(*edge):
                msg = f"sigma_pair names {key}, which is not an edge of the graph"
                raise ScenarioValidationError(msg)
            if edge in given and given[edge] != w:
                msg = f"sigma_pair is not symmetric: {key} disagrees with its reverse"
                raise ScenarioValidationError(msg)
            given[edge] = w
        out.update(given)
        return out

    def _sigma_obs(self, raw: Any, agents: Sequence[AgentSpec], index: Mapping[str, int]) -> tuple[float, ...]:
        if isinstance(raw, Mapping):
            out = [LieswarmGlobals.DEFAULT_SIGMA] * len(agents)
            for key, value in raw.items():
                if str(key) not in index:
                    msg = f"sigma_obs names unknown agent {key}"
                    raise ScenarioValidationError(msg)
                out[index[str(key)]] = _number(value, f"sigma_obs[{key}]")
        else:
            out = [_number(raw, "sigma_obs")] * len(agents)
        if any(w < 0 for w in out):
            msg = "sigma_obs must be nonnegative"
            raise ScenarioValidationError(msg)
        return tuple(out)

    def _obstacle(self, raw: Any) -> tuple[float, float]:
        if not isinstance(raw, Mapping):
            msg = "'obstacle' must be an object"
            raise ScenarioValidationError(msg)
        if "radius" in raw and _number(raw["radius"], "obstacle radius") != 1.0:
            msg = "obstacle radius is fixed at 1"
            raise ScenarioValidationError(msg)
        cx, cy = _numbers(raw.get("center", [0.0, 0.0]), 2, "obstacle center")
        return cx, cy

    def _timing(self, data: Mapping[str, Any]) -> tuple[float, int, float]:
        if "dt" not in data:
            msg = "'dt' is required"
            raise ScenarioValidationError(msg)
        dt = _number(data["dt"], "dt")
        if dt <= 0:
            msg = f"dt must be positive, not {dt}"
            raise ScenarioValidationError(msg)
        horizon = _number(data["horizon_T"], "horizon_T") if "horizon_T" in data else None
        n_steps = data.get("n_steps")
        if n_steps is not None and (not isinstance(n_steps, int) or isinstance(n_steps, bool) or n_steps < 0):
            msg = f"n_steps must be a non-negative integer, not {n_steps!r}"
            raise ScenarioValidationError(msg)
        if horizon is None and n_steps is None:
            msg = "one of 'horizon_T' or 'n_steps' is required"
            raise ScenarioValidationError(msg)
        if horizon is None:
            horizon = dt * n_steps
        elif n_steps is None:
            n_steps = round(horizon / dt)
        if abs(dt * n_steps - horizon) > 1e-9:
            msg = f"dt * n_steps = {dt * n_steps} does not match horizon_T = {horizon}"
            raise ScenarioValidationError(msg)
        return dt, n_steps, horizon

    def _enum(self, enum_type, value: Any):
        try:
            return enum_type.of(str(value))
        except InvalidParameterError as e:
            raise ScenarioValidationError(str(e)) from e

    def _record_every(self, value: Any) -> int:
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            msg = f"record_every must be a positive integer, not {value!r}"
            raise ScenarioValidationError(msg)
        return value

    def _check_feasible(self, scenario: ScenarioFile) -> None:
        agents = scenario.agents
        for i in range(len(agents)):
            for j in range(i + 1, len(agents)):
                gi, gj = agents[i].g0, agents[j].g0
                if math.hypot(gi.x - gj.x, gi.y - gj.y) <= 2 * scenario.r_bar:
                    msg = f"agents {agents[i].id},{agents[j].id} initially in contact"
                    raise ScenarioValidationError(msg)
        cx, cy = scenario.obstacle_center
        for a in agents:
            if (a.g0.x - cx) ** 2 + (a.g0.y - cy) ** 2 <= (scenario.r_bar + 1) ** 2:
                msg = f"agent {a.id} initially within the obstacle clearance"
                raise ScenarioValidationError(msg)


def parse_scenario(text: str, source: str = "<string>") -> ScenarioFile:
    """
    Parses and validates scenario JSON text.

    Raises:
        ScenarioParseError: if the text is not JSON; the message has the line and column
        ScenarioValidationError: if an invariant is violated; the message names it
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        msg = f"{source}: line {e.lineno}, column {e.colno}: {e.msg}"
        raise ScenarioParseError(msg) from e
    try:
        return _ScenarioReader(data, source).read()
    except ScenarioValidationError as e:
        msg = f"{source}: {e}"
        raise ScenarioValidationError(msg) from e


def load_scenario(path: Path | str) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf8")
    except OSError as e:
        msg = f"Cannot read scenario {path}: {e.strerror}"
        raise ScenarioParseError(msg) from e
    scenario = parse_scenario(text, str(path))
    logger.debug(f"Loaded scenario {path} with {scenario.n_agents} agents")
    return scenario


def load_paper_fixture() -> ScenarioFile:
    """
    The bundled three-unicycle experiment; its reinterpretations are logged as warnings.
    """
    text = files("lieswarm").joinpath("resources").joinpath(PAPER_FIXTURE).read_text(encoding="utf8")
    scenario = parse_scenario(text, PAPER_FIXTURE)
    for note in scenario.notes:
        logger.warning(f"{PAPER_FIXTURE}: {note}")
    return scenario


__all__ = [
    "PAPER_FIXTURE",
    "AgentSpec",
    "ScenarioFile",
    "load_paper_fixture",
    "load_scenario",
    "parse_scenario",
]
