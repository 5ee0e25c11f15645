# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Undirected interaction graph between agents.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from lieswarm._error import InvalidParameterError

if TYPE_CHECKING:
    from collections.abc import Iterable

    from numpy.typing import NDArray


@dataclass(frozen=True, repr=True)
class InteractionGraph:
    """
    A static undirected graph on agents ``0 .. n_agents - 1``.

    Attributes:
        n_agents: number of vertices
        edges: undirected edges, each stored as ``(i, j)`` with ``i < j``
    """

    n_agents: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n_agents < 1:
            msg = f"A graph needs at least one agent, not {self.n_agents}"
            raise InvalidParameterError(msg)
        for i, j in self.edges:
            if i == j:
                msg = f"Self-loop on agent {i}"
                raise InvalidParameterError(msg)
            if not (0 <= i < j < self.n_agents):
                msg = f"Edge ({i}, {j}) is not normalized or is out of range for {self.n_agents} agents"
                raise InvalidParameterError(msg)

    @classmethod
    def of(cls, n_agents: int, edges: Iterable[tuple[int, int]] = ()) -> InteractionGraph:
        """
        Builds a graph from edges in any orientation; duplicates collapse.
        """
        normalized = set()
        for i, j in edges:
            if i == j:
                msg = f"Self-loop on agent {i}"
                raise InvalidParameterError(msg)
            normalized.add((min(i, j), max(i, j)))
        return cls(n_agents, frozenset(normalized))

    @classmethod
    def complete(cls, n_agents: int) -> InteractionGraph:
        return cls.of(n_agents, [(i, j) for i in range(n_agents) for j in range(i + 1, n_agents)])

    @classmethod
    def empty(cls, n_agents: int) -> InteractionGraph:
        return cls(n_agents, frozenset())

    @cached_property
    def adjacency(self) -> NDArray[np.float64]:
        adj = np.zeros((self.n_agents, self.n_agents))
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = 1.0
        adj.setflags(write=False)
        return adj

    @cached_property
    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adjacency[i])]

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    @cached_property
    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in self.neighbors(i):
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return len(seen) == self.n_agents


__all__ = ["InteractionGraph"]
