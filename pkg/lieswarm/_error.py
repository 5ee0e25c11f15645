# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Exception classes for lieswarm.

Also holds the stable exit-code contract used by the command-line interface.
"""

from __future__ import annotations

import enum
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Sequence


class ExitCode(enum.IntEnum):
    """
    Process exit codes; stable across versions.
    """

    SUCCESS = 0
    CHECK_FAILED = 1
    VALIDATION = 2
    SINGULARITY = 3
    NON_CONVERGENCE = 4
    PARSE = 5


class LieswarmError(Exception):
    """Any lieswarm-specific error."""

    exit_code: ExitCode = ExitCode.VALIDATION


class LieswarmValueError(LieswarmError, ValueError):
    """Any lieswarm-specific ValueError."""  # for convenience


class InvalidParameterError(LieswarmValueError):
    """
    Raised when a numeric option or parameter set is out of its domain.
    """


class SingularityError(LieswarmValueError):
    """
    Raised when a barrier potential is evaluated at or inside its pole.

    Attributes:
        kind: "pair", "obstacle" or "combined"
        agents: indices of the agents involved (one for an obstacle)
        margin: the offending denominator (at most the singularity guard)
        trajectory: the samples recorded before the abort, if raised by an integrator
    """

    exit_code = ExitCode.SINGULARITY

    def __init__(self, msg: str, *, kind: str, agents: Sequence[int], margin: float) -> None:
        super().__init__(msg)
        self.kind = kind
        self.agents = tuple(agents)
        self.margin = margin
        self.trajectory: Any = None


class InfeasibleShotError(LieswarmError):
    """
    Raised when every damped shooting step runs into a singularity.
    """

    exit_code = ExitCode.NON_CONVERGENCE


class NonConvergenceError(LieswarmError):
    """
    Raised when the shooting solver stops without meeting its tolerance.
    The best iterate is kept in ``result``.
    """

    exit_code = ExitCode.NON_CONVERGENCE

    def __init__(self, msg: str, *, result: Any = None) -> None:
        super().__init__(msg)
        self.result = result


class ScenarioParseError(LieswarmValueError):
    """
    Raised on failure to parse a scenario file.
    """

    exit_code = ExitCode.PARSE


class ScenarioValidationError(LieswarmValueError):
    """
    Raised when a scenario violates one of its invariants.
    """


class TrajectoryParseError(LieswarmValueError):
    """
    Raised when a trajectory CSV is empty or malformed.
    """

    exit_code = ExitCode.PARSE


__all__ = [
    "ExitCode",
    "InfeasibleShotError",
    "InvalidParameterError",
    "LieswarmError",
    "LieswarmValueError",
    "NonConvergenceError",
    "ScenarioParseError",
    "ScenarioValidationError",
    "SingularityError",
    "TrajectoryParseError",
]
