# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Formatting of numbers and trajectory table columns.
"""

from __future__ import annotations

import re
from collections.abc import Sequence

from lieswarm._error import TrajectoryParseError
from lieswarm._global import LieswarmGlobals


class NumberFormats:
    """
    Decimal formats; 17 significant digits round-trip every float64.
    """

    @classmethod
    def exact(cls) -> str:
        return f"%.{LieswarmGlobals.CSV_DIGITS}g"

    @classmethod
    def format_exact(cls, value: float) -> str:
        return cls.exact() % value

    @classmethod
    def format_pretty(cls, value: float, *, digits: int = 6) -> str:
        return f"{value:.{digits}g}"


class TrajectoryColumns:
    """
    Column layout of trajectory tables: ``t``, then 12 columns per agent, then 3 global readouts.
    """

    per_agent = ("theta", "x", "y", "mu1", "mu2", "mu3", "alpha1", "alpha2", "alpha3", "u1", "u2", "u3")
    readouts = ("h", "min_pair_dist", "min_obs_clearance")
    abort_marker = "# aborted"
    _pattern = re.compile(r"^(?P<name>[a-z0-9]+)\[(?P<id>[^\]]+)\]$")

    @classmethod
    def header(cls, ids: Sequence[str]) -> list[str]:
        cols = ["t"]
        for aid in ids:
            cols += [f"{name}[{aid}]" for name in cls.per_agent]
        return cols + list(cls.readouts)

    @classmethod
    def parse_header(cls, header: Sequence[str]) -> list[str]:
        """
        Returns the agent ids encoded in a header.

        Raises:
            TrajectoryParseError: if the header does not follow :meth:`header`
        """
        n = len(header) - 1 - len(cls.readouts)
        if len(header) == 0 or header[0] != "t" or n < 0 or n % len(cls.per_agent) != 0:
            msg = f"Not a trajectory header: {list(header)[:4]}..."
            raise TrajectoryParseError(msg)
        ids = []
        for k in range(n // len(cls.per_agent)):
            block = header[1 + k * len(cls.per_agent) : 1 + (k + 1) * len(cls.per_agent)]
            match = cls._pattern.match(block[0])
            if match is None:
                msg = f"Bad agent column '{block[0]}'"
                raise TrajectoryParseError(msg)
            ids.append(match.group("id"))
        if list(header) != cls.header(ids):
            msg = "Trajectory header columns are out of order or misnamed"
            raise TrajectoryParseError(msg)
        return ids


__all__ = ["NumberFormats", "TrajectoryColumns"]
