# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Trajectory tables (CSV) and static path figures (SVG).
"""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import matplotlib as mpl
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle

from lieswarm._error import InvalidParameterError, TrajectoryParseError
from lieswarm._formatting import NumberFormats, TrajectoryColumns
from lieswarm._global import LieswarmGlobals
from lieswarm._model import Trajectory
from lieswarm._setup import logger


@dataclass(frozen=True, repr=True)
class TrajectoryRecord:
    """
    A trajectory with agent ids, as stored in a table.

    Attributes:
        trajectory: the samples
        ids: one label per agent
        abort_reason: why the run stopped early, if it did
    """

    trajectory: Trajectory
    ids: tuple[str, ...]
    abort_reason: str | None = None

    @classmethod
    def of(
        cls,
        trajectory: Trajectory,
        ids: Sequence[str] | None = None,
        abort_reason: str | None = None,
    ) -> TrajectoryRecord:
        ids = tuple(str(k + 1) for k in range(trajectory.n_agents)) if ids is None else tuple(ids)
        if len(ids) != trajectory.n_agents:
            msg = f"{len(ids)} ids for {trajectory.n_agents} agents"
            raise InvalidParameterError(msg)
        return cls(trajectory, ids, abort_reason)

    @property
    def aborted(self) -> bool:
        return self.trajectory.aborted

    def rows(self) -> np.ndarray:
        tr = self.trajectory
        n = len(tr)
        per_agent = np.concatenate([tr.states, tr.controls], axis=2).reshape(n, -1)
        return np.column_stack([tr.times, per_agent, tr.h, tr.min_pair_dist, tr.min_obs_clearance])

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(TrajectoryColumns.header(self.ids))
        for row in self.rows():
            writer.writerow([NumberFormats.format_exact(v) for v in row])
        if self.aborted:
            reason = (self.abort_reason or "singularity").replace("\n", " ")
            out.write(f"{TrajectoryColumns.abort_marker}: {reason}\n")
        return out.getvalue()

    def write_csv(self, path: Path | str) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf8")
        logger.debug(f"Wrote {len(self.trajectory)} samples to {path}")

    @classmethod
    def from_csv(cls, text: str, source: str = "<string>") -> TrajectoryRecord:
        """
        Parses a table written by :meth:`to_csv`.

        Raises:
            TrajectoryParseError: if the table is empty, has no samples or has malformed rows
        """
        lines = text.splitlines()
        marker = [line for line in lines if line.startswith(TrajectoryColumns.abort_marker)]
        body = [line for line in lines if line.strip() and not line.startswith("#")]
        if not body:
            msg = f"{source}: empty trajectory table"
            raise TrajectoryParseError(msg)
        reader = csv.reader(body)
        ids = TrajectoryColumns.parse_header(next(reader))
        width = len(TrajectoryColumns.header(ids))
        values = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                msg = f"{source}: line {lineno} has {len(row)} fields; expected {width}"
                raise TrajectoryParseError(msg)
            try:
                values.append([float(v) for v in row])
            except ValueError as e:
                msg = f"{source}: line {lineno}: {e}"
                raise TrajectoryParseError(msg) from e
        if not values:
            msg = f"{source}: trajectory table has a header but no samples"
            raise TrajectoryParseError(msg)
        arr = np.array(values)
        n, s = len(arr), len(ids)
        per_agent = arr[:, 1 : 1 + 12 * s].reshape(n, s, 12)
        try:
            trajectory = Trajectory(
                times=arr[:, 0],
                states=np.ascontiguousarray(per_agent[..., :9]),
                controls=np.ascontiguousarray(per_agent[..., 9:]),
                h=arr[:, -3],
                min_pair_dist=arr[:, -2],
                min_obs_clearance=arr[:, -1],
                aborted=bool(marker),
            )
        except ValueError as e:
            msg = f"{source}: {e}"
            raise TrajectoryParseError(msg) from e
        reason = marker[0].partition(":")[2].strip() if marker else None
        return cls(trajectory, tuple(ids), reason)

    @classmethod
    def read_csv(cls, path: Path | str) -> TrajectoryRecord:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf8")
        except OSError as e:
            msg = f"Cannot read trajectory {path}: {e.strerror}"
            raise TrajectoryParseError(msg) from e
        return cls.from_csv(text, str(path))

    def to_svg(self, *, r_bar: float = 1.0, obstacle_center: tuple[float, float] = (0.0, 0.0)) -> str:
        """
        Renders the planar paths with the unit obstacle, its ``r_bar + 1`` guard and start/end markers.

        Output bytes depend only on the inputs.
        """
        states = self.trajectory.states
        fig = Figure(figsize=(6, 6))
        ax = fig.add_subplot()
        ax.add_patch(Circle(obstacle_center, 1.0, facecolor="0.8", edgecolor="0.3", gid="obstacle"))
        ax.add_patch(
            Circle(obstacle_center, r_bar + 1, fill=False, edgecolor="0.3", linestyle="--", gid="obstacle-guard")
        )
        for k, aid in enumerate(self.ids):
            xs, ys = states[:, k, 1], states[:, k, 2]
            (line,) = ax.plot(xs, ys, linewidth=1.2, gid=f"agent-{aid}", label=f"agent {aid}")
            color = line.get_color()
            ax.plot(xs[:1], ys[:1], marker="o", color=color, linestyle="none", gid=f"start-{aid}")
            ax.plot(xs[-1:], ys[-1:], marker="s", color=color, linestyle="none", gid=f"end-{aid}")
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.legend(loc="best")
        ax.grid(visible=True, linewidth=0.3)
        out = io.StringIO()
        with mpl.rc_context({"svg.hashsalt": LieswarmGlobals.SVG_HASH_SALT, "svg.fonttype": "none"}):
            fig.savefig(out, format="svg", metadata={"Date": None})
        return out.getvalue()


def write_trajectory_csv(
    trajectory: Trajectory,
    path: Path | str,
    ids: Sequence[str] | None = None,
    abort_reason: str | None = None,
) -> None:
    TrajectoryRecord.of(trajectory, ids, abort_reason).write_csv(path)


def read_trajectory_csv(path: Path | str) -> TrajectoryRecord:
    return TrajectoryRecord.read_csv(path)


def emit_svg(
    csv_path: Path | str,
    out_path: Path | str,
    *,
    r_bar: float = 1.0,
    obstacle_center: tuple[float, float] = (0.0, 0.0),
) -> None:
    """
    Reads a trajectory table and writes its path figure.

    Raises:
        TrajectoryParseError: if the table is malformed or empty
    """
    record = TrajectoryRecord.read_csv(csv_path)
    svg = record.to_svg(r_bar=r_bar, obstacle_center=obstacle_center)
    Path(out_path).write_text(svg, encoding="utf8")
    logger.debug(f"Wrote figure of {len(record.ids)} paths to {out_path}")


__all__ = ["TrajectoryRecord", "emit_svg", "read_trajectory_csv", "write_trajectory_csv"]
