# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
JSON encoding of solver reports.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from lieswarm._se2 import Momentum, Pose2, Twist
from lieswarm._setup import logger
from lieswarm._shooting import ShootResult

# keys whose values decode back into group and algebra types
_MOMENTUM_KEYS = frozenset({"mu0_star"})
_POSE_KEYS = frozenset({"final_poses"})


class ReportEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, Pose2):
            return [obj.theta, obj.x, obj.y]
        if isinstance(obj, Twist):
            return [obj.a, obj.v1, obj.v2]
        if isinstance(obj, Momentum):
            return [obj.m1, obj.m2, obj.m3]
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, enum.Enum):
            return obj.name
        if isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


class ReportDecoder(json.JSONDecoder):
    def __init__(self, *args, **kwargs) -> None:
        json.JSONDecoder.__init__(self, *args, object_hook=self.object_hook, **kwargs)

    def object_hook(self, obj):
        for key in list(obj):
            if key in _MOMENTUM_KEYS:
                obj[key] = [Momentum(*row) for row in obj[key]]
            elif key in _POSE_KEYS:
                obj[key] = [Pose2(*row) for row in obj[key]]
        return obj


def shoot_report(result: ShootResult, ids: list[str] | None = None) -> dict[str, Any]:
    """
    The JSON-ready summary of a solve; the trajectory itself goes to CSV.
    """
    report: dict[str, Any] = {
        "converged": result.converged,
        "iterations": result.iterations,
        "residual_norm": result.residual_norm,
        "mu0_star": list(result.mu0_star),
        "history": [
            {"iteration": r.iteration, "residual_norm": r.residual_norm, "damping": r.damping}
            for r in result.history
        ],
    }
    if ids is not None:
        report["ids"] = list(ids)
    if result.trajectory is not None:
        summary = result.trajectory.summary()
        report["final_poses"] = list(summary.final_poses)
        report["h_drift"] = summary.h_drift
        report["min_pair_dist"] = summary.min_pair_dist if math.isfinite(summary.min_pair_dist) else None
        report["min_obs_clearance"] = summary.min_obs_clearance
    return report


def write_report(report: Mapping[str, Any], path: Path | str) -> None:
    encoded = ReportEncoder(ensure_ascii=False, allow_nan=False, indent=2).encode(report)
    Path(path).write_text(encoded + "\n", encoding="utf8")
    logger.debug(f"Wrote report to {path}")


def read_report(path: Path | str) -> dict[str, Any]:
    return ReportDecoder().decode(Path(path).read_text(encoding="utf8"))


__all__ = ["ReportDecoder", "ReportEncoder", "read_report", "shoot_report", "write_report"]
