# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Lieswarm entry point for import.

Use as:

```python
import lieswarm

scenario = lieswarm.load_paper_fixture()
trajectory = lieswarm.integrate(
    scenario.initial_state(), scenario.params, scenario.graph, scenario.dyn_options(), scenario.n_steps
)
trajectory.summary()
```
"""

from importlib.metadata import PackageNotFoundError
from importlib.metadata import metadata as __load
from pathlib import Path

import lieswarm._error as errors
from lieswarm._checks import CheckReport, CheckResult, CheckStatus, run_check
from lieswarm._codec import ReportDecoder, ReportEncoder, read_report, shoot_report, write_report
from lieswarm._dynamics import (
    DynamicsMode,
    DynOptions,
    Integrator,
    PotentialModel,
    StateDerivative,
    diagnostics,
    hamiltonian,
    integrate,
    pmp_controls,
    relative_poses,
    rhs,
    step,
)
from lieswarm._global import LieswarmGlobals
from lieswarm._graph import InteractionGraph
from lieswarm._model import AgentState, Diagnostics, Summary, SystemState, Trajectory
from lieswarm._potentials import GradientVariant, PotentialParams, Potentials
from lieswarm._records import TrajectoryRecord, emit_svg, read_trajectory_csv, write_trajectory_csv
from lieswarm._scenario import AgentSpec, ScenarioFile, load_paper_fixture, load_scenario, parse_scenario
from lieswarm._se2 import Momentum, Pose2, Se2, Twist
from lieswarm._setup import logger
from lieswarm._shooting import (
    BoundaryData,
    IterationRecord,
    ShootOptions,
    ShootResult,
    costates_from_velocities,
    ivp_run,
    residual,
    solve_shooting,
)

pkg = Path(__file__).parent.name
metadata = None
try:
    metadata = __load(pkg)
except PackageNotFoundError:  # pragma: no cover
    logger.error(f"Could not load package metadata for {pkg}. Is it installed?")
    __title__ = None
    __summary__ = None
    __version__ = None
else:
    __title__ = metadata["name"]
    __summary__ = metadata["summary"]
    __version__ = metadata["version"]


def get_singularity_guard() -> float:
    return LieswarmGlobals.SINGULARITY_GUARD


def set_singularity_guard(value: float) -> None:
    if not value > 0:
        msg = f"The singularity guard must be positive, not {value}"
        raise errors.InvalidParameterError(msg)
    LieswarmGlobals.SINGULARITY_GUARD = value


def get_fd_step() -> float:
    return LieswarmGlobals.FD_STEP


def set_fd_step(value: float) -> None:
    if not value > 0:
        msg = f"The finite-difference step must be positive, not {value}"
        raise errors.InvalidParameterError(msg)
    LieswarmGlobals.FD_STEP = value


class LieswarmMeta:
    version = __version__


__all__ = [
    "errors",
    "AgentSpec",
    "AgentState",
    "BoundaryData",
    "CheckReport",
    "CheckResult",
    "CheckStatus",
    "Diagnostics",
    "DynOptions",
    "DynamicsMode",
    "GradientVariant",
    "Integrator",
    "InteractionGraph",
    "IterationRecord",
    "LieswarmGlobals",
    "LieswarmMeta",
    "Momentum",
    "Pose2",
    "PotentialModel",
    "PotentialParams",
    "Potentials",
    "ReportDecoder",
    "ReportEncoder",
    "ScenarioFile",
    "Se2",
    "ShootOptions",
    "ShootResult",
    "StateDerivative",
    "Summary",
    "SystemState",
    "Trajectory",
    "TrajectoryRecord",
    "Twist",
    "costates_from_velocities",
    "diagnostics",
    "emit_svg",
    "get_fd_step",
    "get_singularity_guard",
    "hamiltonian",
    "integrate",
    "ivp_run",
    "load_paper_fixture",
    "load_scenario",
    "parse_scenario",
    "pmp_controls",
    "read_report",
    "read_trajectory_csv",
    "relative_poses",
    "residual",
    "rhs",
    "run_check",
    "set_fd_step",
    "set_singularity_guard",
    "shoot_report",
    "solve_shooting",
    "step",
    "write_report",
    "write_trajectory_csv",
]
