# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Command-line interface: ``simulate``, ``shoot``, ``check`` and ``plot``.
"""

import csv
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from lieswarm._checks import run_check
from lieswarm._codec import shoot_report, write_report
from lieswarm._dynamics import integrate
from lieswarm._error import ExitCode, LieswarmError, NonConvergenceError, SingularityError
from lieswarm._formatting import NumberFormats
from lieswarm._model import Summary
from lieswarm._records import TrajectoryRecord, emit_svg
from lieswarm._scenario import ScenarioFile, load_scenario
from lieswarm._setup import logger
from lieswarm._shooting import ShootOptions, ShootResult, solve_shooting

cli = typer.Typer(
    name="lieswarm",
    help="Optimal extremal flows of unicycle swarms on SE(2).",
    add_completion=False,
    no_args_is_help=True,
)


@contextmanager
def _exit_on_error() -> Iterator[None]:
    try:
        yield
    except LieswarmError as e:
        logger.error(str(e))
        raise typer.Exit(int(e.exit_code)) from None


def _summary_table(summary: Summary, ids: list[str]) -> Table:
    fmt = NumberFormats.format_pretty
    table = Table(title="run summary")
    table.add_column("agent")
    table.add_column("theta")
    table.add_column("x")
    table.add_column("y")
    for aid, g in zip(ids, summary.final_poses, strict=True):
        table.add_row(aid, fmt(g.theta), fmt(g.x), fmt(g.y))
    table.caption = (
        f"t = {fmt(summary.t_final)}, samples {summary.n_samples}, h drift {summary.h_drift:.3e}, "
        f"min pair distance {fmt(summary.min_pair_dist)}, min obstacle clearance {fmt(summary.min_obs_clearance)}"
        + (", ABORTED" if summary.aborted else "")
    )
    return table


def _load(path: Path) -> ScenarioFile:
    scenario = load_scenario(path)
    for note in scenario.notes:
        logger.warning(f"{path.name}: {note}")
    return scenario


@cli.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log solver detail."),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Only log warnings and errors."),
) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logger.handlers.clear()
    logger.addHandler(RichHandler(show_path=False, console=Console(stderr=True)))
    logger.setLevel(level)


@cli.command()
def simulate(
    scenario_path: Path = typer.Argument(..., metavar="SCENARIO", help="Scenario JSON file."),
    out: Optional[Path] = typer.Option(None, "--out", help="Trajectory CSV (default: SCENARIO.csv)."),  # noqa: UP007
    mode: Optional[str] = typer.Option(None, "--mode", help="paper_printed or first_principles."),  # noqa: UP007
    integrator: Optional[str] = typer.Option(None, "--integrator", help="euler or rk4."),  # noqa: UP007
) -> None:
    """
    Integrates the extremal flow from the scenario's initial data and writes the trajectory table.
    """
    with _exit_on_error():
        scenario = _load(scenario_path)
        opts = scenario.dyn_options(mode=mode, integrator=integrator)
        initial = scenario.initial_state(opts)
        out = scenario_path.with_suffix(".csv") if out is None else out
        logger.info(f"Simulating {scenario.n_agents} agents for {scenario.n_steps} steps ({opts.mode.name})")
        try:
            trajectory = integrate(initial, scenario.params, scenario.graph, opts, scenario.n_steps)
        except SingularityError as e:
            if e.trajectory is not None:
                TrajectoryRecord.of(e.trajectory, scenario.ids, str(e)).write_csv(out)
                logger.error(f"Partial trajectory written to {out}")
            raise
        TrajectoryRecord.of(trajectory, scenario.ids).write_csv(out)
        Console().print(_summary_table(trajectory.summary(), scenario.ids))
        logger.info(f"Wrote {out}")


def _write_shoot_outputs(result: ShootResult, out: Path, ids: list[str]) -> None:
    log_path = out.with_name(out.stem + ".iterations.csv")
    with log_path.open("w", encoding="utf8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["iteration", "residual_norm", "damping"])
        for r in result.history:
            writer.writerow(
                [r.iteration, NumberFormats.format_exact(r.residual_norm), NumberFormats.format_exact(r.damping)]
            )
    write_report(shoot_report(result, ids), out.with_name(out.stem + ".report.json"))
    if result.trajectory is not None:
        TrajectoryRecord.of(result.trajectory, ids).write_csv(out)


@cli.command()
def shoot(
    scenario_path: Path = typer.Argument(..., metavar="SCENARIO", help="Scenario JSON file with gT targets."),
    out: Optional[Path] = typer.Option(None, "--out", help="Trajectory CSV (default: SCENARIO.csv)."),  # noqa: UP007
    tol: float = typer.Option(1e-8, "--tol", help="Residual norm tolerance."),
    max_iter: int = typer.Option(50, "--max-iter", help="Iteration cap."),
    mode: Optional[str] = typer.Option(None, "--mode", help="paper_printed or first_principles."),  # noqa: UP007
    integrator: Optional[str] = typer.Option(None, "--integrator", help="euler or rk4."),  # noqa: UP007
    workers: int = typer.Option(1, "--workers", help="Threads for Jacobian columns."),
) -> None:
    """
    Solves for initial costates that reach the targets; writes the trajectory, iteration log and report.
    """
    with _exit_on_error():
        scenario = _load(scenario_path)
        boundary = scenario.boundary()
        dyn = scenario.dyn_options(mode=mode, integrator=integrator)
        opts = ShootOptions(tol=tol, max_iter=max_iter, dyn=dyn, workers=workers)
        out = scenario_path.with_suffix(".csv") if out is None else out
        try:
            result = solve_shooting(scenario.initial_costates(dyn), boundary, scenario.params, scenario.graph, opts)
        except NonConvergenceError as e:
            if e.result is not None:
                _write_shoot_outputs(e.result, out, scenario.ids)
            raise
        _write_shoot_outputs(result, out, scenario.ids)
        table = Table(title="initial costates")
        for name in ("agent", "mu1", "mu2", "mu3"):
            table.add_column(name)
        for aid, mu in zip(scenario.ids, result.mu0_star, strict=True):
            table.add_row(aid, *(NumberFormats.format_pretty(v, digits=10) for v in mu.array))
        table.caption = f"{result.iterations} iterations, residual {result.residual_norm:.3e}"
        Console().print(table)


@cli.command()
def check(
    scenario_path: Path = typer.Argument(..., metavar="SCENARIO", help="Scenario JSON file."),
) -> None:
    """
    Runs the invariant checks and prints a pass/fail table.
    """
    with _exit_on_error():
        scenario = _load(scenario_path)
        report = run_check(scenario)
        Console().print(report.to_table())
        if not report.ok:
            logger.error("At least one check failed")
            raise typer.Exit(int(ExitCode.CHECK_FAILED))


@cli.command()
def plot(
    trajectory_path: Path = typer.Argument(..., metavar="TRAJECTORY", help="Trajectory CSV."),
    out: Path = typer.Option(..., "--out", help="SVG file to write."),
    scenario_path: Optional[Path] = typer.Option(  # noqa: UP007
        None, "--scenario", help="Scenario to take r_bar and the obstacle centre from."
    ),
    r_bar: float = typer.Option(1.0, "--r-bar", help="Agent radius, if no scenario is given."),
) -> None:
    """
    Draws the planar paths, the obstacle and its guard circle as SVG.
    """
    with _exit_on_error():
        center = (0.0, 0.0)
        if scenario_path is not None:
            scenario = load_scenario(scenario_path)
            r_bar, center = scenario.r_bar, scenario.obstacle_center
        emit_svg(trajectory_path, out, r_bar=r_bar, obstacle_center=center)
        logger.info(f"Wrote {out}")


if __name__ == "__main__":
    cli()
