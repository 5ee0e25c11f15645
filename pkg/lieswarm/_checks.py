# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
Invariant report for a scenario: kernel identities, gradient oracles, symmetry and short conservation runs.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from rich.table import Table

from lieswarm._dynamics import DynamicsMode, Integrator, PotentialModel, diagnostics, integrate
from lieswarm._error import SingularityError
from lieswarm._model import SystemState
from lieswarm._potentials import GradientVariant, Potentials
from lieswarm._scenario import ScenarioFile
from lieswarm._se2 import Momentum, Pose2, Se2, Twist
from lieswarm._setup import logger

_SAMPLES = 1000
_SEED = 0
_KERNEL_TOL = 1e-10
_GRADIENT_TOL = 1e-6
_SHORT_RUN_STEPS = 500
_SHORT_RUN_DT = 1e-3


class CheckStatus(enum.Enum):
    passed = enum.auto()
    failed = enum.auto()
    expected_fail = enum.auto()
    skipped = enum.auto()

    @property
    def style(self) -> str:
        return {"passed": "green", "failed": "bold red", "expected_fail": "yellow", "skipped": "dim"}[self.name]


@dataclass(frozen=True, repr=True)
class CheckResult:
    name: str
    status: CheckStatus
    detail: str = ""


@dataclass(frozen=True, repr=True)
class CheckReport:
    results: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.status is not CheckStatus.failed for r in self.results)

    def status_of(self, name: str) -> CheckStatus:
        for r in self.results:
            if r.name == name:
                return r.status
        raise KeyError(name)

    def to_table(self) -> Table:
        table = Table(title="lieswarm invariant checks")
        table.add_column("check")
        table.add_column("status")
        table.add_column("detail")
        for r in self.results:
            table.add_row(r.name, f"[{r.status.style}]{r.status.name.replace('_', '-')}[/]", r.detail)
        return table


def _threshold(name: str, err: float, tol: float) -> CheckResult:
    status = CheckStatus.passed if err <= tol else CheckStatus.failed
    return CheckResult(name, status, f"max error {err:.2e} (tol {tol:.0e})")


class _Checks:
    def __init__(self, scenario: ScenarioFile) -> None:
        self.scenario = scenario
        self.params = scenario.params
        self.graph = scenario.graph
        self.rng = np.random.default_rng(_SEED)

    def _poses(self, n: int, scale: float = 5.0) -> np.ndarray:
        return np.column_stack(
            [self.rng.uniform(-np.pi, np.pi, n), self.rng.uniform(-scale, scale, n), self.rng.uniform(-scale, scale, n)]
        )

    def _vectors(self, n: int) -> np.ndarray:
        return self.rng.uniform(-2.0, 2.0, (n, 3))

    def dual_basis(self) -> CheckResult:
        err = 0.0
        for i in range(1, 4):
            for j in range(1, 4):
                pairing = np.trace(Momentum.basis(i).to_matrix() @ Twist.basis(j).to_matrix())
                err = max(err, abs(pairing - (i == j)))
        return _threshold("dual basis", err, _KERNEL_TOL)

    def coadjoint_adjointness(self) -> CheckResult:
        xi, eta, mu = self._vectors(_SAMPLES), self._vectors(_SAMPLES), self._vectors(_SAMPLES)
        lhs = Se2.pairing(Se2.coadjoint_star(xi, mu), eta)
        rhs = Se2.pairing(mu, Se2.bracket(xi, eta))
        return _threshold("ad* adjointness", float(np.max(np.abs(lhs - rhs))), _KERNEL_TOL)

    def adjoint_homomorphism(self) -> CheckResult:
        g, h, xi = self._poses(_SAMPLES), self._poses(_SAMPLES), self._vectors(_SAMPLES)
        lhs = Se2.adjoint(Se2.compose(g, h), xi)
        rhs = Se2.adjoint(g, Se2.adjoint(h, xi))
        return _threshold("Ad homomorphism", float(np.max(np.abs(lhs - rhs))), _KERNEL_TOL)

    def exp_log(self) -> CheckResult:
        xi = self._vectors(_SAMPLES)
        xi[:, 0] = self.rng.uniform(-3.0, 3.0, _SAMPLES)
        err = float(np.max(np.abs(Se2.log(Se2.exp(xi)) - xi)))
        return _threshold("exp/log round trip", err, _KERNEL_TOL)

    def _pair_samples(self, n: int) -> list[tuple[Pose2, Pose2]]:
        out = []
        while len(out) < n:
            gi, gj = self._poses(2)
            if math.hypot(gi[1] - gj[1], gi[2] - gj[2]) > 2 * self.params.r_bar + 0.5:
                out.append((Pose2.from_array(gi), Pose2.from_array(gj)))
        return out

    def _rel_err(self, analytic: Momentum, numeric: Momentum) -> float:
        scale = max(1e-12, float(np.max(np.abs(numeric.array))))
        return float(np.max(np.abs(analytic.array - numeric.array))) / scale

    def pair_gradient(self) -> CheckResult:
        r_bar = self.params.r_bar
        err = 0.0
        for gi, gj in self._pair_samples(100):
            analytic = Potentials.grad_pair_body(gi, gj, 1.0, r_bar, GradientVariant.rotated)
            numeric = Potentials.body_gradient_fd(lambda g, gj=gj: Potentials.u_pair(g, gj, 1.0, r_bar), gi)
            err = max(err, self._rel_err(analytic, numeric))
        return _threshold("pair gradient vs finite differences", err, _GRADIENT_TOL)

    def obstacle_gradient(self) -> CheckResult:
        r_bar, center, alpha0 = self.params.r_bar, self.params.obstacle_center, self.params.alpha0
        err = 0.0
        n = 0
        while n < 100:
            g = Pose2.from_array(self._poses(1)[0])
            if math.hypot(g.x - center[0], g.y - center[1]) < r_bar + 1.5:
                continue
            analytic = Potentials.grad_obs_ext(g.inverse().adjoint(alpha0), 1.0, r_bar)
            numeric = Potentials.body_gradient_fd(lambda h: Potentials.u_obs(h, 1.0, r_bar, center), g)
            err = max(err, self._rel_err(analytic, numeric))
            n += 1
        return _threshold("obstacle gradient vs finite differences", err, _GRADIENT_TOL)

    def printed_gradient(self) -> CheckResult:
        """
        The unrotated pair gradient must agree at zero heading and disagree elsewhere.
        """
        r_bar = self.params.r_bar
        gj = Pose2(0.0, 0.0, 0.0)
        at_zero = Pose2(0.0, 2 * r_bar + 2.0, 1.0)
        turned = at_zero.copy(theta=0.7)

        def err(gi: Pose2) -> float:
            analytic = Potentials.grad_pair_body(gi, gj, 1.0, r_bar, GradientVariant.printed)
            numeric = Potentials.body_gradient_fd(lambda g: Potentials.u_pair(g, gj, 1.0, r_bar), gi)
            return self._rel_err(analytic, numeric)

        zero_err, turned_err = err(at_zero), err(turned)
        detail = f"error {zero_err:.1e} at zero heading, {turned_err:.1e} at 0.7 rad"
        if zero_err <= _GRADIENT_TOL and turned_err > _GRADIENT_TOL:
            return CheckResult("printed pair gradient rotation", CheckStatus.expected_fail, detail)
        return CheckResult("printed pair gradient rotation", CheckStatus.failed, detail)

    def pair_invariance(self) -> CheckResult:
        r_bar = self.params.r_bar
        err = 0.0
        for gi, gj in self._pair_samples(_SAMPLES):
            h = Pose2.from_array(self._poses(1)[0])
            before = Potentials.u_pair(gi, gj, 1.0, r_bar)
            after = Potentials.u_pair(h @ gi, h @ gj, 1.0, r_bar)
            err = max(err, abs(before - after) / max(1.0, abs(before)))
        return _threshold("pair potential left invariance", err, 1e-12)

    def obstacle_symmetry(self) -> CheckResult:
        r_bar, center, alpha0 = self.params.r_bar, self.params.obstacle_center, self.params.alpha0
        about_center = Pose2.translation(*center)
        err = 0.0
        n = 0
        while n < _SAMPLES:
            g = Pose2.from_array(self._poses(1)[0])
            if math.hypot(g.x - center[0], g.y - center[1]) < r_bar + 1.5:
                continue
            u = Potentials.u_obs(g, 1.0, r_bar, center)
            ext = Potentials.u_ext(g.inverse().adjoint(alpha0), 1.0, r_bar)
            rot = about_center @ Pose2.rotation(self.rng.uniform(-np.pi, np.pi)) @ about_center.inverse()
            rotated = Potentials.u_obs(rot @ g, 1.0, r_bar, center)
            err = max(err, abs(u - ext), abs(u - rotated))
            n += 1
        witness = Pose2(0.0, center[0] + r_bar + 3.0, center[1])
        moved = Pose2.translation(1.0, 0.0) @ witness
        broken = abs(Potentials.u_obs(witness, 1.0, r_bar, center) - Potentials.u_obs(moved, 1.0, r_bar, center))
        if err <= 1e-12 and broken > 1e-6:
            return CheckResult("obstacle isotropy", CheckStatus.passed, f"max error {err:.2e}; translation breaks it")
        return CheckResult("obstacle isotropy", CheckStatus.failed, f"max error {err:.2e}; witness gap {broken:.2e}")

    def connectivity(self) -> CheckResult:
        status = CheckStatus.passed if self.graph.is_connected else CheckStatus.failed
        return CheckResult("graph connected", status, f"{self.graph.n_agents} agents, {len(self.graph.edges)} edges")

    def _short_run_initial(self) -> SystemState:
        return SystemState.of(
            [a.g0 for a in self.scenario.agents], self.scenario.initial_costates(), self.params.alpha0
        )

    def conservation(self) -> list[CheckResult]:
        opts = self.scenario.dyn_options(
            mode=DynamicsMode.first_principles, integrator=Integrator.rk4, dt=_SHORT_RUN_DT, record_every=1
        )
        initial = self._short_run_initial()
        names = ["Hamiltonian conservation run", "advected parameter run", "free Casimir run"]
        try:
            trajectory = integrate(initial, self.params, self.graph, opts, _SHORT_RUN_STEPS)
        except SingularityError as e:
            return [CheckResult(name, CheckStatus.skipped, f"short run reached a pole: {e}") for name in names]
        out = [_threshold(names[0], trajectory.h_drift, 1e-6)]
        if opts.potential is PotentialModel.combined:
            out.append(CheckResult(names[1], CheckStatus.skipped, "combined potential does not use alpha"))
        else:
            out.append(_threshold(names[1], trajectory.alpha_error(self.params.alpha0), 1e-6))
        free = not np.any(self.params.sigma_pair) and not np.any(self.params.sigma_obs)
        if free:
            casimir = trajectory.states[:, :, 4] ** 2 + trajectory.states[:, :, 5] ** 2
            drift = float(np.max(np.abs(casimir - casimir[0]))) / (_SHORT_RUN_STEPS * _SHORT_RUN_DT)
            out.append(_threshold(names[2], drift, 1e-10))
        else:
            out.append(CheckResult(names[2], CheckStatus.skipped, "potentials are active"))
        return out

    def initial_feasibility(self) -> CheckResult:
        try:
            diag = diagnostics(self._short_run_initial(), self.params, self.graph, self.scenario.dyn_options())
        except SingularityError as e:
            return CheckResult("initial state evaluable", CheckStatus.failed, str(e))
        return CheckResult(
            "initial state evaluable",
            CheckStatus.passed,
            f"h = {diag.h:.6g}, min pair distance {diag.min_pair_dist:.4g}, clearance {diag.min_obs_clearance:.4g}",
        )

    def run(self) -> CheckReport:
        suites: list[Callable[[], CheckResult | list[CheckResult]]] = [
            self.dual_basis,
            self.coadjoint_adjointness,
            self.adjoint_homomorphism,
            self.exp_log,
            self.pair_gradient,
            self.obstacle_gradient,
            self.printed_gradient,
            self.pair_invariance,
            self.obstacle_symmetry,
            self.connectivity,
            self.initial_feasibility,
            self.conservation,
        ]
        results: list[CheckResult] = []
        for suite in suites:
            out = suite()
            results.extend(out if isinstance(out, list) else [out])
        for r in results:
            logger.debug(f"Check '{r.name}': {r.status.name} ({r.detail})")
        return CheckReport(tuple(results))


def run_check(scenario: ScenarioFile) -> CheckReport:
    """
    Runs every check against the scenario's geometry and initial data.
    """
    return _Checks(scenario).run()


__all__ = ["CheckReport", "CheckResult", "CheckStatus", "run_check"]
