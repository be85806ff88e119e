"""Staggered-grid explicit solver for 1-D compressible Navier-Stokes in mass coordinates.

Specific volume and temperature live at cell centres, velocity at nodes; the
node at ``y = 0`` carries the initial discontinuity. Both the scaled system
(unit viscosity, heat conductivity ``nu``) and the physical one (viscosity
``epsilon``, conductivity ``kappa``) share the kernel: only the two diffusion
coefficients differ. Time stepping is Heun's method.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .gas import GasParams, State

log = logging.getLogger(__name__)

MONITOR_CELLS = 5
MONITOR_TOL = 1e-6


class SolverAbort(RuntimeError):
    """Integration stopped; ``tau`` and ``location`` say where."""

    def __init__(self, message, tau=None, location=None):
        super().__init__(message)
        self.tau = tau
        self.location = location


class PositivityError(SolverAbort):
    pass


class BoundaryTouchError(SolverAbort):
    pass


@dataclass(frozen=True)
class Grid1D:
    half_width: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells <= 0 or self.n_cells % 2:
            raise ValueError(f"n_cells must be a positive even number, got {self.n_cells}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def dy(self) -> float:
        return 2.0 * self.half_width / self.n_cells

    @property
    def cells(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n_cells) + 0.5) * self.dy

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + np.arange(self.n_cells + 1) * self.dy

    @property
    def interface_index(self) -> int:
        """Index of the node at ``y = 0``."""
        return self.n_cells // 2

    def scaled(self, factor: float) -> "Grid1D":
        return Grid1D(self.half_width * factor, self.n_cells)


@dataclass
class Field:
    tau: float
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def copy(self) -> "Field":
        return Field(self.tau, self.v.copy(), self.u.copy(), self.theta.copy())


@dataclass
class SolverConfig:
    mode: str = "scaled"
    nu: float = 1.0
    epsilon: float = 1.0
    kappa: float = 1.0
    cfl: float = 0.8
    smoothing_cells: int = 0
    tau_end: float = 1.0
    snapshot_times: list = field(default_factory=list)
    nu_bounds: tuple = (1e-3, 1e3)

    def __post_init__(self):
        if self.mode not in ("scaled", "physical"):
            raise ValueError(f"mode must be 'scaled' or 'physical', got {self.mode!r}")
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.smoothing_cells < 0:
            raise ValueError("smoothing_cells must be >= 0")
        if not self.tau_end > 0:
            raise ValueError("tau_end must be positive")
        nu0, nu1 = self.nu_bounds
        if self.mode == "physical":
            if self.epsilon <= 0 or self.kappa <= 0:
                raise ValueError("epsilon and kappa must be positive")
            ratio = self.kappa / self.epsilon
            if not nu0 <= ratio <= nu1:
                raise ValueError(f"kappa/epsilon = {ratio} outside [{nu0}, {nu1}]")
        elif not nu0 <= self.nu <= nu1:
            raise ValueError(f"nu = {self.nu} outside [{nu0}, {nu1}]")

    @property
    def viscosity(self) -> float:
        return 1.0 if self.mode == "scaled" else self.epsilon

    @property
    def conductivity(self) -> float:
        return self.nu if self.mode == "scaled" else self.kappa

    @property
    def length_scale(self) -> float:
        """Factor mapping scaled lengths/times to this run's units."""
        return 1.0 if self.mode == "scaled" else self.epsilon


def init_riemann(grid: Grid1D, left: State, right: State, smoothing_cells: int = 0) -> Field:
    """Riemann data with the jump on the interface node.

    With ``smoothing_cells > 0`` the jump is replaced by a tanh ramp whose
    width spans that many cells.
    """
    yc, yn = grid.cells, grid.nodes

    def ramp(y, a, b):
        if smoothing_cells == 0:
            out = np.where(y < 0.0, a, b).astype(float)
            out[y == 0.0] = 0.5 * (a + b)
            return out
        width = 0.5 * smoothing_cells * grid.dy
        return a + (b - a) * 0.5 * (1.0 + np.tanh(y / width))

    v = ramp(yc, left.v, right.v)
    theta = ramp(yc, left.theta, right.theta)
    u = ramp(yn, left.u, right.u)
    u[0], u[-1] = left.u, right.u
    return Field(0.0, v, u, theta)


class _Kernel:
    """Semi-discrete right-hand side with frozen far-field ghost values."""

    def __init__(self, g: GasParams, grid: Grid1D, mu: float, kappa: float,
                 left: State, right: State, source=None):
        self.g, self.grid = g, grid
        self.mu, self.kappa = mu, kappa
        self.left, self.right = left, right
        self.source = source
        self.cg = (g.gamma - 1.0) / g.R
        n = grid.n_cells
        self._vx = np.empty(n + 2)
        self._tx = np.empty(n + 2)
        self._vx[0], self._vx[-1] = left.v, right.v
        self._tx[0], self._tx[-1] = left.theta, right.theta

    def __call__(self, tau, v, u, theta):
        dy = self.grid.dy
        R = self.g.R
        D = np.diff(u) / dy
        p = R * theta / v
        F = self.mu * D / v - p
        du = np.zeros_like(u)
        du[1:-1] = np.diff(F) / dy
        vx, tx = self._vx, self._tx
        vx[1:-1] = v
        tx[1:-1] = theta
        q = self.kappa * np.diff(tx) / (0.5 * dy * (vx[1:] + vx[:-1]))
        dth = self.cg * (-p * D + np.diff(q) / dy + self.mu * D * D / v)
        dv = D
        if self.source is not None:
            sv, su, st = self.source(tau, self.grid)
            dv = dv + sv
            du[1:-1] += su[1:-1]
            dth = dth + st
        return dv, du, dth, F, q


def stable_dt(fld: Field, config: SolverConfig, g: GasParams, grid: Grid1D) -> float:
    """Acoustic CFL limit combined with the explicit momentum and heat diffusion limits."""
    dy = grid.dy
    vmin = float(np.min(fld.v))
    lam = float(np.max(np.sqrt(g.gamma * g.R * fld.theta) / fld.v))
    mu, kappa = config.viscosity, config.conductivity
    limits = [
        dy / lam,
        dy * dy * vmin / (2.0 * max(mu, kappa)),
        dy * dy * vmin * g.R / (2.0 * kappa * (g.gamma - 1.0)),
    ]
    return config.cfl * min(limits)


@dataclass
class StepInfo:
    mass_drift: float
    momentum_drift: float
    energy_drift: float


def _totals(g, grid, fld):
    dy = grid.dy
    mass = float(np.sum(fld.v)) * dy
    mom = float(np.sum(fld.u[1:-1])) * dy
    energy = (g.R / (g.gamma - 1.0) * float(np.sum(fld.theta)) + 0.5 * float(np.sum(fld.u[1:-1] ** 2))) * dy
    return mass, mom, energy


def _check_positive(fld, grid, tau, stage):
    if np.all(fld.v > 0) and np.all(fld.theta > 0):
        return
    bad = np.flatnonzero((fld.v <= 0) | (fld.theta <= 0))
    y = grid.cells[bad[0]]
    raise PositivityError(f"positivity lost at tau={tau:.6g}, y={y:.6g} ({stage})", tau, y)


def step(fld: Field, dt: float, kernel: _Kernel, check=True) -> tuple[Field, StepInfo]:
    """One Heun step; returns the new field and conservation drift relative to boundary fluxes."""
    g, grid = kernel.g, kernel.grid
    tau = fld.tau
    dv1, du1, dt1, F1, q1 = kernel(tau, fld.v, fld.u, fld.theta)
    mid = Field(tau + dt, fld.v + dt * dv1, fld.u + dt * du1, fld.theta + dt * dt1)
    if check:
        _check_positive(mid, grid, tau, "predictor")
    dv2, du2, dt2, F2, q2 = kernel(tau + dt, mid.v, mid.u, mid.theta)
    h = 0.5 * dt
    new = Field(tau + dt, fld.v + h * (dv1 + dv2), fld.u + h * (du1 + du2), fld.theta + h * (dt1 + dt2))
    if check:
        _check_positive(new, grid, tau, "corrector")

    info = None
    if kernel.source is None:
        uL, uR = fld.u[0], fld.u[-1]
        m0, p0, e0 = _totals(g, grid, fld)
        m1, p1, e1 = _totals(g, grid, new)
        mass_flux = dt * (uR - uL)
        mom_flux = h * ((F1[-1] - F1[0]) + (F2[-1] - F2[0]))
        en_flux = h * ((q1[-1] - q1[0] + F1[-1] * uR - F1[0] * uL)
                       + (q2[-1] - q2[0] + F2[-1] * uR - F2[0] * uL))
        info = StepInfo(
            abs(m1 - m0 - mass_flux) / abs(m0),
            abs(p1 - p0 - mom_flux) / max(abs(p0), m0),
            abs(e1 - e0 - en_flux) / abs(e0),
        )
    return new, info


def check_domain(grid: Grid1D, config: SolverConfig, left: State, right: State, g: GasParams):
    """Require ``max|lambda| (1 + tau_end) + 10 < L`` in scaled units."""
    lam = max(math.sqrt(g.gamma * g.R * s.theta) / s.v for s in (left, right))
    k = config.length_scale
    L = grid.half_width / k
    tau_end = config.tau_end / k
    if not lam * (1.0 + tau_end) + 10.0 < L:
        raise ValueError(
            f"domain too small: max|lambda|(1+tau_end)+10 = {lam * (1 + tau_end) + 10:.4g} "
            f">= L = {L:.4g} (scaled units)"
        )


@dataclass
class RunResult:
    snapshots: list
    steps: int
    max_drift: dict
    status: str = "ok"
    message: str = ""
    grid: Grid1D = None
    config: SolverConfig = None

    def report(self) -> dict:
        c, gr = self.config, self.grid
        out = {
            "status": self.status,
            "message": self.message,
            "mode": c.mode,
            "nu": c.nu, "epsilon": c.epsilon, "kappa": c.kappa,
            "cfl": c.cfl, "smoothing_cells": c.smoothing_cells, "tau_end": c.tau_end,
            "half_width": gr.half_width, "n_cells": gr.n_cells, "dy": gr.dy,
            "steps": self.steps,
            "jump_proxy": "difference of the two cells adjacent to the interface node",
        }
        for k, v in self.max_drift.items():
            out[f"max_drift_{k}"] = v
        return out


def integrate(grid: Grid1D, config: SolverConfig, g: GasParams, left: State, right: State,
              source=None, initial: Field = None, monitor=True, check_domain_size=True,
              raise_on_abort=True) -> RunResult:
    """March from ``tau = 0`` to ``config.tau_end`` and keep snapshots.

    Steps are shortened so that every requested snapshot time (and
    ``tau_end``) is hit exactly. Far-field ghost values stay frozen; when
    ``monitor`` is set the run aborts as soon as the outermost cells move
    away from the far-field states.
    """
    if check_domain_size:
        check_domain(grid, config, left, right, g)
    kernel = _Kernel(g, grid, config.viscosity, config.conductivity, left, right, source)
    fld = initial.copy() if initial is not None else init_riemann(grid, left, right, config.smoothing_cells)
    times = sorted({float(t) for t in config.snapshot_times if 0.0 <= t <= config.tau_end} | {config.tau_end})
    snapshots = []
    drift = {"mass": 0.0, "momentum": 0.0, "energy": 0.0}
    steps = 0
    result = RunResult(snapshots, 0, drift, grid=grid, config=config)
    if times and times[0] == 0.0:
        snapshots.append(fld.copy())
        times.pop(0)
    try:
        for target in times:
            while fld.tau < target:
                dt = stable_dt(fld, config, g, grid)
                last = fld.tau + dt >= target * (1.0 - 1e-14)
                if last:
                    dt = target - fld.tau
                fld, info = step(fld, dt, kernel)
                if last:
                    fld.tau = target
                steps += 1
                if info is not None:
                    drift["mass"] = max(drift["mass"], info.mass_drift)
                    drift["momentum"] = max(drift["momentum"], info.momentum_drift)
                    drift["energy"] = max(drift["energy"], info.energy_drift)
                if monitor:
                    _monitor(fld, left, right, grid)
            snapshots.append(fld.copy())
    except SolverAbort as exc:
        result.status, result.message, result.steps = "aborted", str(exc), steps
        if raise_on_abort:
            exc.result = result
            raise
        return result
    result.steps = steps
    log.info("integration finished: %d steps, drift %s", steps, drift)
    return result


def _monitor(fld, left, right, grid):
    m = MONITOR_CELLS
    dev = max(
        np.max(np.abs(fld.v[:m] - left.v)), np.max(np.abs(fld.theta[:m] - left.theta)),
        np.max(np.abs(fld.u[1:m + 1] - left.u)),
        np.max(np.abs(fld.v[-m:] - right.v)), np.max(np.abs(fld.theta[-m:] - right.theta)),
        np.max(np.abs(fld.u[-m - 1:-1] - right.u)),
    )
    if dev > MONITOR_TOL:
        raise BoundaryTouchError(
            f"wave reached the boundary at tau={fld.tau:.6g} (deviation {dev:.3e})", fld.tau,
            grid.half_width)
