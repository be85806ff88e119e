"""Experiments comparing solver output with the Euler Riemann solution and the smooth profile."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import linregress

from .gas import GasParams, State
from .profiles import WaveProfileSet, superposition_eval
from .riemann import RiemannPattern, eval_exact_array
from .solver import Field, Grid1D, SolverAbort, SolverConfig, integrate

FIT_START = 5.0
JUMP_FLOOR = 1e-12


class EmptyRegionError(ValueError):
    """No grid point of the stored snapshots lies in the region."""


@dataclass(frozen=True)
class SigmaRegion:
    """``t >= h`` and ``|x| / sqrt(eps + t) >= h eps^alpha``.

    ``one_sided=True`` drops the absolute value (``x / sqrt(eps + t)``),
    which keeps only the right half-line.
    """

    h: float
    alpha: float
    epsilon: float
    one_sided: bool = False

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError("alpha must lie in [0, 1/2)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def contains(self, t, x):
        x = np.asarray(x, dtype=float)
        xx = x if self.one_sided else np.abs(x)
        return (t >= self.h) & (xx / np.sqrt(self.epsilon + t) >= self.h * self.epsilon ** self.alpha)


@dataclass
class DecaySeries:
    times: np.ndarray
    values: np.ndarray
    fitted_rate: float = float("nan")
    fit_quality: float = float("nan")
    kind: str = "power"
    window: tuple = ()
    floored: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("values must be non-negative")


def fit_decay(times, values, kind="power"):
    """Least-squares slope of ``ln value`` against ``ln t`` (power) or ``t`` (exponential).

    Returns ``(rate, r2)``; a negative rate means decay. Both are NaN when
    fewer than two points remain or a value is zero.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) < 2 or np.any(v <= 0) or np.all(v == v[0]):
        return float("nan"), float("nan")
    x = np.log(t) if kind == "power" else t
    fit = linregress(x, np.log(v))
    return float(fit.slope), float(fit.rvalue ** 2)


def _positions(grid: Grid1D):
    return grid.cells, grid.nodes


def sup_error_sigma(snapshots, grid: Grid1D, pattern: RiemannPattern, region: SigmaRegion) -> float:
    """Largest componentwise deviation from the Euler solution over region points.

    ``v`` and ``theta`` are compared at cell centres, ``u`` at nodes, each only
    where that point belongs to the region. Snapshot times are physical times.
    """
    yc, yn = _positions(grid)
    worst = -1.0
    for snap in snapshots:
        t = snap.tau
        if t < region.h:
            continue
        mc = region.contains(t, yc)
        mn = region.contains(t, yn)
        if mc.any():
            ve, _, te = eval_exact_array(pattern, t, yc[mc])
            worst = max(worst, float(np.max(np.abs(snap.v[mc] - ve))),
                        float(np.max(np.abs(snap.theta[mc] - te))))
        if mn.any():
            _, ue, _ = eval_exact_array(pattern, t, yn[mn])
            worst = max(worst, float(np.max(np.abs(snap.u[mn] - ue))))
    if worst < 0:
        raise EmptyRegionError(
            f"no grid point in the region (h={region.h}, alpha={region.alpha}, eps={region.epsilon})"
        )
    return worst


def profile_gap(snap: Field, grid: Grid1D, ps: WaveProfileSet) -> float:
    yc, yn = _positions(grid)
    pc = superposition_eval(ps, snap.tau, yc)
    pn = superposition_eval(ps, snap.tau, yn)
    return max(float(np.max(np.abs(snap.v - pc.V))), float(np.max(np.abs(snap.u - pn.U))),
               float(np.max(np.abs(snap.theta - pc.Theta))))


def asymptotic_gap(snapshots, grid: Grid1D, ps: WaveProfileSet, fit_start=FIT_START) -> DecaySeries:
    """Sup-norm distance to the superposed profile per snapshot, power-law fit on the tail half."""
    snaps = [s for s in snapshots if s.tau > 0]
    times = np.array([s.tau for s in snaps])
    values = np.array([profile_gap(s, grid, ps) for s in snaps])
    eligible = np.flatnonzero(times >= fit_start)
    sel = eligible[len(eligible) // 2:] if len(eligible) >= 4 else eligible
    rate, r2 = fit_decay(times[sel], values[sel], "power") if len(sel) >= 2 else (float("nan"),) * 2
    window = (float(times[sel[0]]), float(times[sel[-1]])) if len(sel) else ()
    return DecaySeries(times, values, rate, r2, "power", window)


JUMP_PROXIES = ("adjacent", "extrapolated")


def interface_jumps(snap: Field, grid: Grid1D, proxy="adjacent") -> dict:
    """Discrete jumps across the interface node: ``[v]``, ``[u_y]``, ``[theta_y]``.

    With ``proxy="adjacent"``, ``[v]`` is the difference of the two cells
    adjacent to the node. That difference also carries ``dy * V_y`` from the
    smooth part, so it levels off once the true jump falls below it.
    ``proxy="extrapolated"`` extrapolates each side linearly to the node
    from two cells, which removes the ``O(dy)`` term.
    """
    if proxy not in JUMP_PROXIES:
        raise ValueError(f"proxy must be one of {JUMP_PROXIES}, got {proxy!r}")
    k = grid.interface_index
    dy = grid.dy
    v, u, th = snap.v, snap.u, snap.theta
    if proxy == "adjacent":
        jv = v[k] - v[k - 1]
    else:
        jv = (1.5 * v[k] - 0.5 * v[k + 1]) - (1.5 * v[k - 1] - 0.5 * v[k - 2])
    return {
        "v": abs(jv),
        "u_y": abs((u[k + 1] - u[k]) - (u[k] - u[k - 1])) / dy,
        "theta_y": abs((th[k + 1] - th[k]) - (th[k - 1] - th[k - 2])) / dy,
    }


def jump_series(snapshots, grid: Grid1D, window=None, quantity="v", floor=JUMP_FLOOR,
                proxy="adjacent") -> DecaySeries:
    """Interface jump per snapshot with an exponential fit over ``window``.

    The default window is ``[5, tau_end / 2]``. Values under ``floor`` are
    cut off and the series flagged.
    """
    snaps = [s for s in snapshots if s.tau > 0]
    times = np.array([s.tau for s in snaps])
    values = np.array([interface_jumps(s, grid, proxy)[quantity] for s in snaps])
    if window is None:
        window = (FIT_START, times[-1] / 2.0)
    floored = bool(np.any(values < floor))
    keep = values >= floor
    sel = keep & (times >= window[0]) & (times <= window[1])
    rate, r2 = fit_decay(times[sel], values[sel], "exp") if sel.sum() >= 2 else (float("nan"),) * 2
    return DecaySeries(times, np.where(keep, values, floor), rate, r2, "exp", tuple(window), floored)


def perturbation_norms(snap: Field, grid: Grid1D, ps: WaveProfileSet) -> dict:
    """L2, piecewise-H1 seminorm and sup norm of ``(v, u, theta) - (V, U, Theta)``."""
    yc, yn = _positions(grid)
    dy = grid.dy
    k = grid.interface_index
    pc = superposition_eval(ps, snap.tau, yc)
    pn = superposition_eval(ps, snap.tau, yn)
    phi = snap.v - pc.V
    psi = snap.u - pn.U
    zeta = snap.theta - pc.Theta
    l2 = math.sqrt(dy * float(np.sum(phi ** 2) + np.sum(psi ** 2) + np.sum(zeta ** 2)))

    def dcell(f):
        d = np.diff(f) / dy
        return np.delete(d, k - 1)  # drop the difference straddling y = 0

    d2 = np.sum(dcell(phi) ** 2) + np.sum(dcell(zeta) ** 2) + np.sum((np.diff(psi) / dy) ** 2)
    return {
        "l2": l2,
        "l2_deriv": math.sqrt(dy * float(d2)),
        "linf": max(float(np.max(np.abs(phi))), float(np.max(np.abs(psi))), float(np.max(np.abs(zeta)))),
    }


# ----------------------------------------------------------------- sweeps


@dataclass
class SweepRow:
    epsilon: float
    kappa: float
    nu: float
    h: float
    alpha: float
    sup_error: float
    n_cells: int
    steps: int
    drift: float
    status: str
    wall_time: float = 0.0

    CSV_COLUMNS = ("epsilon", "kappa", "nu", "h", "alpha", "sup_error", "n_cells", "steps", "drift", "status")


@dataclass(frozen=True)
class SweepSetup:
    """Fixed part of an epsilon sweep; lengths and times are physical."""

    g: GasParams
    left: State
    right: State
    nu: float = 1.0
    half_width: float = 4.0
    t_end: float = 2.0
    dy_scaled: float = 0.1
    snapshot_dt: float = 0.25
    h: float = 0.5
    alpha: float = 0.25
    cfl: float = 0.8
    one_sided: bool = False


def sweep_grid(setup: SweepSetup, eps: float) -> Grid1D:
    n = int(round(2.0 * setup.half_width / (eps * setup.dy_scaled)))
    n += n % 2
    return Grid1D(setup.half_width, n)


def run_sweep_case(setup: SweepSetup, pattern: RiemannPattern, eps: float) -> SweepRow:
    t0 = time.perf_counter()
    kappa = setup.nu * eps
    grid = sweep_grid(setup, eps)
    n_snap = int(round(setup.t_end / setup.snapshot_dt))
    times = [setup.snapshot_dt * (i + 1) for i in range(n_snap)]
    cfg = SolverConfig(mode="physical", epsilon=eps, kappa=kappa, nu=setup.nu, cfl=setup.cfl,
                       tau_end=setup.t_end, snapshot_times=times)
    region = SigmaRegion(setup.h, setup.alpha, eps, setup.one_sided)
    try:
        res = integrate(grid, cfg, setup.g, setup.left, setup.right)
        err = sup_error_sigma(res.snapshots, grid, pattern, region)
        status, steps, drift = "ok", res.steps, res.max_drift["mass"]
    except (SolverAbort, ValueError) as exc:
        err, status = float("nan"), f"failed: {exc}"
        r = getattr(exc, "result", None)
        steps = r.steps if r is not None else 0
        drift = float("nan")
    return SweepRow(eps, kappa, setup.nu, setup.h, setup.alpha, err, grid.n_cells, steps, drift,
                    status, time.perf_counter() - t0)


def max_workers() -> int:
    cap = os.environ.get("VISCLIMIT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = max(1, min(n, int(cap)))
    return n


def limit_sweep(setup: SweepSetup, epsilons, pattern: RiemannPattern = None, workers=None) -> list:
    """One row per epsilon, ``kappa = nu * epsilon``, scaled resolution held fixed.

    Rows are computed concurrently and returned in the order of ``epsilons``;
    a failing case is flagged in its status and the sweep goes on.
    """
    from .riemann import solve_pattern

    if pattern is None:
        pattern = solve_pattern(setup.g, setup.left, setup.right)
    epsilons = list(epsilons)
    workers = workers or max_workers()
    if workers <= 1 or len(epsilons) <= 1:
        return [run_sweep_case(setup, pattern, e) for e in epsilons]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda e: run_sweep_case(setup, pattern, e), epsilons))
