import math

import numpy as np
import pytest
import sympy as sp

from visclimit.gas import GasParams, State
from visclimit.solver import (BoundaryTouchError, Field, Grid1D, PositivityError, SolverConfig, _Kernel,
                              check_domain, init_riemann, integrate, stable_dt, step)

G = GasParams(5.0 / 3.0, 1.0)
UNIT = State(1.0, 0.0, 1.0)
LEFT, RIGHT = State(1.0, 0.0, 1.0), State(1.1, 0.15, 1.05)


def test_grid_basics():
    g = Grid1D(2.0, 8)
    assert g.dy == 0.5
    assert g.nodes[g.interface_index] == 0.0
    assert len(g.cells) == 8 and len(g.nodes) == 9
    with pytest.raises(ValueError):
        Grid1D(2.0, 7)
    with pytest.raises(ValueError):
        Grid1D(-1.0, 8)


@pytest.mark.parametrize("kwargs", [
    dict(cfl=1.0), dict(cfl=0.0), dict(smoothing_cells=-1), dict(tau_end=0.0), dict(mode="euler"),
    dict(mode="physical", epsilon=0.1, kappa=1e3), dict(nu=0.0),
])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_init_riemann_sharp():
    grid = Grid1D(4.0, 16)
    f = init_riemann(grid, LEFT, RIGHT)
    k = grid.interface_index
    assert np.all(f.v[:k] == 1.0) and np.all(f.v[k:] == 1.1)
    assert f.v[k] - f.v[k - 1] == pytest.approx(0.1, abs=1e-15)
    assert f.u[k] == pytest.approx(0.075)


def test_init_riemann_constant_and_smoothed():
    grid = Grid1D(4.0, 64)
    f = init_riemann(grid, UNIT, UNIT, smoothing_cells=4)
    assert np.all(f.v == 1.0) and np.all(f.u == 0.0)
    f = init_riemann(grid, LEFT, RIGHT, smoothing_cells=4)
    slope = np.max(np.abs(np.diff(f.v))) / grid.dy
    assert 0.1 / (8 * grid.dy) < slope < 0.1 / (1 * grid.dy)


def test_stable_dt_formula():
    grid = Grid1D(1.0, 200)   # dy = 0.01
    f = init_riemann(grid, UNIT, UNIT)
    cfg = SolverConfig(nu=1.0, cfl=0.4)
    expected = 0.4 * min(0.01 / math.sqrt(5 / 3), 5e-5, 1e-4 / (2 * (2 / 3)))
    assert stable_dt(f, cfg, G, grid) == pytest.approx(expected, rel=1e-14)
    cfg2 = SolverConfig(nu=2.0, cfl=0.4)
    assert stable_dt(f, cfg2, G, grid) == pytest.approx(0.5 * expected, rel=1e-14)


def test_stable_dt_acoustic_limited():
    grid = Grid1D(8.0, 4)   # dy = 4
    f = init_riemann(grid, UNIT, UNIT)
    cfg = SolverConfig(nu=0.01, cfl=0.5)
    assert stable_dt(f, cfg, G, grid) == pytest.approx(0.5 * 4 / math.sqrt(5 / 3), rel=1e-14)


def test_constant_field_unchanged():
    grid = Grid1D(30.0, 200)
    cfg = SolverConfig(tau_end=2.0, snapshot_times=[1.0, 2.0])
    res = integrate(grid, cfg, G, State(1.2, 0.3, 0.8), State(1.2, 0.3, 0.8))
    for s in res.snapshots:
        assert np.max(np.abs(s.v - 1.2)) < 1e-14 and np.max(np.abs(s.u - 0.3)) < 1e-14
        assert np.max(np.abs(s.theta - 0.8)) < 1e-14


def test_conservation_drift():
    grid = Grid1D(30.0, 600)
    cfg = SolverConfig(tau_end=3.0, smoothing_cells=8, cfl=0.4)
    res = integrate(grid, cfg, G, LEFT, RIGHT)
    for k in ("mass", "momentum", "energy"):
        assert res.max_drift[k] < 1e-10, (k, res.max_drift[k])


def test_sharp_jump_mass_momentum_drift():
    grid = Grid1D(30.0, 600)
    res = integrate(grid, SolverConfig(tau_end=1.0), G, LEFT, RIGHT)
    assert res.max_drift["mass"] < 1e-10 and res.max_drift["momentum"] < 1e-10


def test_snapshot_times_hit_exactly():
    grid = Grid1D(30.0, 200)
    cfg = SolverConfig(tau_end=1.0, snapshot_times=[0.0, 0.123, 0.5])
    res = integrate(grid, cfg, G, LEFT, RIGHT)
    assert [s.tau for s in res.snapshots] == [0.0, 0.123, 0.5, 1.0]


def test_positivity_abort():
    grid = Grid1D(1.0, 8)
    kernel = _Kernel(G, grid, 1.0, 1.0, UNIT, UNIT)
    f = init_riemann(grid, UNIT, UNIT)
    f.u[4] = 50.0
    with pytest.raises(PositivityError) as info:
        step(f, 0.5, kernel)
    assert info.value.tau == 0.0


def test_boundary_touch_abort():
    grid = Grid1D(3.0, 60)
    cfg = SolverConfig(tau_end=5.0)
    with pytest.raises(BoundaryTouchError):
        integrate(grid, cfg, G, LEFT, RIGHT, check_domain_size=False)
    res = integrate(grid, cfg, G, LEFT, RIGHT, check_domain_size=False, raise_on_abort=False)
    assert res.status == "aborted" and "boundary" in res.message


def test_domain_check():
    with pytest.raises(ValueError, match="domain too small"):
        check_domain(Grid1D(10.0, 100), SolverConfig(tau_end=10.0), LEFT, RIGHT, G)


def test_galilean_shift():
    grid = Grid1D(30.0, 300)
    cfg = SolverConfig(tau_end=2.0)
    c = 0.7
    a = integrate(grid, cfg, G, LEFT, RIGHT).snapshots[-1]
    b = integrate(grid, cfg, G, State(LEFT.v, LEFT.u + c, LEFT.theta),
                  State(RIGHT.v, RIGHT.u + c, RIGHT.theta)).snapshots[-1]
    assert np.max(np.abs(b.u - a.u - c)) < 1e-12
    assert np.max(np.abs(b.v - a.v)) < 1e-12 and np.max(np.abs(b.theta - a.theta)) < 1e-12


def test_scaled_physical_consistency():
    nu, eps = 0.8, 0.05
    grid = Grid1D(30.0, 600)
    scaled = integrate(grid, SolverConfig(nu=nu, tau_end=4.0, smoothing_cells=4), G, LEFT, RIGHT)
    phys = integrate(grid.scaled(eps), SolverConfig(mode="physical", epsilon=eps, kappa=nu * eps,
                                                    tau_end=4.0 * eps, smoothing_cells=4),
                     G, LEFT, RIGHT)
    a, b = scaled.snapshots[-1], phys.snapshots[-1]
    dy = grid.dy
    l2 = math.sqrt(dy * (np.sum((a.v - b.v) ** 2) + np.sum((a.u - b.u) ** 2) + np.sum((a.theta - b.theta) ** 2)))
    assert l2 < 5 * dy ** 2


def test_pure_contact_smooths_u_theta_keeps_v_gradient():
    grid = Grid1D(20.0, 800)
    left, right = State(1.0, 0.0, 1.0), State(1.2, 0.0, 1.2)
    snap = integrate(grid, SolverConfig(tau_end=4.0), G, left, right).snapshots[-1]
    k = grid.interface_index
    assert np.max(np.abs(np.diff(snap.u))) < 0.05 * 0.2
    assert np.max(np.abs(np.diff(snap.theta))) < 0.05 * 0.2
    assert snap.v[k] - snap.v[k - 1] > 10 * np.median(np.abs(np.diff(snap.v)))


# ------------------------------------------------------ manufactured solution

def _manufactured(g, nu):
    y, t = sp.symbols("y t", real=True)
    bump = sp.exp(-y ** 2)
    v = 1 + sp.Rational(1, 5) * bump * sp.sin(1 + t)
    u = sp.Rational(1, 10) * y * bump * sp.cos(2 * t)
    th = 1 + sp.Rational(3, 20) * bump * (1 + sp.sin(t))
    R, gam = sp.Float(g.R), sp.Float(g.gamma)
    p = R * th / v
    sv = sp.diff(v, t) - sp.diff(u, y)
    su = sp.diff(u, t) + sp.diff(p, y) - sp.diff(sp.diff(u, y) / v, y)
    st = sp.diff(th, t) - (gam - 1) / R * (-p * sp.diff(u, y) + nu * sp.diff(sp.diff(th, y) / v, y)
                                             + sp.diff(u, y) ** 2 / v)
    f = lambda e: sp.lambdify((t, y), e, "numpy")
    return f(v), f(u), f(th), f(sv), f(su), f(st)


def test_manufactured_convergence_order():
    nu = 1.0
    v, u, th, sv, su, st = _manufactured(G, nu)

    def run(n):
        grid = Grid1D(8.0, n)
        yc, yn = grid.cells, grid.nodes
        init = Field(0.0, v(0.0, yc), u(0.0, yn), th(0.0, yc))
        cfg = SolverConfig(nu=nu, tau_end=0.5, cfl=0.4)
        src = lambda tau, gr: (sv(tau, yc), su(tau, yn), st(tau, yc))
        s = integrate(grid, cfg, G, UNIT, UNIT, source=src, initial=init, monitor=False,
                      check_domain_size=False).snapshots[-1]
        err = np.concatenate([s.v - v(0.5, yc), s.u - u(0.5, yn), s.theta - th(0.5, yc)])
        return math.sqrt(grid.dy * np.sum(err ** 2))

    e = [run(n) for n in (64, 128, 256)]
    orders = [math.log2(e[0] / e[1]), math.log2(e[1] / e[2])]
    assert min(orders) >= 1.8, (e, orders)
