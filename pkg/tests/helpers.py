"""Data generators and independent oracles shared by the tests."""

import numpy as np

from visclimit.gas import GasParams, State, wave_strength


def midpoint_curve_integral(g, ref, v, family, n=1_000_000):
    """``-int_{v_ref}^{v} lambda_family(eta, s_ref) d eta`` by the composite midpoint rule."""
    eta = ref.v + (np.arange(n) + 0.5) * (v - ref.v) / n
    theta = ref.theta * (ref.v / eta) ** (g.gamma - 1.0)
    lam = np.sqrt(g.gamma * g.R * theta) / eta
    if family == 1:
        lam = -lam
    return -float(np.sum(lam)) * (v - ref.v) / n


def _u_on_branch(g, anchor, family, p, n_mid=2000):
    """Velocity reached along the isentrope through ``anchor`` at pressure ``p`` (midpoint rule)."""
    p_a = g.R * anchor.theta / anchor.v
    v = anchor.v * (p_a / p) ** (1.0 / g.gamma)
    # vectorized midpoint rule over many p at once
    s = (np.arange(n_mid) + 0.5) / n_mid
    eta = anchor.v + np.multiply.outer(v - anchor.v, s)
    theta = anchor.theta * (anchor.v / eta) ** (g.gamma - 1.0)
    lam = np.sqrt(g.gamma * g.R * theta) / eta
    integral = lam.mean(axis=-1) * (v - anchor.v)
    return anchor.u + (integral if family == 1 else -integral)


def brute_force_contact_pressure(g, left, right, n_grid=1_000_000):
    """Contact pressure from a sign-change scan on an ``n_grid`` grid, then bisection.

    Uses midpoint-rule branch velocities only; no code from the package solver.
    """
    p_hi = min(g.R * left.theta / left.v, g.R * right.theta / right.v)
    p = np.linspace(0.2 * p_hi, p_hi, n_grid)
    f = np.empty_like(p)
    chunk = 20_000
    for i in range(0, n_grid, chunk):
        pp = p[i:i + chunk]
        f[i:i + chunk] = _u_on_branch(g, left, 1, pp, 64) - _u_on_branch(g, right, 3, pp, 64)
    k = np.flatnonzero(np.diff(np.sign(f)) != 0)
    if len(k) == 0:
        return p_hi if abs(f[-1]) < 1e-9 else None
    # the coarse scan is only accurate to about 1e-6; widen before refining
    lo, hi = p[k[0]] - 1e-3 * p_hi, min(p[k[0] + 1] + 1e-3 * p_hi, p_hi)

    def fine(q):
        q = np.array([q])
        return float(_u_on_branch(g, left, 1, q, 200_000)[0] - _u_on_branch(g, right, 3, q, 200_000)[0])

    f_lo = fine(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = fine(mid)
        if (fm > 0) == (f_lo > 0):
            lo, f_lo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def random_r1cdr3(rng, gamma, max_strength=0.3):
    """Random R1-CD-R3 data of total strength at most ``max_strength``.

    Built backwards from the right state: a 3-rarefaction down to the
    contact pressure, a contact jump in temperature, then the 1-rarefaction
    back up to the left state.
    """
    g = GasParams(gamma, 1.0)
    while True:
        right = State(rng.uniform(0.7, 1.5), rng.uniform(-0.5, 0.5), rng.uniform(0.7, 1.5))
        p_r = right.theta / right.v
        p_m = p_r * (1.0 - rng.uniform(0.0, 0.12))
        v_up = right.v * (p_r / p_m) ** (1.0 / gamma)
        th_up = right.theta * (right.v / v_up) ** (gamma - 1.0)
        c = 2.0 / (gamma - 1.0)
        u_m = right.u - c * np.sqrt(gamma * right.theta) * (1.0 - (right.v / v_up) ** (0.5 * (gamma - 1.0)))
        th_star = th_up * (1.0 + rng.uniform(-0.12, 0.12))
        v_star = th_star / p_m
        p_l = p_m * (1.0 + rng.uniform(0.0, 0.12))
        v_l = v_star * (p_m / p_l) ** (1.0 / gamma)
        th_l = th_star * (v_star / v_l) ** (gamma - 1.0)
        # u_* = u_l + c sqrt(gamma th_l)(1 - (v_l / v_*)^((gamma-1)/2))
        u_l = u_m - c * np.sqrt(gamma * th_l) * (1.0 - (v_l / v_star) ** (0.5 * (gamma - 1.0)))
        left = State(v_l, u_l, th_l)
        if wave_strength(left, right) <= max_strength:
            return g, left, right, dict(p_m=p_m, u_m=u_m, v_star=v_star, v_up=v_up)
