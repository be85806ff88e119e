"""Smooth wave profiles for the scaled Navier-Stokes system.

Three building blocks are superposed:

* the viscous contact wave, built from the self-similar solution of
  ``Theta_tau = a (Theta_y / Theta)_y``;
* two approximate rarefaction waves, obtained by pushing the smoothed Burgers
  solution (initial data ``tanh y``, evaluated at time ``1 + tau``) through
  the characteristic speed along the isentrope;
* their sum minus the intermediate-state constants.

All evaluators are vectorized over ``y`` at a fixed ``tau`` and return
values together with first/second ``y``-derivatives and ``tau``-derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded
from scipy.special import expit

from .gas import GasParams, pressure
from .numerics import invert_monotone
from .riemann import (
    RiemannPattern,
    ZERO_WAVE,
    fan_anchor,
    fan_volumes,
    isentrope_speed,
    velocity_change_closed,
)

BVP_POINTS = 4001
XI_DEFAULT = 12.0


class BVPError(RuntimeError):
    """Damped Newton failed on the self-similar boundary value problem."""

    def __init__(self, message, trace):
        super().__init__(f"{message}; residual trace: " + ", ".join(f"{r:.2e}" for r in trace))
        self.trace = list(trace)


class ProfilePositivityError(ValueError):
    pass


# ---------------------------------------------------------------- Burgers


def burgers_exact(w_minus, w_plus, tau, y):
    """Centered rarefaction of the inviscid Burgers equation."""
    return np.clip(np.asarray(y, dtype=float) / tau, w_minus, w_plus)


def _sech2(x):
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def _burgers_full(w_minus, w_plus, tau, y):
    """Smoothed Burgers solution with ``w``, ``w_y``, ``w_yy`` and ``w - w_-``, ``w_+ - w``."""
    y = np.asarray(y, dtype=float)
    d = 0.5 * (w_plus - w_minus)
    m = 0.5 * (w_plus + w_minus)

    def w0(x):
        return m + d * np.tanh(x)

    def dw0(x):
        return d * _sech2(x)

    if tau == 0.0:
        x0 = y.copy()
    else:
        lo = y - w_plus * tau
        hi = y - w_minus * tau
        tol = 1e-12 * (1.0 + np.abs(y))
        x0 = invert_monotone(lambda x: x + w0(x) * tau, lambda x: 1.0 + dw0(x) * tau,
                             y, lo, hi, x0=y - m * tau, tol=tol)
        resid = np.abs(x0 + w0(x0) * tau - y)
        assert np.all(resid <= tol), "characteristic equation not solved"
    gap_lo = 2.0 * d * expit(2.0 * x0)    # w - w_-
    gap_hi = 2.0 * d * expit(-2.0 * x0)   # w_+ - w
    w = np.where(x0 < 0.0, w_minus + gap_lo, w_plus - gap_hi)
    s2 = _sech2(x0)
    dw = d * s2
    jac = 1.0 + dw * tau
    w_y = dw / jac
    w_yy = -2.0 * d * s2 * np.tanh(x0) / jac ** 3
    return w, w_y, w_yy, gap_lo, gap_hi


def burgers_smooth(w_minus, w_plus, tau, y):
    """Solution ``(w, w_y)`` of Burgers' equation from ``w_0 = m + d tanh y``.

    The foot ``x0`` of the characteristic through ``(tau, y)`` solves
    ``x0 + w_0(x0) tau = y``; the map is strictly increasing, so a bracketed
    Newton iteration always converges.
    """
    if not w_minus < w_plus:
        raise ValueError("need w_minus < w_plus")
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    w, w_y, _, _, _ = _burgers_full(w_minus, w_plus, tau, y)
    return w, w_y


# ------------------------------------------------------ self-similar contact


@dataclass(frozen=True)
class SelfSimilarProfile:
    """Tabulated ``Theta_hat(xi)`` with ``-(xi/2) Theta' = a (Theta'/Theta)'``."""

    theta_left: float
    theta_right: float
    a: float
    xi_grid: np.ndarray
    theta_hat: np.ndarray
    theta_hat_prime: np.ndarray
    newton_trace: tuple = ()
    _spline: CubicSpline = field(default=None, repr=False, compare=False)

    @property
    def half_width(self) -> float:
        return float(self.xi_grid[-1])

    def ode_residual(self) -> np.ndarray:
        return _bvp_residual(self.theta_hat, self.xi_grid, self.a, self.theta_left, self.theta_right)

    def __call__(self, xi):
        """``(G, G')`` at ``xi``; clamped to the far-field constants outside the grid."""
        xi = np.asarray(xi, dtype=float)
        if self._spline is None:
            g = np.full_like(xi, self.theta_left)
            return np.where(xi > 0, self.theta_right, g), np.zeros_like(xi)
        X = self.half_width
        inside = np.abs(xi) <= X
        G = np.where(xi < -X, self.theta_left, self.theta_right)
        Gp = np.zeros_like(xi)
        if np.any(inside):
            G = np.where(inside, self._spline(np.clip(xi, -X, X)), G)
            Gp = np.where(inside, self._spline(np.clip(xi, -X, X), 1), 0.0)
        return G, Gp


def _bvp_residual(theta, xi, a, tl, tr):
    h = xi[1] - xi[0]
    ln = np.log(theta)
    r = a * (ln[2:] - 2.0 * ln[1:-1] + ln[:-2]) / h ** 2 \
        + 0.5 * xi[1:-1] * (theta[2:] - theta[:-2]) / (2.0 * h)
    return r


def default_half_width(theta_left, theta_right, a, floor=XI_DEFAULT):
    """Smallest ``Xi`` with ``gap * exp(-Xi^2 / (8 a)) < 1e-9``, never below ``floor``."""
    gap = abs(theta_right - theta_left)
    if gap <= 1e-9:
        return floor
    return max(floor, math.sqrt(8.0 * a * math.log(gap / 1e-9)))


def solve_self_similar(theta_left, theta_right, a, Xi=None, n_points=BVP_POINTS,
                       tol=1e-10, max_iter=50) -> SelfSimilarProfile:
    """Solve the self-similar nonlinear diffusion BVP by damped Newton.

    Second-order central differences on a uniform grid over ``[-Xi, Xi]``
    with Dirichlet data ``theta_left``/``theta_right``; the initial guess is
    the linear interpolant. The damping factor is halved whenever a trial
    step increases the residual.

    Raises
    ------
    BVPError
        Newton did not reach ``tol`` within ``max_iter`` iterations.
    """
    if theta_left <= 0 or theta_right <= 0:
        raise ValueError("temperatures must be positive")
    if a <= 0:
        raise ValueError("diffusion coefficient must be positive")
    if Xi is None:
        Xi = default_half_width(theta_left, theta_right, a)
    xi = np.linspace(-Xi, Xi, n_points)
    if theta_left == theta_right:
        th = np.full(n_points, float(theta_left))
        return SelfSimilarProfile(theta_left, theta_right, a, xi, th, np.zeros(n_points), (0.0,))

    h = xi[1] - xi[0]
    theta = theta_left + (theta_right - theta_left) * (xi + Xi) / (2.0 * Xi)
    res = _bvp_residual(theta, xi, a, theta_left, theta_right)
    norm = np.max(np.abs(res))
    trace = [norm]
    it = 0
    while norm >= tol:
        if it >= max_iter:
            raise BVPError("self-similar BVP: Newton did not converge", trace)
        inner = theta[1:-1]
        ab = np.zeros((3, n_points - 2))
        ab[0, 1:] = a / (h ** 2 * theta[2:-1]) + xi[1:-2] / (4.0 * h)
        ab[1, :] = -2.0 * a / (h ** 2 * inner)
        ab[2, :-1] = a / (h ** 2 * theta[1:-2]) - xi[2:-1] / (4.0 * h)
        step = solve_banded((1, 1), ab, -res)
        damp = 1.0
        while True:
            trial = theta.copy()
            trial[1:-1] = inner + damp * step
            if np.all(trial > 0):
                r_new = _bvp_residual(trial, xi, a, theta_left, theta_right)
                n_new = np.max(np.abs(r_new))
                if n_new < norm or damp < 1e-6:
                    break
            damp *= 0.5
            if damp < 1e-6:
                raise BVPError("self-similar BVP: damping underflow", trace)
        theta, res, norm = trial, r_new, n_new
        trace.append(norm)
        it += 1

    spline = CubicSpline(xi, theta)
    return SelfSimilarProfile(theta_left, theta_right, a, xi, theta, spline(xi, 1),
                              tuple(trace), spline)


# ----------------------------------------------------------- profile values


@dataclass
class ProfileValues:
    """Profile values and derivatives on a set of points at one time.

    Attribute suffixes: ``_y`` / ``_yy`` space derivatives, ``_t`` the
    derivative in the scaled time ``tau``.
    """

    V: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    V_y: np.ndarray
    U_y: np.ndarray
    Theta_y: np.ndarray
    V_yy: np.ndarray
    U_yy: np.ndarray
    Theta_yy: np.ndarray
    V_t: np.ndarray
    U_t: np.ndarray
    Theta_t: np.ndarray

    @classmethod
    def constant(cls, y, v, u, theta):
        z = np.zeros_like(np.asarray(y, dtype=float))
        return cls(z + v, z + u, z + theta, *(z.copy() for _ in range(9)))


@dataclass(frozen=True)
class WaveProfileSet:
    g: GasParams
    nu: float
    pattern: RiemannPattern
    contact: SelfSimilarProfile
    burgers1: tuple[float, float]
    burgers3: tuple[float, float]

    @property
    def contact_pressure(self) -> float:
        return pressure(self.g, self.pattern.star_upper)


def build_profile_set(pattern: RiemannPattern, nu: float, nu_bounds=(1e-3, 1e3),
                      n_points=BVP_POINTS, Xi=None) -> WaveProfileSet:
    """Assemble the viscous contact wave and both approximate rarefactions."""
    nu0, nu1 = nu_bounds
    if not 0 < nu0 <= nu <= nu1:
        raise ValueError(f"nu={nu} outside admissible range [{nu0}, {nu1}]")
    g = pattern.g
    p_m = pressure(g, pattern.star_upper)
    a = nu * p_m * (g.gamma - 1.0) / (g.R ** 2 * g.gamma)
    contact = solve_self_similar(pattern.star.theta, pattern.star_upper.theta, a,
                                 Xi=Xi, n_points=n_points)
    return WaveProfileSet(g, float(nu), pattern, contact, pattern.fan1, pattern.fan3)


def viscous_contact_eval(ps: WaveProfileSet, tau, y) -> ProfileValues:
    """Viscous contact wave through the intermediate states.

    ``V = R Theta_hat / p``, ``U = u + k (ln Theta_hat)_y`` with
    ``k = nu (gamma-1)/(R gamma)``, and
    ``Theta = Theta_hat + b Theta_hat_tau`` with ``b = (R gamma - nu(gamma-1))/(R gamma p)``
    so that the momentum equation holds exactly. Higher ``xi``-derivatives of
    ``Theta_hat`` come from the ODE, not from the table.
    """
    g, nu = ps.g, ps.nu
    R, gam = g.R, g.gamma
    p = ps.contact_pressure
    u_m = ps.pattern.star_upper.u
    a = ps.contact.a
    k = nu * (gam - 1.0) / (R * gam)
    b = (R * gam - nu * (gam - 1.0)) / (R * gam * p)
    T = 1.0 + tau
    s = math.sqrt(T)
    y = np.asarray(y, dtype=float)
    xi = y / s
    G, G1 = ps.contact(xi)
    G2 = G1 ** 2 / G - xi * G * G1 / (2.0 * a)
    G3 = 2.0 * G1 * G2 / G - G1 ** 3 / G ** 2 - (G * G1 + xi * G1 ** 2 + xi * G * G2) / (2.0 * a)
    H = G1 / G
    H1 = -xi * G1 / (2.0 * a)
    H2 = -(G1 + xi * G2) / (2.0 * a)
    J = xi * G1
    J1 = G1 + xi * G2
    J2 = 2.0 * G2 + xi * G3

    V = R * G / p
    V_y = R * G1 / (p * s)
    V_yy = R * G2 / (p * T)
    V_t = -R * xi * G1 / (2.0 * p * T)
    U = u_m + k * H / s
    U_y = k * H1 / T
    U_yy = k * H2 / T ** 1.5
    U_t = -k * (H + xi * H1) / (2.0 * T ** 1.5)
    Th = G - b * J / (2.0 * T)
    Th_y = G1 / s - b * J1 / (2.0 * T ** 1.5)
    Th_yy = G2 / T - b * J2 / (2.0 * T ** 2)
    Th_t = -J / (2.0 * T) + b * (xi * J1 + 2.0 * J) / (4.0 * T ** 2)
    return ProfileValues(V, U, Th, V_y, U_y, Th_y, V_yy, U_yy, Th_yy, V_t, U_t, Th_t)


def approx_rarefaction_eval(ps: WaveProfileSet, family: int, tau, y) -> ProfileValues:
    """Approximate ``family``-rarefaction at scaled time ``tau``.

    ``lambda(V, s) = w`` where ``w`` is the smoothed Burgers solution at time
    ``1 + tau``; ``Theta`` follows the isentrope and ``U`` the wave curve.
    """
    if family not in (1, 3):
        raise ValueError("family must be 1 or 3")
    g = ps.g
    pat = ps.pattern
    y = np.asarray(y, dtype=float)
    w_minus, w_plus = ps.burgers1 if family == 1 else ps.burgers3
    anchor = fan_anchor(pat, family)
    v_head, v_tail = fan_volumes(pat, family)
    if w_plus - w_minus <= ZERO_WAVE * (1.0 + abs(w_minus)) or abs(v_tail - v_head) < ZERO_WAVE * v_head:
        st = pat.left if family == 1 else pat.right
        return ProfileValues.constant(y, st.v, st.u, st.theta)

    T = 1.0 + tau
    w, w_y, w_yy, _, _ = _burgers_full(w_minus, w_plus, T, y)
    w_t = -w * w_y
    kk = 0.5 * (g.gamma + 1.0)
    lo, hi = min(v_head, v_tail), max(v_head, v_tail)

    def lam(v):
        return isentrope_speed(g, anchor, v, family)

    w_in = np.clip(w, min(w_minus, w_plus), max(w_minus, w_plus))
    V = invert_monotone(lam, lambda v: -kk * lam(v) / v, w_in, lo, hi, tol=1e-12 * (1.0 + abs(w_minus)))
    lm = lam(V)
    dl = -kk * lm / V
    d2l = kk * (kk + 1.0) * lm / V ** 2
    V_y = w_y / dl
    V_yy = (w_yy - d2l * V_y ** 2) / dl
    V_t = w_t / dl
    gm1 = g.gamma - 1.0
    Th = anchor.theta * (anchor.v / V) ** gm1
    dTh = -gm1 * Th / V
    d2Th = gm1 * g.gamma * Th / V ** 2
    U = anchor.u + velocity_change_closed(g, anchor, V, family)
    return ProfileValues(
        V, U, Th,
        V_y, -lm * V_y, dTh * V_y,
        V_yy, -dl * V_y ** 2 - lm * V_yy, d2Th * V_y ** 2 + dTh * V_yy,
        V_t, -lm * V_t, dTh * V_t,
    )


_FIELDS = ("V", "U", "Theta", "V_y", "U_y", "Theta_y", "V_yy", "U_yy", "Theta_yy", "V_t", "U_t", "Theta_t")


def superposition_eval(ps: WaveProfileSet, tau, y, check_positive=True) -> ProfileValues:
    """Sum of the three profiles minus the intermediate-state constants."""
    r1 = approx_rarefaction_eval(ps, 1, tau, y)
    cd = viscous_contact_eval(ps, tau, y)
    r3 = approx_rarefaction_eval(ps, 3, tau, y)
    st, su = ps.pattern.star, ps.pattern.star_upper
    out = ProfileValues(*(getattr(r1, f) + getattr(cd, f) + getattr(r3, f) for f in _FIELDS))
    out.V = out.V - (st.v + su.v)
    out.U = out.U - (st.u + su.u)
    out.Theta = out.Theta - (st.theta + su.theta)
    if check_positive:
        bad = (out.V <= 0) | (out.Theta <= 0)
        if np.any(bad):
            i = int(np.argmax(bad))
            yy = np.broadcast_to(np.asarray(y, dtype=float), bad.shape)[i]
            raise ProfilePositivityError(
                f"superposed profile loses positivity at tau={tau}, y={yy}: "
                "wave strength too large for the profile ansatz"
            )
    return out


# ----------------------------------------------------------------- residuals


def _momentum_defect(pv: ProfileValues, g: GasParams):
    R = g.R
    P_y = R * (pv.Theta_y / pv.V - pv.Theta * pv.V_y / pv.V ** 2)
    visc_y = pv.U_yy / pv.V - pv.U_y * pv.V_y / pv.V ** 2
    return pv.U_t + P_y - visc_y


def _energy_defect(pv: ProfileValues, g: GasParams, nu: float):
    R, gam = g.R, g.gamma
    P = R * pv.Theta / pv.V
    heat_y = pv.Theta_yy / pv.V - pv.Theta_y * pv.V_y / pv.V ** 2
    return R / (gam - 1.0) * pv.Theta_t + P * pv.U_y - nu * heat_y - pv.U_y ** 2 / pv.V


def _fd_values(evaluator, tau, y, h_rel=1e-5):
    """Rebuild derivatives of ``evaluator`` by central differences."""
    y = np.asarray(y, dtype=float)
    hy = h_rel * (1.0 + np.abs(y))
    ht = h_rel * (1.0 + tau)
    c = evaluator(tau, y)
    yp, ym = evaluator(tau, y + hy), evaluator(tau, y - hy)
    tp, tm = evaluator(tau + ht, y), evaluator(tau - ht, y)
    out = {}
    for f in ("V", "U", "Theta"):
        out[f] = getattr(c, f)
        out[f + "_y"] = (getattr(yp, f) - getattr(ym, f)) / (2.0 * hy)
        out[f + "_yy"] = (getattr(yp, f) - 2.0 * getattr(c, f) + getattr(ym, f)) / hy ** 2
        out[f + "_t"] = (getattr(tp, f) - getattr(tm, f)) / (2.0 * ht)
    return ProfileValues(**out)


@dataclass
class Residuals:
    Q_cd: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    mass: np.ndarray


def residuals(ps: WaveProfileSet, tau, y, mode="analytic", mass_tol=1e-7) -> Residuals:
    """Defects of the superposed profile in the scaled Navier-Stokes system.

    ``Q1`` is the momentum defect, ``Q2`` the energy defect of the superposed
    profile; ``Q_cd`` the energy defect of the viscous contact wave alone. In
    ``mode="fd"`` every derivative is rebuilt by central differences
    (step ``1e-5 (1+|y|)``) instead of the chain rules.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if mode == "analytic":
        sup = superposition_eval(ps, tau, y)
        cd = viscous_contact_eval(ps, tau, y)
    elif mode == "fd":
        sup = _fd_values(lambda t, yy: superposition_eval(ps, t, yy), tau, y)
        cd = _fd_values(lambda t, yy: viscous_contact_eval(ps, t, yy), tau, y)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    mass = sup.V_t - sup.U_y
    if mode == "analytic":
        assert np.all(np.abs(mass) < mass_tol), f"mass defect {np.max(np.abs(mass)):.3e}"
    return Residuals(
        Q_cd=_energy_defect(cd, ps.g, ps.nu),
        Q1=_momentum_defect(sup, ps.g),
        Q2=_energy_defect(sup, ps.g, ps.nu),
        mass=mass,
    )
