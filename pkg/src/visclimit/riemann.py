"""Rarefaction/contact wave curves and the exact R1-CD-R3 Riemann solution.

In Lagrangian mass coordinates the contact sits at ``x = 0`` for all time
(``lambda_2 = 0``); the 1-fan lives in ``x < 0`` and the 3-fan in ``x > 0``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .gas import GasParams, State, char_speed, pressure, sound_speed, theta_on_isentrope
from .numerics import RootFindingError, adaptive_simpson, invert_monotone, newton_bisect

QUAD_TOL = 1e-11
INVERT_TOL = 1e-11
RESIDUAL_TOL = 1e-10
# fans whose curve-parameter interval is shorter than this are collapsed
ZERO_WAVE = 1e-13


class PatternClassError(ValueError):
    """Riemann data do not belong to the R1-CD-R3 class."""


class NoBracketError(PatternClassError):
    """The contact pressure could not be bracketed (vacuum or bad data)."""


def isentrope_speed(g: GasParams, ref: State, v, family: int):
    """``lambda_family(v, s_ref)``; ``v`` may be an array."""
    theta = ref.theta * (ref.v / v) ** (g.gamma - 1.0)
    c = sound_speed(g, v, theta)
    return -c if family == 1 else c


def velocity_change_along_curve(g: GasParams, ref: State, v: float, family: int,
                                tol: float = QUAD_TOL) -> float:
    """``-int_{v_ref}^{v} lambda_family(eta, s_ref) d eta`` by adaptive Simpson."""
    if family not in (1, 3):
        raise ValueError(f"family must be 1 or 3, got {family!r}")
    if v <= 0.0:
        raise ValueError(f"v must be positive, got {v}")
    return -adaptive_simpson(lambda eta: isentrope_speed(g, ref, eta, family), ref.v, v, tol)


def velocity_change_closed(g: GasParams, ref: State, v, family: int):
    """Closed form of :func:`velocity_change_along_curve`, vectorized over ``v``."""
    gm1 = g.gamma - 1.0
    mag = 2.0 / gm1 * math.sqrt(g.gamma * g.R * ref.theta) * (1.0 - (ref.v / np.asarray(v)) ** (0.5 * gm1))
    return mag if family == 1 else -mag


@dataclass(frozen=True)
class RiemannPattern:
    g: GasParams
    left: State
    right: State
    star: State
    star_upper: State
    fan1: tuple[float, float]
    fan3: tuple[float, float]
    residual: float = 0.0

    @property
    def contact_pressure(self) -> float:
        return pressure(self.g, self.star_upper)

    def summary(self) -> dict:
        g = self.g
        return {
            "v_star": self.star.v, "u_star": self.star.u, "theta_star": self.star.theta,
            "p_star": pressure(g, self.star),
            "v_star_upper": self.star_upper.v, "u_star_upper": self.star_upper.u,
            "theta_star_upper": self.star_upper.theta,
            "p_star_upper": pressure(g, self.star_upper),
            "fan1_head": self.fan1[0], "fan1_tail": self.fan1[1],
            "fan3_head": self.fan3[0], "fan3_tail": self.fan3[1],
            "residual": self.residual,
        }


def _branch(g, anchor, family, p):
    v = anchor.v * (pressure(g, anchor) / p) ** (1.0 / g.gamma)
    return v, anchor.u + velocity_change_along_curve(g, anchor, v, family)


def solve_pattern(g: GasParams, left: State, right: State) -> RiemannPattern:
    """Intermediate states of the R1-CD-R3 Riemann solution.

    The common contact pressure ``p_m`` solves ``u_*(p_m) = u^*(p_m)``, where
    ``u_*`` follows the 1-rarefaction curve out of ``left`` and ``u^*`` the
    3-rarefaction curve into ``right``.

    Raises
    ------
    NoBracketError
        No sign change of the velocity mismatch on ``(0, min(p_-, p_+)]``.
    PatternClassError
        The root violates ``u_- <= u_*`` or ``u^* <= u_+`` (a shock would form).
    """
    p_l, p_r = pressure(g, left), pressure(g, right)
    scale = 1.0 + abs(left.u) + abs(right.u) + sound_speed(g, left.v, left.theta) \
        + sound_speed(g, right.v, right.theta)

    def mismatch(p):
        return _branch(g, left, 1, p)[1] - _branch(g, right, 3, p)[1]

    def dmismatch(p):
        out = 0.0
        for anchor in (left, right):
            v = anchor.v * (pressure(g, anchor) / p) ** (1.0 / g.gamma)
            out -= sound_speed(g, v, theta_on_isentrope(g, anchor, v)) * v / (g.gamma * p)
        return out

    p_min = min(p_l, p_r)
    f_min = mismatch(p_min)
    if f_min > 0.0:
        # root above min(p_-, p_+): one of the outer waves is compressive
        side = "u_- < u_*" if p_l < p_r else "u^* < u_+"
        if p_l == p_r:
            side = "u_- < u_* and u^* < u_+"
        if abs(f_min) > 1e-12 * scale:
            raise PatternClassError(
                f"data not in R1-CD-R3: admissibility {side} fails "
                f"(velocity mismatch {f_min:.3e} > 0 at p = min(p_-, p_+))"
            )
    if abs(f_min) <= 1e-14 * scale:
        p_m = p_min
    else:
        lo = p_min
        while mismatch(lo) < 0.0:
            lo *= 0.5
            if lo < 1e-12 * p_min:
                raise NoBracketError(
                    "cannot bracket the contact pressure in (0, min(p_-, p_+)]: "
                    "data generate vacuum"
                )
        try:
            p_m = newton_bisect(mismatch, dmismatch, lo, p_min, ftol=1e-14 * scale)
        except RootFindingError as exc:
            raise NoBracketError(str(exc)) from exc

    star = _side_state(g, left, 1, p_m, p_l)
    star_upper = _side_state(g, right, 3, p_m, p_r)
    residual = star.u - star_upper.u
    if abs(residual) > RESIDUAL_TOL * scale:
        raise RootFindingError(f"contact velocity mismatch {residual:.3e} above tolerance")
    if star.u < left.u - 1e-12 * scale:
        raise PatternClassError("data not in R1-CD-R3: admissibility u_- < u_* fails")
    if star_upper.u > right.u + 1e-12 * scale:
        raise PatternClassError("data not in R1-CD-R3: admissibility u^* < u_+ fails")
    fan1 = (char_speed(g, left, 1), char_speed(g, star, 1))
    fan3 = (char_speed(g, star_upper, 3), char_speed(g, right, 3))
    return RiemannPattern(g, left, right, star, star_upper, fan1, fan3, residual)


def _side_state(g, anchor, family, p_m, p_anchor):
    if abs(p_m - p_anchor) <= ZERO_WAVE * p_anchor:
        return anchor
    v, u = _branch(g, anchor, family, p_m)
    if abs(v - anchor.v) < ZERO_WAVE * anchor.v:
        return anchor
    return State(v, u, theta_on_isentrope(g, anchor, v))


def fan_anchor(pattern: RiemannPattern, family: int) -> State:
    """The end state each fan's curve integral is taken from (the outer data)."""
    return pattern.left if family == 1 else pattern.right


def fan_volumes(pattern: RiemannPattern, family: int) -> tuple[float, float]:
    """Volumes at the head and tail of the fan."""
    if family == 1:
        return pattern.left.v, pattern.star.v
    return pattern.star_upper.v, pattern.right.v


def invert_fan(pattern: RiemannPattern, family: int, speed, v0=None):
    """Volume(s) inside the ``family`` fan with ``lambda(v, s_anchor) = speed``."""
    g = pattern.g
    anchor = fan_anchor(pattern, family)
    va, vb = fan_volumes(pattern, family)
    lo, hi = min(va, vb), max(va, vb)
    k = 0.5 * (g.gamma + 1.0)

    def f(v):
        return isentrope_speed(g, anchor, v, family)

    def df(v):
        return -k * isentrope_speed(g, anchor, v, family) / v

    if np.ndim(speed) == 0:
        s = float(speed)
        return newton_bisect(lambda v: f(v) - s, df, lo, hi, x0=v0, xtol=1e-16,
                             ftol=0.1 * INVERT_TOL)
    return invert_monotone(f, df, speed, lo, hi, x0=v0, tol=0.1 * INVERT_TOL)


class _WarmStart(threading.local):
    def __init__(self):
        self.last = {}


_warm = _WarmStart()


def eval_exact(pattern: RiemannPattern, t: float, x: float) -> State:
    """Exact self-similar Euler solution at ``(t, x)``, ``t > 0``."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    g = pattern.g
    xi = x / t
    # the sign bit picks the side, so -0.0 (e.g. an underflowed k*x) is the left limit
    if math.copysign(1.0, x) < 0.0:
        family, (head, tail), outer, inner = 1, pattern.fan1, pattern.left, pattern.star
        if xi <= head:
            return outer
        if xi >= tail:
            return inner
    else:
        family, (head, tail), inner, outer = 3, pattern.fan3, pattern.star_upper, pattern.right
        if xi <= head:
            return inner
        if xi >= tail:
            return outer
    key = (id(pattern), family)
    v = invert_fan(pattern, family, xi, v0=_warm.last.get(key))
    _warm.last[key] = v
    anchor = fan_anchor(pattern, family)
    u = anchor.u + velocity_change_along_curve(g, anchor, v, family)
    return State(v, u, theta_on_isentrope(g, anchor, v))


def eval_exact_array(pattern: RiemannPattern, t: float, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`eval_exact` returning ``(v, u, theta)`` arrays.

    Fan velocities use the closed-form curve integral.
    """
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    g = pattern.g
    x = np.asarray(x, dtype=float)
    xi = x / t
    L, S, SU, Rr = pattern.left, pattern.star, pattern.star_upper, pattern.right
    neg = np.signbit(x)
    v = np.where(neg, np.where(xi <= pattern.fan1[0], L.v, S.v),
                 np.where(xi <= pattern.fan3[0], SU.v, Rr.v))
    u = np.where(neg, np.where(xi <= pattern.fan1[0], L.u, S.u),
                 np.where(xi <= pattern.fan3[0], SU.u, Rr.u))
    th = np.where(neg, np.where(xi <= pattern.fan1[0], L.theta, S.theta),
                  np.where(xi <= pattern.fan3[0], SU.theta, Rr.theta))
    for family, (head, tail), side in ((1, pattern.fan1, neg), (3, pattern.fan3, ~neg)):
        inside = side & (xi > head) & (xi < tail)
        if not np.any(inside):
            continue
        anchor = fan_anchor(pattern, family)
        vf = invert_fan(pattern, family, xi[inside])
        v[inside] = vf
        u[inside] = anchor.u + velocity_change_closed(g, anchor, vf, family)
        th[inside] = anchor.theta * (anchor.v / vf) ** (g.gamma - 1.0)
    return v, u, th
