"""Scalar quadrature and root finding used by the wave-curve and profile code."""

from __future__ import annotations

import math

import numpy as np

_EPS = np.finfo(float).eps


class QuadratureError(RuntimeError):
    """Adaptive quadrature hit its depth limit before reaching tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class RootFindingError(RuntimeError):
    pass


def adaptive_simpson(f, a, b, tol=1e-11, max_depth=50):
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson with Richardson correction.

    Raises
    ------
    QuadratureError
        If some subinterval still fails the local error test at ``max_depth``.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    worst = [0.0]

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        # the halved tolerance can drop below roundoff in the subinterval sums
        if abs(delta) <= max(15.0 * tol, 64.0 * _EPS * (abs(left) + abs(right))):
            return left + right + delta / 15.0
        if depth >= max_depth:
            worst[0] = max(worst[0], abs(delta) / 15.0)
            return left + right + delta / 15.0
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + recurse(
            m, b, fm, frm, fb, right, 0.5 * tol, depth + 1
        )

    result = recurse(a, b, fa, fm, fb, whole, tol, 0)
    if worst[0] > 0.0:
        raise QuadratureError("adaptive Simpson did not converge", worst[0])
    return result


def newton_bisect(f, df, lo, hi, x0=None, xtol=1e-15, ftol=0.0, max_iter=200):
    """Root of ``f`` in the bracket ``[lo, hi]`` by Newton safeguarded with bisection.

    ``f(lo)`` and ``f(hi)`` must differ in sign (or one of them vanish). A
    Newton step leaving the current bracket, or failing to halve the residual,
    is replaced by a bisection step.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootFindingError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    increasing = fhi > 0
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else x0
    fx = f(x)
    for _ in range(max_iter):
        if fx == 0.0 or abs(fx) <= ftol:
            return x
        if (fx > 0) == increasing:
            hi = x
        else:
            lo = x
        if hi - lo <= xtol * max(1.0, abs(x)):
            return x
        d = df(x)
        x_new = x - fx / d if d != 0.0 and math.isfinite(d) else None
        if x_new is None or not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        f_new = f(x_new)
        if abs(f_new) > 0.5 * abs(fx) and x_new != 0.5 * (lo + hi):
            # slow Newton progress: take a bisection step as well
            if (f_new > 0) == increasing:
                hi = x_new
            else:
                lo = x_new
            x_new = 0.5 * (lo + hi)
            f_new = f(x_new)
        x, fx = x_new, f_new
    raise RootFindingError(f"no convergence after {max_iter} iterations (|f|={abs(fx):.3e})")


def invert_monotone(f, df, target, lo, hi, x0=None, tol=1e-11, max_iter=100):
    """Vectorized solve of ``f(x) = target`` for monotone ``f`` on per-point brackets.

    ``f`` and ``df`` act elementwise on arrays. Each point carries its own
    bracket ``[lo, hi]``; Newton iterates that leave the bracket are replaced
    by the bracket midpoint. Converges when ``|f(x) - target| <= tol``.
    """
    target = np.asarray(target, dtype=float)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), target.shape)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    x = 0.5 * (lo + hi) if x0 is None else np.clip(np.asarray(x0, dtype=float), lo, hi)
    increasing = f(hi) - f(lo) >= 0
    prev = np.full(target.shape, np.inf)
    for _ in range(max_iter):
        r = f(x) - target
        ar = np.abs(r)
        if np.all(ar <= tol):
            return x
        above = (r > 0) == increasing
        hi = np.where(above, x, hi)
        lo = np.where(above, lo, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - r / df(x)
        mid = 0.5 * (lo + hi)
        # Newton must stay inside the bracket and at least halve the residual
        ok = np.isfinite(step) & (step >= lo) & (step <= hi) & (ar <= 0.5 * prev)
        x = np.where(ar <= tol, x, np.where(ok, step, mid))
        prev = ar
    r = f(x) - target
    if np.any(np.abs(r) > tol):
        raise RootFindingError(f"monotone inversion failed, max residual {np.max(np.abs(r)):.3e}")
    return x
