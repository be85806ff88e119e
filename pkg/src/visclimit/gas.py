"""Ideal polytropic gas in Lagrangian variables (v, u, theta).

Pressure ``p = R theta / v``, internal energy ``e = R theta / (gamma - 1)``,
entropy ``s = R/(gamma-1) ln theta + R ln v`` (additive constant zero) and
the three characteristic speeds of the Euler system in mass coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class GasParams:
    """Adiabatic exponent ``gamma`` and gas constant ``R``."""

    gamma: float = 5.0 / 3.0
    R: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gamma", _finite("gamma", self.gamma))
        object.__setattr__(self, "R", _finite("R", self.R))
        if self.gamma <= 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.R <= 0.0:
            raise ValueError(f"R must be positive, got {self.R}")


@dataclass(frozen=True)
class State:
    """Point (v, u, theta) of the phase space; v and theta positive."""

    v: float
    u: float
    theta: float

    def __post_init__(self):
        for name in ("v", "u", "theta"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.v <= 0.0:
            raise ValueError(f"specific volume must be positive, got {self.v}")
        if self.theta <= 0.0:
            raise ValueError(f"temperature must be positive, got {self.theta}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.v, self.u, self.theta)


def pressure(g: GasParams, s: State) -> float:
    return g.R * s.theta / s.v


def internal_energy(g: GasParams, s: State) -> float:
    return g.R * s.theta / (g.gamma - 1.0)


def entropy(g: GasParams, s: State) -> float:
    return g.R / (g.gamma - 1.0) * math.log(s.theta) + g.R * math.log(s.v)


def sound_speed(g: GasParams, v, theta):
    """Lagrangian sound speed ``sqrt(gamma p / v)``; accepts arrays."""
    return (g.gamma * g.R * theta) ** 0.5 / v


def char_speed(g: GasParams, s: State, family: int) -> float:
    """Characteristic speed of the given family (1, 2 or 3) at ``s``.

    ``lambda_1 = -sqrt(gamma p / v)``, ``lambda_2 = 0`` and
    ``lambda_3 = -lambda_1``.
    """
    if family == 2:
        return 0.0
    c = sound_speed(g, s.v, s.theta)
    if family == 1:
        return -c
    if family == 3:
        return c
    raise ValueError(f"family must be 1, 2 or 3, got {family!r}")


def theta_on_isentrope(g: GasParams, ref: State, v: float) -> float:
    """Temperature at volume ``v`` on the isentrope through ``ref``."""
    if v <= 0.0:
        raise ValueError(f"v must be positive, got {v}")
    return ref.theta * (ref.v / v) ** (g.gamma - 1.0)


def wave_strength(left: State, right: State) -> float:
    return math.sqrt(
        (right.v - left.v) ** 2 + (right.u - left.u) ** 2 + (right.theta - left.theta) ** 2
    )
