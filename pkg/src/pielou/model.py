"""Deterministic layer of the Pielou logistic difference equation.

The recursion is ``x_{k+1} = a x_k / (1 + b x_k)`` from ``x_0 = c`` with
growth factor ``a > 1``, crowding coefficient ``b > 0``, and initial size
``c > 0``. Its closed-form solution, the steady state ``(a - 1)/b``, the
level-crossing period, and the inverse coordinate maps (with absolute
Jacobians) used by the density integrals all live here.

Every formula is evaluated through ``t = a**(-n)`` so that numerator and
denominator stay O(1) for arbitrarily large periods; ``a**n`` itself is
never formed. Points outside the image of a forward map are reported with
the sentinel pair ``(nan, 0.0)`` so that quadrature integrands vanish there
without extra control flow.

All functions are pure and safe for unrestricted concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PielouPoint",
    "iterate",
    "solution",
    "steady_state",
    "hitting_time",
    "solution_values",
    "steady_values",
    "crossing_times",
    "invert_initial",
    "invert_crowding",
    "invert_period",
]


@dataclass(frozen=True)
class PielouPoint:
    """One admissible parameter triple (c, a, b).

    ``a = 1`` is excluded: the closed form and the Jacobians require
    ``a != 1``, and for absolutely continuous growth factors the excluded
    set carries no probability.
    """

    c: float
    a: float
    b: float

    def __post_init__(self):
        if not self.a > 1.0:
            raise ValueError(f"growth factor must exceed 1, got a={self.a}")
        if not self.b > 0.0:
            raise ValueError(f"crowding coefficient must be positive, got b={self.b}")
        if not self.c > 0.0:
            raise ValueError(f"initial size must be positive, got c={self.c}")


def iterate(point: PielouPoint, n: int) -> float:
    """Apply the recursion exactly ``n`` times from ``x_0 = c``."""
    if n < 0:
        raise ValueError("iterate requires n >= 0")
    x = point.c
    for _ in range(int(n)):
        x = point.a * x / (1.0 + point.b * x)
    return x


def solution(point: PielouPoint, n) -> float:
    """Closed-form ``x_n``; accepts real ``n`` for level-crossing round trips."""
    return float(solution_values(point.c, point.a, point.b, n))


def steady_state(point: PielouPoint) -> float:
    """Limit of ``x_n`` as the period grows: (a - 1)/b."""
    return (point.a - 1.0) / point.b


def hitting_time(point: PielouPoint, level: float) -> float:
    """Real-valued period at which the trajectory attains ``level``.

    ``level == c`` returns 0. Otherwise the level must lie strictly
    between ``c`` and the steady state (monotone trajectories reach
    nothing else forward in time); anything outside raises.
    """
    if level <= 0.0:
        raise ValueError(f"level must be positive, got {level}")
    c, a, b = point.c, point.a, point.b
    if level == c:
        return 0.0
    s = steady_state(point)
    if not (min(c, s) < level < max(c, s)):
        raise ValueError(
            f"level unreachable: {level} is not between the initial size {c} "
            f"and the steady state {s}"
        )
    arg = level * (c * b - a + 1.0) / (c * (b * level - a + 1.0))
    return math.log(arg) / math.log(a)


# ---------------------------------------------------------------------------
# Array kernels. These accept scalars or numpy arrays and broadcast; the
# density integrals evaluate them on meshes of thousands of points at once.
# ---------------------------------------------------------------------------


def _decay(a, n):
    """t = a**(-n), formed in log space."""
    a = np.asarray(a, dtype=float)
    return np.exp(-np.asarray(n, dtype=float) * np.log(a))


def solution_values(c, a, b, n):
    """Vectorized closed form x_n = (a-1) / (b + ((a-1)/c - b) * a**(-n))."""
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = _decay(a, n)
    q = b + t * ((a - 1.0) / c - b)
    return (a - 1.0) / q


def steady_values(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (a - 1.0) / b


def crossing_times(c, a, b, level):
    """Per-sample crossing period of ``level`` and its validity mask.

    The period solves the closed form for ``n`` and is negative when the
    level was passed before period zero. A draw is invalid when the level
    lies outside the trajectory's range, i.e. when ``c`` and ``level`` sit
    on opposite sides of the steady state.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = level * (c * b - a + 1.0) / (c * (b * level - a + 1.0))
        valid = arg > 0.0
        times = np.where(valid, np.log(np.where(valid, arg, 1.0)), np.nan) / np.log(a)
    return times, valid


def invert_initial(x, a, b, n):
    """Initial size reaching ``x`` at period ``n`` given (a, b), with |d c / d x|.

    Returns ``(c, jac)``; out-of-image points (the forward map cannot
    produce ``x`` from any positive initial size) carry ``(nan, 0.0)``.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = _decay(a, n)
    den = (a - 1.0) - b * x * (1.0 - t)
    valid = den > 0.0
    safe = np.where(valid, den, 1.0)
    c = np.where(valid, x * (a - 1.0) * t / safe, np.nan)
    jac = np.where(valid, (a - 1.0) ** 2 * t / safe**2, 0.0)
    return c, jac


def invert_crowding(x, a, c, n):
    """Crowding coefficient reaching ``x`` at period ``n`` given (a, c), with |d b / d x|.

    Undefined at ``n = 0`` (the forward map does not depend on ``b`` there).
    Non-positive recovered coefficients carry the ``(nan, 0.0)`` sentinel.
    """
    if np.any(np.asarray(n) == 0):
        raise ValueError("crowding inversion requires n >= 1")
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    t = _decay(a, n)
    b = (a - 1.0) * (1.0 / x - t / c) / (1.0 - t)
    valid = b > 0.0
    jac = np.where(valid, (a - 1.0) / (x**2 * (1.0 - t)), 0.0)
    return np.where(valid, b, np.nan), jac


def invert_period(n, a, b, level):
    """Initial size whose trajectory crosses ``level`` at period ``n``, with |d c / d n|.

    ``n`` is treated as a real coordinate. Out-of-image points (no
    positive initial size crosses the level at that period) carry the
    ``(nan, 0.0)`` sentinel.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = _decay(a, n)
    den = (a - 1.0) - level * b * (1.0 - t)
    valid = den > 0.0
    safe = np.where(valid, den, 1.0)
    c = np.where(valid, level * (a - 1.0) * t / safe, np.nan)
    jac = np.where(
        valid,
        level * (a - 1.0) * np.abs(level * b - (a - 1.0)) * np.log(a) * t / safe**2,
        0.0,
    )
    return c, jac
