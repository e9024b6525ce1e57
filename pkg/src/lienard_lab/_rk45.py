"""Scalar embedded Runge-Kutta 5(4) machinery (Dormand-Prince coefficients).

The amplitude ODE is scalar in both of its formulations, so everything here
works on plain floats; the adaptive driver loops live with the termination
logic in :mod:`lienard_lab.phi`.
"""

from __future__ import annotations

import math
from typing import Callable

# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5, C6 = 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# Fifth-order minus embedded fourth-order weights (error estimate).
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
SAFETY = 0.9


def dopri_step(f: Callable[[float, float], float], t: float, y: float, h: float,
               k1: float) -> tuple[float, float, float]:
    """One 5(4) step from (t, y) with slope k1 = f(t, y) already known.

    Returns (y_new, error_estimate, k7); k7 = f(t+h, y_new) feeds the next
    step (FSAL).  Non-finite stage values surface as an infinite error so the
    caller rejects and shrinks.
    """
    try:
        k2 = f(t + C2 * h, y + h * (A21 * k1))
        k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2))
        k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = f(t + h, y_new)
        err = abs(h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7))
    except (ZeroDivisionError, OverflowError):
        return math.nan, math.inf, math.nan
    if not (math.isfinite(y_new) and math.isfinite(err)):
        return math.nan, math.inf, math.nan
    return y_new, err, k7


def initial_step(f: Callable[[float, float], float], t0: float, y0: float,
                 direction: float, rtol: float, atol: float, span: float) -> float:
    """Conservative first-step guess from the local slope."""
    d0 = abs(f(t0, y0))
    scale = atol + rtol * abs(y0)
    if d0 > 1e-12:
        h = 0.01 * scale ** 0.2 / d0 ** 0.2 if scale > 0 else 1e-6
        h = min(h, 0.01 * abs(span))
    else:
        h = 1e-4 * abs(span)
    return max(h, 1e-12) * (1.0 if direction >= 0 else -1.0)


def step_factor(err: float, tol: float) -> float:
    """Step-size multiplier from the embedded error ratio."""
    if err == 0.0:
        return MAX_FACTOR
    return min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * (tol / err) ** 0.2))
