"""Ground-truth limit-cycle finder by direct planar simulation.

The system integrates in the Lienard plane

    dx/dt = y - F(x),    dy/dt = -x.

On the curve y = F(x) the x-velocity vanishes, and a crossing where
g = y - F(x) decreases has dg/dt = -x < 0, i.e. it happens at x > 0 and is
a local maximum of x along the orbit.  The return map P sends one such
crossing to the next, so fixed points of P are closed orbits and the fixed
coordinate is exactly the orbit's maximum x-amplitude.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DegenerateInput, DegenerateOrbit, NoReturn, StepUnderflow
from .phi import PhiTrajectory, Termination
from .poly import Polynomial

THREADS_ENV = "LIENARD_LAB_THREADS"


@dataclass(frozen=True)
class State:
    x: float
    y: float


@dataclass(frozen=True)
class Trajectory:
    ts: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    # (t, x) at section crossings y = F(x) with decreasing orientation (x-maxima)
    events: tuple[tuple[float, float], ...]
    # (t, x) at increasing crossings (x-minima, on the x < 0 side)
    events_up: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class LimitCycle:
    amplitude: float
    period: float
    stability: str  # stable | unstable | marginal
    return_slope: float
    orbit: Trajectory


@dataclass(frozen=True)
class OracleOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "LSODA"
    t_max: float = 1e4        # section-free time budget before NoReturn
    x_escape: float = 50.0    # |x| beyond this counts as unbounded escape
    fixed_point_tol: float = 1e-6
    center_tol: float = 1e-6
    slope_delta: float = 1e-4
    stability_theta: float = 1e-3


def vector_field(F: Polynomial, s: State) -> tuple[float, float]:
    return (s.y - F(s.x), -s.x)


def _rhs(F: Polynomial) -> Callable:
    coeffs = F.coeffs

    def rhs(t, state):
        x, y = state
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return (y - acc, -x)

    return rhs


def _section_event(F: Polynomial, direction: int):
    def g(t, state):
        return state[1] - F(state[0])

    g.direction = direction
    g.terminal = False
    return g


def _escape_event(x_escape: float):
    def esc(t, state):
        return abs(state[0]) - x_escape

    esc.direction = 1
    esc.terminal = True
    return esc


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence, allow_threads: bool = True) -> list:
    """Order-preserving map, threaded when the scan cap allows it.

    LSODA wraps a single Fortran work array, so scans built on it must run
    sequentially regardless of the thread cap.
    """
    n = thread_count()
    if not allow_threads or n <= 1 or len(items) < 4:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))


def simulate(F: Polynomial, s0: State, t_end: float,
             opts: OracleOptions | None = None,
             t_eval: np.ndarray | None = None) -> Trajectory:
    """Integrate the planar system for t_end time units, recording section
    crossings in both orientations."""
    if opts is None:
        opts = OracleOptions()
    if not t_end > 0:
        raise DegenerateInput("t_end must be positive")
    sol = solve_ivp(
        _rhs(F),
        (0.0, t_end),
        (s0.x, s0.y),
        method=opts.method,
        rtol=opts.rtol,
        atol=opts.atol,
        t_eval=t_eval,
        events=[_section_event(F, -1), _section_event(F, +1)],
        dense_output=False,
    )
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    down = tuple(
        (float(t), float(y[0])) for t, y in zip(sol.t_events[0], sol.y_events[0]) if y[0] > 1e-12
    )
    up = tuple(
        (float(t), float(y[0])) for t, y in zip(sol.t_events[1], sol.y_events[1]) if y[0] < -1e-12
    )
    return Trajectory(sol.t, sol.y[0], sol.y[1], down, up)


def _burn_in_state(F: Polynomial, A: float, dt: float) -> tuple[float, float]:
    # Second-order Taylor step off the section, so the departing crossing at
    # t = 0 cannot re-trigger the terminal event.
    x = A - 0.5 * A * dt * dt
    y = F(A) - A * dt
    return x, y


def _return_event(F: Polynomial, A: float, opts: OracleOptions,
                  t_eval_n: int = 0) -> tuple[float, float, Trajectory | None]:
    """(P(A), return time, optional dense orbit) for one loop of the map."""
    if not A > 0:
        raise DegenerateInput("amplitude must be positive")
    dt = 1e-6
    x0, y0 = _burn_in_state(F, A, dt)
    section = _section_event(F, -1)
    section.terminal = True
    sol = solve_ivp(
        _rhs(F),
        (dt, opts.t_max),
        (x0, y0),
        method=opts.method,
        rtol=opts.rtol,
        atol=opts.atol,
        events=[section, _section_event(F, +1), _escape_event(opts.x_escape)],
        dense_output=t_eval_n > 0,
    )
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    hits = [(float(t), float(y[0])) for t, y in zip(sol.t_events[0], sol.y_events[0]) if y[0] > 1e-12]
    if len(sol.t_events[2]) > 0:
        raise NoReturn(f"orbit from A={A} escaped |x| > {opts.x_escape}")
    if not hits:
        raise NoReturn(f"no section return from A={A} within t={opts.t_max}")
    t_ret, x_ret = hits[0]
    orbit = None
    if t_eval_n > 0:
        ts = np.linspace(0.0, t_ret, t_eval_n)
        inner = np.clip(ts, dt, t_ret)
        states = sol.sol(inner)
        xs = states[0].copy()
        ys = states[1].copy()
        # Replace the burn-in edge with the exact section point.
        xs[0], ys[0] = A, F(A)
        ups = tuple(
            (float(t), float(y[0]))
            for t, y in zip(sol.t_events[1], sol.y_events[1])
            if y[0] < -1e-12 and t < t_ret
        )
        orbit = Trajectory(ts, xs, ys, ((0.0, A), (t_ret, x_ret)), ups)
    return x_ret, t_ret, orbit


def poincare_return(F: Polynomial, A: float, opts: OracleOptions | None = None) -> float:
    """Next x-maximum of the orbit released at its x-maximum A.

    Raises NoReturn when the orbit escapes or exhausts the time budget.
    """
    if opts is None:
        opts = OracleOptions()
    x_ret, _, _ = _return_event(F, A, opts)
    return x_ret


def classify_stability(return_slope: float, theta: float = 1e-3) -> str:
    if not np.isfinite(return_slope):
        return "marginal"
    if abs(return_slope) < 1.0 - theta:
        return "stable"
    if abs(return_slope) > 1.0 + theta:
        return "unstable"
    return "marginal"


def find_limit_cycles(F: Polynomial, A_lo: float, A_hi: float, grid_n: int = 200,
                      opts: OracleOptions | None = None) -> list[LimitCycle]:
    """Isolated fixed points of the return map on [A_lo, A_hi].

    Scans h(A) = P(A) - A on the grid, brackets sign changes, refines each
    by bisection, then builds one full orbit and a finite-difference slope
    of P for the stability class.
    """
    if opts is None:
        opts = OracleOptions()
    if not (0 < A_lo < A_hi):
        raise DegenerateInput("need 0 < A_lo < A_hi")
    if grid_n < 2:
        raise DegenerateInput("grid_n must be at least 2")

    grid = np.linspace(A_lo, A_hi, grid_n)

    def disp(a: float) -> float:
        try:
            return poincare_return(F, float(a), opts) - float(a)
        except (NoReturn, StepUnderflow):
            return np.nan

    h = np.array(parallel_map(disp, list(grid), allow_threads=opts.method != "LSODA"))

    # Sign flips with both sides at integration-noise level are continuum
    # evidence (centers), not isolated fixed points worth bracketing.
    noise = 10.0 * opts.center_tol * np.maximum(1.0, grid)

    fixed: list[float] = []
    for i in range(grid_n - 1):
        if not (np.isfinite(h[i]) and np.isfinite(h[i + 1])):
            continue
        if max(abs(h[i]), abs(h[i + 1])) <= max(noise[i], noise[i + 1]):
            continue
        if h[i] == 0.0:
            fixed.append(float(grid[i]))
        elif h[i] * h[i + 1] < 0.0:
            try:
                r = brentq(disp, grid[i], grid[i + 1],
                           xtol=0.5 * opts.fixed_point_tol, rtol=8.9e-16)
            except (ValueError, NoReturn, StepUnderflow):
                continue
            fixed.append(float(r))
    if np.isfinite(h[-1]) and h[-1] == 0.0:
        fixed.append(float(grid[-1]))

    merged: list[float] = []
    for a in sorted(fixed):
        if not merged or a - merged[-1] > 10 * opts.fixed_point_tol:
            merged.append(a)

    cycles: list[LimitCycle] = []
    for a_star in merged:
        try:
            x_ret, t_ret, orbit = _return_event(F, a_star, opts, t_eval_n=1600)
            delta = opts.slope_delta * max(1.0, a_star)
            p_plus = poincare_return(F, a_star + delta, opts)
            p_minus = poincare_return(F, a_star - delta, opts)
        except (NoReturn, StepUnderflow):
            continue
        slope = (p_plus - p_minus) / (2.0 * delta)
        cycles.append(
            LimitCycle(
                amplitude=a_star,
                period=t_ret,
                stability=classify_stability(slope, opts.stability_theta),
                return_slope=slope,
                orbit=orbit,
            )
        )
    return cycles


def detect_center(F: Polynomial, A_lo: float, A_hi: float, grid_n: int = 60,
                  opts: OracleOptions | None = None) -> tuple[bool, dict]:
    """Center verdict: P(A) = A across (at least 95% of) the whole scan grid."""
    if opts is None:
        opts = OracleOptions()
    grid = np.linspace(A_lo, A_hi, grid_n)

    def disp(a: float) -> float:
        try:
            return poincare_return(F, float(a), opts) - float(a)
        except (NoReturn, StepUnderflow):
            return np.nan

    h = np.array(parallel_map(disp, list(grid), allow_threads=opts.method != "LSODA"))
    finite = np.isfinite(h)
    ok = finite & (np.abs(h) <= opts.center_tol * np.maximum(1.0, grid))
    fraction = float(np.mean(ok))
    evidence = {
        "fraction_fixed": fraction,
        "max_deviation": float(np.nanmax(np.abs(h))) if finite.any() else float("nan"),
        "evaluated": int(finite.sum()),
        "grid_n": grid_n,
    }
    return fraction >= 0.95, evidence


def default_scan_range(critical_points: Sequence[float]) -> tuple[float, float]:
    hi = max(5.0, 2.0 * max(critical_points)) if critical_points else 5.0
    return 0.05, hi


def extract_phi_from_orbit(F: Polynomial, cycle: LimitCycle) -> PhiTrajectory:
    """Descending branch of the closed orbit as phi(x) = dx/dt against x.

    The segment runs from the x-maximum event (t = 0) to the first
    x-minimum; resampled against x it is a solution branch of the amplitude
    ODE whose right endpoint satisfies phi(A) = 0.
    """
    orbit = cycle.orbit
    if not orbit.events_up:
        raise DegenerateOrbit("orbit has no resolved x-minimum")
    t_min = orbit.events_up[0][0]
    mask = orbit.ts <= t_min
    if mask.sum() < 3:
        raise DegenerateOrbit("too few samples before the x-minimum")
    xs = orbit.xs[mask]
    ys = orbit.ys[mask]
    phis = ys - np.array([F(x) for x in xs])
    # Ascending in x: reverse the time ordering and drop stalled samples.
    xs = xs[::-1]
    phis = phis[::-1]
    keep = np.concatenate(([True], np.diff(xs) > 0.0))
    xs = xs[keep]
    phis = phis[keep]
    phis[-1] = 0.0  # the endpoint is the section crossing itself
    return PhiTrajectory(
        xs=xs,
        phis=phis,
        termination=Termination("zero_crossing", float(xs[-1])),
        swapped_variable=False,
    )
