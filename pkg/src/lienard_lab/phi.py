"""Amplitude ODE of the first-integral formulation.

Along an orbit branch of the planar system the x-velocity phi(x) = dx/dt
obeys

    dphi/dx = (-x - F'(x) phi) / phi,

which blows up exactly where the branch turns (phi -> 0, the amplitude).
The integrator advances this form while the slope is tame and exchanges
the roles of x and phi near a turning point, where

    dx/dphi = phi / (-x - F'(x) phi)

is regular; landing on phi = 0 in the swapped form gives the turning
abscissa (a candidate amplitude) directly.

Isolated amplitudes are located by closing the loop entirely inside this
formulation: descend from a trial amplitude through the x-minimum and back
up to the next turning point, and search for fixed points of that map.
Scanning initial values phi(x_left) over a signed grid is kept as a cheap
diagnostic (every first-crossing of a non-periodic spiral also lands here,
so raw crossings spread over a continuum and cannot isolate amplitudes on
their own).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from ._quad import (
    acceleration_integrand,
    cumulative_integral,
    cumulative_phi_integral,
    ode_terms,
)
from ._rk45 import dopri_step, initial_step, step_factor
from .errors import DegenerateInput, NoReturn, SingularPoint
from .partition import CriticalPartition
from .poly import Polynomial

SWAP_EPS_FACTOR = 1e-6      # |phi| <= factor * scale hands over to the swapped form
DEPART_FRACTION = 0.02      # |phi| at which a turning-point departure hands back
BORDER_TOL = 1e-4           # amplitude-to-border distance that flags at_border
MIN_AMPLITUDE = 0.02        # closure scan floor; below this orbits hug the equilibrium
CENTER_QUORUM = 0.95


@dataclass(frozen=True)
class PhiOptions:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_steps: int = 20_000
    eps_swap: float | None = None


@dataclass(frozen=True)
class Termination:
    kind: str  # zero_crossing | left_boundary | right_boundary | step_underflow | max_steps
    x_event: float | None = None


@dataclass(frozen=True)
class PhiTrajectory:
    xs: np.ndarray
    phis: np.ndarray
    termination: Termination
    swapped_variable: bool

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.phis.tolist()))

    def __len__(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class AmplitudeCandidate:
    A: float
    interval_index: int
    at_border: bool
    initial_phi: float


@dataclass(frozen=True)
class CandidateScan:
    """Result of scanning one partition interval for amplitude candidates."""

    interval_index: int
    candidates: tuple[AmplitudeCandidate, ...]
    continuum: bool
    shot_crossings: tuple[float, ...]
    shot_spread: float
    lemma_violated: bool  # more than one isolated candidate interior to the interval


@dataclass(frozen=True)
class ConditionReport:
    """Checkable periodic-orbit conditions on a terminated branch."""

    terminal_phi: float
    terminal_ok: bool
    integral_max: float
    integral_ok: bool
    residual_max: float
    residual_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.terminal_ok and self.integral_ok and self.residual_ok


def _horner(coeffs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def phi_rhs(F: Polynomial, x: float, phi: float, eps: float | None = None) -> float:
    """Slope of the amplitude ODE; raises SingularPoint inside the swap layer."""
    if eps is None:
        eps = SWAP_EPS_FACTOR * max(1.0, abs(x))
    if abs(phi) < eps:
        raise SingularPoint(f"|phi|={abs(phi):.3e} below swap threshold at x={x}")
    return (-x - F.derivative()(x) * phi) / phi


def _check_origin_degenerate(x: float, phi: float, den: float) -> None:
    if abs(x) <= 1e-6 and abs(phi) <= 1e-6 and abs(den) <= 1e-9:
        raise SingularPoint(
            f"both formulations degenerate near the origin (x={x:.3e}, phi={phi:.3e})"
        )


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self) -> bool:
        self.left -= 1
        return self.left <= 0


def _run_x_form(dfc, x, phi, x_stop, eps_swap, opts, xs, phis, budget):
    """Advance dphi/dx until the swap layer, the boundary, or failure.

    Returns (status, x, phi) with status in
    {"swap", "boundary", "underflow", "max_steps", "crossing_exact"}.
    """

    def f(t, y):
        return (-t - _horner(dfc, t) * y) / y

    direction = 1.0 if x_stop > x else -1.0
    span = abs(x_stop - x)
    h_floor = 1e-14 * max(1.0, abs(x), abs(x_stop))
    h = initial_step(f, x, phi, direction, opts.rtol, opts.atol, span)
    # Step cap well below the accuracy-driven size: downstream quadrature
    # over the emitted samples is O(h^4) and needs denser output than the
    # fifth-order stepper itself would take on smooth stretches.
    max_h = min(span / 8.0, 0.03 * max(1.0, abs(x), abs(phi)))
    k1 = f(x, phi)
    while True:
        if budget.spend():
            return "max_steps", x, phi
        landing = False
        if (x + h - x_stop) * direction >= 0.0:
            h = x_stop - x
            landing = True
        y_new, err, k7 = dopri_step(f, x, phi, h, k1)
        tol = opts.atol + opts.rtol * max(abs(phi), abs(y_new) if math.isfinite(y_new) else abs(phi))
        if not math.isfinite(err) or err > tol:
            h *= step_factor(err, tol) if math.isfinite(err) else 0.1
            if abs(h) < h_floor:
                return "underflow", x, phi
            continue
        if y_new == 0.0:
            x += h
            xs.append(x)
            phis.append(0.0)
            return "crossing_exact", x, 0.0
        if (y_new > 0.0) != (phi > 0.0):
            # Stepped across phi = 0 without entering the swap layer; shrink
            # so the layer is reached from the correct side.
            h *= 0.3
            if abs(h) < h_floor:
                return "underflow", x, phi
            continue
        if abs(k7 - k1) > 0.5 * (1.0 + min(abs(k1), abs(k7))):
            # Slope turns over within the step (phi-extremum or entry
            # layer); the sample sequence must resolve it or the Hermite
            # quadrature over the emitted samples degrades.
            h *= 0.5
            if abs(h) < h_floor:
                return "underflow", x, phi
            continue
        x += h
        phi = y_new
        k1 = k7
        xs.append(x)
        phis.append(phi)
        if abs(phi) <= eps_swap:
            return "swap", x, phi
        if landing:
            return "boundary", x, phi
        h *= step_factor(err, tol)
        if abs(h) > max_h:
            h = math.copysign(max_h, h)


def _run_swapped(dfc, phi, x, phi_stop, opts, xs, phis, budget):
    """Advance dx/dphi from (phi, x) until phi reaches phi_stop.

    Returns (status, phi, x) with status in {"done", "underflow", "max_steps"}.
    """

    def g(p, xv):
        return p / (-xv - _horner(dfc, xv) * p)

    den0 = -x - _horner(dfc, x) * phi
    _check_origin_degenerate(x, phi, den0)
    direction = 1.0 if phi_stop > phi else -1.0
    span = abs(phi_stop - phi)
    if span == 0.0:
        return "done", phi, x
    h_floor = 1e-16 * max(1.0, span)
    h = initial_step(g, phi, x, direction, opts.rtol, opts.atol, span)
    max_h = span / 4.0
    if abs(h) > max_h:
        h = math.copysign(max_h, h)
    k1 = g(phi, x)
    while True:
        if budget.spend():
            return "max_steps", phi, x
        landing = False
        if (phi + h - phi_stop) * direction >= 0.0:
            h = phi_stop - phi
            landing = True
        x_new, err, k7 = dopri_step(g, phi, x, h, k1)
        tol = opts.atol + opts.rtol * max(abs(x), abs(x_new) if math.isfinite(x_new) else abs(x))
        if not math.isfinite(err) or err > tol:
            h *= step_factor(err, tol) if math.isfinite(err) else 0.1
            if abs(h) < h_floor:
                return "underflow", phi, x
            continue
        phi += h
        x = x_new
        k1 = k7
        xs.append(x)
        phis.append(phi)
        if landing:
            return "done", phi, x
        h *= step_factor(err, tol)
        if abs(h) > max_h:
            h = math.copysign(max_h, h)


def _finalize(xs, phis, termination, swapped) -> PhiTrajectory:
    """Build the trajectory, dropping samples that stall in x (the swapped
    leg moves x by O(phi^2) near the event, which can round to no progress)."""
    keep_x = [xs[0]]
    keep_p = [phis[0]]
    for x, p in zip(xs[1:], phis[1:]):
        if x == keep_x[-1]:
            keep_p[-1] = p
        else:
            keep_x.append(x)
            keep_p.append(p)
    return PhiTrajectory(
        xs=np.array(keep_x),
        phis=np.array(keep_p),
        termination=termination,
        swapped_variable=swapped,
    )


def integrate_phi(F: Polynomial, x0: float, phi0: float, x_stop: float,
                  opts: PhiOptions | None = None) -> PhiTrajectory:
    """Integrate the amplitude ODE from (x0, phi0) toward x_stop.

    Terminates with a ZeroCrossing event (the abscissa where phi reaches 0,
    located in the swapped formulation), at the boundary x_stop, or on a
    step/budget failure.  Raises SingularPoint when both formulations
    degenerate simultaneously (only possible near the origin).
    """
    if opts is None:
        opts = PhiOptions()
    if x0 == x_stop:
        raise DegenerateInput("x0 and x_stop coincide")
    scale = max(1.0, abs(x0), abs(x_stop), abs(phi0))
    eps_swap = opts.eps_swap if opts.eps_swap is not None else SWAP_EPS_FACTOR * scale
    if phi0 != 0.0:
        # Branches handed over from a steep turning point start with |phi|
        # near the quasi-steady drift value -x/F'; the swap layer must sit
        # well below that or the drift itself would re-trigger it.
        eps_swap = min(eps_swap, 0.25 * abs(phi0))
    dfc = F.derivative().coeffs
    xs = [float(x0)]
    phis = [float(phi0)]
    budget = _Budget(opts.max_steps)

    if phi0 == 0.0:
        return _finalize(xs, phis, Termination("zero_crossing", x0), False)

    if abs(phi0) > eps_swap:
        status, x, phi = _run_x_form(dfc, x0, phi0, x_stop, eps_swap, opts, xs, phis, budget)
        if status == "boundary":
            kind = "right_boundary" if x_stop > x0 else "left_boundary"
            return _finalize(xs, phis, Termination(kind), False)
        if status == "underflow":
            return _finalize(xs, phis, Termination("step_underflow"), False)
        if status == "max_steps":
            return _finalize(xs, phis, Termination("max_steps"), False)
        if status == "crossing_exact":
            return _finalize(xs, phis, Termination("zero_crossing", x), False)
    else:
        x, phi = x0, phi0

    status, _, x_event = _run_swapped(dfc, phi, x, 0.0, opts, xs, phis, budget)
    if status == "underflow":
        return _finalize(xs, phis, Termination("step_underflow"), True)
    if status == "max_steps":
        return _finalize(xs, phis, Termination("max_steps"), True)
    return _finalize(xs, phis, Termination("zero_crossing", x_event), True)


def _depart(F: Polynomial, x_turn: float, phi_target: float,
            opts: PhiOptions) -> tuple[float, float]:
    """Leave a turning point (x_turn, phi=0) in the swapped form.

    Returns (x, phi) at |phi| = |phi_target|, outside the singular layer.
    Where F' > 0 the branch relaxes onto the slow drift phi = -x/F' and the
    swapped form degenerates at that drift value, so the departure target is
    capped at half of it.
    """
    dfc = F.derivative().coeffs
    _check_origin_degenerate(x_turn, 0.0, -x_turn)
    fp = _horner(dfc, x_turn)
    if fp > 0.0:
        cap = 0.5 * abs(x_turn) / fp
        if abs(phi_target) > cap:
            phi_target = math.copysign(cap, phi_target)
    xs = [x_turn]
    phis = [0.0]
    budget = _Budget(opts.max_steps)
    status, phi, x = _run_swapped(dfc, 0.0, x_turn, phi_target, opts, xs, phis, budget)
    if status != "done":
        raise NoReturn(f"turning-point departure failed ({status}) at x={x_turn}")
    return x, phi


def phi_return_map(F: Polynomial, A: float, opts: PhiOptions | None = None,
                   collect: bool = False):
    """Next turning abscissa of the branch loop started at amplitude A.

    Descends from (A, phi=0) through the x-minimum and back up; the returned
    value equals A exactly on a closed orbit.  Raises NoReturn when a leg
    escapes or stalls.  With ``collect=True`` also returns the ascending
    branch trajectory (x-minimum up to the returned amplitude).
    """
    if A <= 0:
        raise DegenerateInput("amplitude must be positive")
    if opts is None:
        opts = PhiOptions()
    scale = max(1.0, A)
    bound = 10.0 * scale + 10.0

    x_c, phi_c = _depart(F, A, -DEPART_FRACTION * scale, opts)
    down = integrate_phi(F, x_c, phi_c, -bound, opts)
    if down.termination.kind != "zero_crossing":
        raise NoReturn(f"descending leg ended with {down.termination.kind} from A={A}")
    x_min = down.termination.x_event

    x_c2, phi_c2 = _depart(F, x_min, DEPART_FRACTION * max(1.0, abs(x_min)), opts)
    up = integrate_phi(F, x_c2, phi_c2, bound, opts)
    if up.termination.kind != "zero_crossing":
        raise NoReturn(f"ascending leg ended with {up.termination.kind} from A={A}")
    A_next = up.termination.x_event
    if collect:
        return A_next, up
    return A_next


def default_phi_grid(n: int = 64, lo: float = 1e-3, hi: float = 10.0) -> tuple[float, ...]:
    """Signed grid of shooting values: n log-spaced magnitudes, both signs."""
    mags = np.geomspace(lo, hi, n)
    return tuple(mags) + tuple(-mags)


def find_amplitude_candidates(
    F: Polynomial,
    partition: CriticalPartition,
    interval_index: int,
    phi_grid: Sequence[float] | None = None,
    opts: PhiOptions | None = None,
    a_grid_n: int = 32,
) -> CandidateScan:
    """Scan one partition interval for isolated amplitude candidates.

    Candidates are fixed points of :func:`phi_return_map` bracketed on an
    amplitude grid inside the interval.  A flat map across the grid (the
    non-isolated case: every trial amplitude returns to itself) is reported
    as a continuum instead of as candidates; the direct-simulation oracle
    owns the center verdict.  Raw shooting crossings from ``phi_grid`` are
    recorded for diagnostics.
    """
    if opts is None:
        opts = PhiOptions()
    try:
        interval = partition.intervals[interval_index]
    except IndexError:
        raise DegenerateInput(f"no interval with index {interval_index}") from None
    lo, hi = interval.lo, interval.hi
    width = hi - lo

    if phi_grid is None:
        phi_grid = default_phi_grid()
    crossings: list[float] = []
    pad = BORDER_TOL * max(1.0, hi)
    for phi0 in phi_grid:
        try:
            t = integrate_phi(F, lo, float(phi0), hi, opts)
        except SingularPoint:
            continue
        if t.termination.kind == "zero_crossing":
            a = t.termination.x_event
            if lo - pad <= a <= hi + pad:
                crossings.append(a)
    spread = (max(crossings) - min(crossings)) / width if len(crossings) > 1 else 0.0

    margin = max(1e-3 * width, 1e-6)
    a_lo = max(lo + margin, MIN_AMPLITUDE)
    a_hi = hi - margin
    if interval.unbounded:
        # Beyond the direct-simulation scan ceiling the descending branch
        # crawls down a strongly attracting slow manifold, which is stiff
        # for the explicit stepper; amplitudes out there are transient
        # funnels, not candidates the oracle could confirm.
        a_hi = min(a_hi, max(5.0, 2.0 * lo))
    if a_hi <= a_lo:
        return CandidateScan(interval_index, (), False, tuple(crossings), spread, False)

    grid = np.linspace(a_lo, a_hi, a_grid_n)
    disp = np.full(a_grid_n, np.nan)
    for i, a in enumerate(grid):
        try:
            disp[i] = phi_return_map(F, float(a), opts) - a
        except (NoReturn, SingularPoint):
            pass
    valid = np.isfinite(disp)

    if valid.sum() >= a_grid_n / 2:
        ctol = 1e-6 * np.maximum(1.0, grid[valid])
        if np.mean(np.abs(disp[valid]) <= ctol) >= CENTER_QUORUM:
            return CandidateScan(interval_index, (), True, tuple(crossings), spread, False)

    roots: list[float] = []
    for i in range(a_grid_n - 1):
        if not (valid[i] and valid[i + 1]):
            continue
        if disp[i] == 0.0:
            roots.append(float(grid[i]))
        elif disp[i] * disp[i + 1] < 0.0:
            try:
                r = brentq(
                    lambda a: phi_return_map(F, a, opts) - a,
                    grid[i], grid[i + 1], xtol=1e-8, rtol=8.9e-16,
                )
            except (NoReturn, SingularPoint, ValueError):
                continue
            roots.append(float(r))
    if valid[-1] and disp[-1] == 0.0:
        roots.append(float(grid[-1]))

    candidates = []
    for a_star in sorted(roots):
        _, up = phi_return_map(F, a_star, opts, collect=True)
        initial_phi = float(np.interp(lo, up.xs, up.phis))
        at_border = (
            abs(a_star - lo) <= BORDER_TOL * max(1.0, abs(lo))
            or abs(a_star - hi) <= BORDER_TOL * max(1.0, abs(hi))
        )
        candidates.append(AmplitudeCandidate(a_star, interval_index, at_border, initial_phi))

    interior = [c for c in candidates if not c.at_border]
    return CandidateScan(
        interval_index,
        tuple(candidates),
        False,
        tuple(crossings),
        spread,
        lemma_violated=len(interior) > 1,
    )


def verify_energy_identity(F: Polynomial, t: PhiTrajectory) -> float:
    """Max residual of the integrated form of the amplitude ODE.

    Along exact solutions
        -phi(x)^2/2 + phi(x0)^2/2 = (x^2 - x0^2)/2 + int_{x0}^{x} F' phi,
    so the residual measures how consistently the samples solve the ODE.
    """
    if len(t) < 3:
        raise DegenerateInput("need at least 3 samples")
    xs, phis = t.xs, t.phis
    integral = cumulative_phi_integral(F, xs, phis, weight=F.derivative())
    lhs = -0.5 * phis**2 + 0.5 * phis[0] ** 2
    rhs = 0.5 * (xs**2 - xs[0] ** 2) + integral
    return float(np.max(np.abs(lhs - rhs)))


def check_periodic_orbit_conditions(
    F: Polynomial,
    t: PhiTrajectory,
    A: float,
    terminal_tol: float = 1e-6,
    integral_tol: float = 1e-7,
    residual_tol: float = 2e-2,
) -> ConditionReport:
    """Evaluate the three checkable periodic-orbit conditions on a branch.

    (i) the branch terminates with phi = 0 at A; (ii) the accumulated
    acceleration integral int_x^A (-sigma - F' phi) dsigma stays
    non-positive (equivalently phi^2 >= 0 in the integrated identity);
    (iii) the samples satisfy the ODE pointwise, with phi' taken by finite
    differences so the check does not reuse the integrator's slopes.
    """
    xs, phis = t.xs, t.phis
    scale = max(1.0, abs(A), float(np.max(np.abs(phis))))

    terminal_phi = abs(float(phis[-1]))
    terminal_ok = terminal_phi <= terminal_tol * scale and abs(float(xs[-1]) - A) <= terminal_tol * max(1.0, abs(A))

    terms = ode_terms(F, xs, phis)
    fp = terms.fp
    cum = cumulative_integral(F, xs, phis, acceleration_integrand(F, xs, phis, terms), terms)
    tail = cum[-1] - cum  # integral from each sample to the endpoint
    integral_max = float(np.max(tail))
    integral_ok = integral_max <= integral_tol * scale * scale

    # Non-uniform second-order central differences on interior samples,
    # skipping the near-turning region where phi' is not finite-differencable.
    residual_max = 0.0
    phimax = float(np.max(np.abs(phis)))
    for i in range(2, len(xs) - 2):
        if abs(phis[i]) < 0.05 * phimax:
            continue
        hl = xs[i] - xs[i - 1]
        hr = xs[i + 1] - xs[i]
        dphi = (
            hl * hl * phis[i + 1] - hr * hr * phis[i - 1] + (hr * hr - hl * hl) * phis[i]
        ) / (hl * hr * (hl + hr))
        r = phis[i] * dphi + xs[i] + fp[i] * phis[i]
        residual_max = max(residual_max, abs(float(r)))
    residual_ok = residual_max <= residual_tol * scale

    return ConditionReport(
        terminal_phi, terminal_ok, integral_max, integral_ok, residual_max, residual_ok
    )
