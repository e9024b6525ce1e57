"""Iterated integration-by-parts machinery for the integrated amplitude ODE.

Repeatedly integrating int F'(s) phi(s) ds by parts pushes all derivatives
of F onto explicit coefficient polynomials and leaves iterated integrals of
phi:

    int_{x0}^{x} F'(s) phi(s) ds  =  sum_{l=0}^{n-1} C_l(x) * Z_{l+1}(x)

where Z_1 = int phi, Z_{k+1} = int Z_k (all anchored to 0 at x0) and

    C_l(x) = sum_{k=1}^{n-l} a_{k+l} (k+l) (-1)^l binom(k+l-1, k-1) l! x^{k-1}.

C_0 is the derivative of F term by term.  The expansion is verified against
the integrated ODE identity under both signs of the sum; exactly one sign
survives on any branch where the sum is nonzero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import (
    Integrand,
    cumulative_integral,
    cumulative_phi_integral,
    level_integrand,
    ode_terms,
)
from .errors import DegenerateInput
from .phi import PhiTrajectory
from .poly import Polynomial


@dataclass(frozen=True)
class PartsCoefficients:
    """Coefficient polynomials of the expansion, index l = 0 .. n-1."""

    polys: tuple[Polynomial, ...]

    def __len__(self) -> int:
        return len(self.polys)


@dataclass(frozen=True)
class IntegralStack:
    """Iterated integrals of a sampled branch on its own x-grid.

    levels[k] holds the (k+1)-fold integral; all levels vanish at the first
    sample, and differentiating one level recovers the one below it.
    """

    xs: np.ndarray
    levels: tuple[np.ndarray, ...]
    base_phi: np.ndarray


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of the integrated-ODE identity under both expansion signs."""

    residual_plus: float
    residual_minus: float
    certified_sign: int  # +1 / -1, or 0 when the two are indistinguishable

    @property
    def residual(self) -> float:
        return min(self.residual_plus, self.residual_minus)


def parts_coefficient(F: Polynomial, l: int) -> Polynomial:
    """Closed-form coefficient polynomial of expansion level l."""
    n = F.degree
    if not 0 <= l <= n - 1:
        raise DegenerateInput(f"level {l} outside 0..{n - 1}")
    coeffs = [0.0] * (n - l)
    sign = -1.0 if l % 2 else 1.0
    lfact = math.factorial(l)
    for k in range(1, n - l + 1):
        a = F.coeffs[k + l]
        coeffs[k - 1] = a * (k + l) * sign * math.comb(k + l - 1, k - 1) * lfact
    return Polynomial(coeffs)


def parts_coefficients(F: Polynomial) -> PartsCoefficients:
    if F.degree < 1:
        raise DegenerateInput("F must be nonconstant")
    return PartsCoefficients(tuple(parts_coefficient(F, l) for l in range(F.degree)))


def build_integral_stack(F: Polynomial, traj: PhiTrajectory, depth: int) -> IntegralStack:
    """Iterated integrals of the branch, each level anchored to 0 at x0.

    The integrals run segment-by-segment in whichever of x or phi is the
    regular parameter there, so the square-root profile at a turning point
    costs no accuracy.
    """
    if depth < 1:
        raise DegenerateInput("depth must be at least 1")
    if len(traj) < 3:
        raise DegenerateInput("need at least 3 samples")
    xs, phis = traj.xs, traj.phis
    terms = ode_terms(F, xs, phis)

    levels = [cumulative_phi_integral(F, xs, phis)]
    if depth > 1:
        # Integrating Z_1: its second x-derivative (phi') blows up at the
        # turning samples, but in the phi parametrization everything is
        # finite: d(Z_1)/dphi = phi xp, d2(Z_1)/dphi2 = xp + phi dxp.
        g = Integrand(
            vals=levels[0],
            dvdx=phis,
            d2vdx2=terms.dphidx,
            dvdphi=phis * terms.xp,
            d2vdphi2=terms.xp + phis * terms.dxp,
        )
        levels.append(cumulative_integral(F, xs, phis, g, terms))
    for i in range(2, depth):
        g = level_integrand(levels[i - 1], levels[i - 2], levels[i - 3] if i >= 3 else phis, terms)
        levels.append(cumulative_integral(F, xs, phis, g, terms))
    return IntegralStack(xs=xs, levels=tuple(levels), base_phi=phis)


def verify_parts_identity(F: Polynomial, traj: PhiTrajectory) -> IdentityReport:
    """Check the integrated ODE against the expansion, both signs at once.

    On a branch that solves the amplitude ODE,

        -phi(x)^2/2 + phi(x0)^2/2 = (x^2 - x0^2)/2 + sign * sum_l C_l Z_{l+1}

    must hold for exactly one sign unless the sum vanishes identically
    (F constant-like along the branch), in which case the report marks the
    sign undecided.
    """
    if F.degree < 1:
        # No expansion levels; both signs coincide with the bare identity.
        xs, phis = traj.xs, traj.phis
        lhs = -0.5 * phis**2 + 0.5 * phis[0] ** 2
        rhs = 0.5 * (xs**2 - xs[0] ** 2)
        r = float(np.max(np.abs(lhs - rhs)))
        return IdentityReport(r, r, 0)

    stack = build_integral_stack(F, traj, F.degree)
    xs, phis = traj.xs, traj.phis
    series = np.zeros_like(xs)
    for l, z in enumerate(stack.levels):
        cl = parts_coefficient(F, l)
        series += np.array([cl(x) for x in xs]) * z

    lhs = -0.5 * phis**2 + 0.5 * phis[0] ** 2
    base = 0.5 * (xs**2 - xs[0] ** 2)
    r_plus = float(np.max(np.abs(lhs - (base + series))))
    r_minus = float(np.max(np.abs(lhs - (base - series))))

    scale = max(1.0, float(np.max(np.abs(lhs))))
    lo, hi = sorted((r_plus, r_minus))
    if hi <= 10 * lo or hi <= 1e-12 * scale:
        sign = 0
    else:
        sign = 1 if r_plus < r_minus else -1
    return IdentityReport(r_plus, r_minus, sign)
