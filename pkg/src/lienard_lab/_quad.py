"""Cumulative quadrature along amplitude-ODE sample grids.

Samples near a turning point carry a square-root profile in x (the
derivative of phi blows up), so per segment the integral runs in either x
or phi, whichever parametrization is regular there.  With values and two
derivatives known at both endpoints the two-point quintic-Hermite integral
has a closed form,

    integral = h/2 (v0 + v1) + h^2/10 (d0 - d1) + h^3/120 (c0 + c1),

whose O(h^7) truncation sits well below the integrator's own O(h^5) step
error; all derivatives come analytically from the ODE, never from finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import Polynomial


@dataclass(frozen=True)
class OdeTerms:
    """Per-sample analytic data of the amplitude ODE along a trajectory.

    den = -x - F'(x) phi is phi * dphi/dx; xp = dx/dphi together with its
    first and second phi-derivatives stays finite at turning points, while
    dphidx and phipp blow up there (turning segments integrate in phi).
    """

    den: np.ndarray
    xp: np.ndarray
    dxp: np.ndarray
    d2xp: np.ndarray
    dden: np.ndarray
    ddden: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    fppp: np.ndarray
    dphidx: np.ndarray
    phipp: np.ndarray


def ode_terms(F: Polynomial, xs: np.ndarray, phis: np.ndarray) -> OdeTerms:
    dF = F.derivative()
    d2F = dF.derivative()
    d3F = d2F.derivative()
    fp = np.array([dF(x) for x in xs])
    fpp = np.array([d2F(x) for x in xs])
    fppp = np.array([d3F(x) for x in xs])

    den = -xs - fp * phis
    with np.errstate(divide="ignore", invalid="ignore"):
        xp = np.where(den != 0.0, phis / den, 0.0)
        dphidx = np.where(phis != 0.0, den / phis, np.inf)
        phipp_num = (-1.0 - fpp * phis - fp * dphidx) * phis - den * dphidx
        phipp = np.where(phis != 0.0, phipp_num / (phis * phis), np.inf)

    dden = -xp * (1.0 + fpp * phis) - fp
    ddden = -(
        (den - phis * dden) / np.where(den != 0.0, den * den, 1.0) * (1.0 + fpp * phis)
        + xp * (fppp * xp * phis + fpp)
        + fpp * xp
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        dxp = np.where(den != 0.0, (den - phis * dden) / (den * den), 0.0)
        d2xp = np.where(
            den != 0.0,
            (-phis * ddden * den - 2.0 * dden * (den - phis * dden)) / (den ** 3),
            0.0,
        )
    return OdeTerms(den, xp, dxp, d2xp, dden, ddden, fp, fpp, fppp, dphidx, phipp)


@dataclass(frozen=True)
class Integrand:
    """Integrand v against x with analytic derivatives in both parameters."""

    vals: np.ndarray
    dvdx: np.ndarray      # may be non-finite at turning samples
    d2vdx2: np.ndarray    # may be non-finite at turning samples
    dvdphi: np.ndarray    # finite everywhere on solver trajectories
    d2vdphi2: np.ndarray  # finite everywhere on solver trajectories


def _quintic_increments(h, v0, v1, d0, d1, c0, c1):
    return 0.5 * h * (v0 + v1) + h * h / 10.0 * (d0 - d1) + h ** 3 / 120.0 * (c0 + c1)


def cumulative_integral(F: Polynomial, xs: np.ndarray, phis: np.ndarray,
                        g: Integrand, terms: OdeTerms | None = None) -> np.ndarray:
    """Cumulative integral of g with respect to x along the samples."""
    t = terms if terms is not None else ode_terms(F, xs, phis)

    # The phi parametrization has its own singularity at phi-extrema
    # (dx/dphi blows up where den = 0), so it is used only deep inside a
    # turning layer, where |dphi/dx| is large and the x-form data explode.
    steep = np.abs(t.den) >= 50.0 * np.abs(phis)
    phi_mode = steep[:-1] & steep[1:]
    bad = ~(np.isfinite(g.dvdx) & np.isfinite(g.d2vdx2))
    phi_mode = phi_mode | bad[:-1] | bad[1:]

    hx = np.diff(xs)
    with np.errstate(invalid="ignore", over="ignore"):
        inc_x = _quintic_increments(
            hx, g.vals[:-1], g.vals[1:], g.dvdx[:-1], g.dvdx[1:], g.d2vdx2[:-1], g.d2vdx2[1:]
        )

    # In the phi parametrization the integrand is w = v * dx/dphi.
    w = g.vals * t.xp
    dw = g.dvdphi * t.xp + g.vals * t.dxp
    d2w = g.d2vdphi2 * t.xp + 2.0 * g.dvdphi * t.dxp + g.vals * t.d2xp
    hp = np.diff(phis)
    inc_p = _quintic_increments(hp, w[:-1], w[1:], dw[:-1], dw[1:], d2w[:-1], d2w[1:])

    inc = np.where(phi_mode, inc_p, np.where(np.isfinite(inc_x), inc_x, inc_p))
    out = np.empty(len(xs))
    out[0] = 0.0
    np.cumsum(inc, out=out[1:])
    return out


def weighted_phi_integrand(F: Polynomial, xs: np.ndarray, phis: np.ndarray,
                           terms: OdeTerms, weight: Polynomial | None = None) -> Integrand:
    """Integrand w(x) * phi(x); with weight None just phi itself."""
    if weight is None:
        return Integrand(
            vals=phis,
            dvdx=terms.dphidx,
            d2vdx2=terms.phipp,
            dvdphi=np.ones_like(phis),
            d2vdphi2=np.zeros_like(phis),
        )
    wv = np.array([weight(x) for x in xs])
    dw = weight.derivative()
    dwv = np.array([dw(x) for x in xs])
    d2w = dw.derivative()
    d2wv = np.array([d2w(x) for x in xs])
    with np.errstate(invalid="ignore", over="ignore"):
        dvdx = dwv * phis + wv * terms.dphidx
        d2vdx2 = d2wv * phis + 2.0 * dwv * terms.dphidx + wv * terms.phipp
    dvdphi = dwv * terms.xp * phis + wv
    d2vdphi2 = (
        d2wv * terms.xp ** 2 * phis
        + dwv * (terms.dxp * phis + 2.0 * terms.xp)
    )
    return Integrand(wv * phis, dvdx, d2vdx2, dvdphi, d2vdphi2)


def cumulative_phi_integral(F: Polynomial, xs: np.ndarray, phis: np.ndarray,
                            weight: Polynomial | None = None) -> np.ndarray:
    """Cumulative integral of weight(x) * phi(x) dx (weight omitted: phi)."""
    terms = ode_terms(F, xs, phis)
    g = weighted_phi_integrand(F, xs, phis, terms, weight)
    return cumulative_integral(F, xs, phis, g, terms)


def acceleration_integrand(F: Polynomial, xs: np.ndarray, phis: np.ndarray,
                           terms: OdeTerms) -> Integrand:
    """Integrand -x - F'(x) phi (the second-order form's right-hand side)."""
    with np.errstate(invalid="ignore", over="ignore"):
        dvdx = -1.0 - terms.fpp * phis - terms.fp * terms.dphidx
        d2vdx2 = -terms.fppp * phis - 2.0 * terms.fpp * terms.dphidx - terms.fp * terms.phipp
    return Integrand(terms.den, dvdx, d2vdx2, terms.dden, terms.ddden)


def level_integrand(zi: np.ndarray, below: np.ndarray, below2: np.ndarray,
                    terms: OdeTerms) -> Integrand:
    """Integrand for one iterated-integral level: v = Z_i, v' = Z_{i-1}, v'' = Z_{i-2}.

    For i = 1 use :func:`weighted_phi_integrand` instead (its x-derivatives
    blow up at turning points; here everything is finite).
    """
    dvdphi = below * terms.xp
    d2vdphi2 = below2 * terms.xp ** 2 + below * terms.dxp
    return Integrand(zi, below, below2, dvdphi, d2vdphi2)
