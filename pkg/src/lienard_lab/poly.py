"""Polynomial arithmetic and guaranteed real-root isolation.

Coefficients are stored in ascending degree order (``coeffs[k]`` multiplies
``x**k``) as plain floats.  Root isolation runs a Sturm sequence on the
square-free part of the polynomial, then polishes each bracket with
bisection plus a few Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateInput

# Acceptance threshold for |p(r)| at a simple root, relative to coefficient scale.
ROOT_RESIDUAL_TOL = 1e-10
# Coefficient-trimming threshold used by the approximate gcd / remainder sequence.
GCD_TRIM_TOL = 1e-10
# Bracket width at which bisection hands over to Newton.
BISECT_WIDTH = 1e-8
NEWTON_STEPS = 20
# Refined roots closer than this (relative) are reported as one multiple root.
ROOT_MERGE_TOL = 1e-7


def _trimmed(coeffs: Iterable[float]) -> tuple[float, ...]:
    out = [float(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return tuple(out) if out else (0.0,)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with ascending coefficients, normalized on creation."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Sequence[float]):
        object.__setattr__(self, "coeffs", _trimmed(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0.0

    def __call__(self, x: float) -> float:
        """Horner evaluation; NaN input propagates NaN."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0.0,))
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def antiderivative(self) -> "Polynomial":
        """Antiderivative with zero constant term."""
        if self.is_zero:
            return Polynomial((0.0,))
        return Polynomial((0.0,) + tuple(c / (k + 1) for k, c in enumerate(self.coeffs)))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Polynomial(tuple(c + (b[i] if i < len(b) else 0.0) for i, c in enumerate(a)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return Polynomial(tuple(out))
        return Polynomial(tuple(other * c for c in self.coeffs))

    __rmul__ = __mul__

    def scale(self) -> float:
        return max(1.0, max(abs(c) for c in self.coeffs))


def evaluate(p: Polynomial, x: float) -> float:
    return p(x)


def derivative(p: Polynomial) -> Polynomial:
    return p.derivative()


def antiderivative(p: Polynomial) -> Polynomial:
    return p.antiderivative()


@dataclass(frozen=True)
class RootSet:
    """Real roots on an interval as (value, multiplicity), strictly increasing."""

    roots: tuple[tuple[float, int], ...]
    isolation_interval: tuple[float, float]

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(r for r, _ in self.roots)

    def __len__(self) -> int:
        return len(self.roots)


# ---------------------------------------------------------------------------
# coefficient-list helpers for the remainder sequences


def _norm(c: Sequence[float]) -> float:
    return max(abs(v) for v in c) if c else 0.0


def _trim_list(c: list[float], tol: float) -> list[float]:
    while len(c) > 1 and abs(c[-1]) <= tol:
        c.pop()
    if len(c) == 1 and abs(c[0]) <= tol:
        c[0] = 0.0
    return c


def _polydiv(num: Sequence[float], den: Sequence[float], tol: float) -> tuple[list[float], list[float]]:
    """Euclidean division of ascending coefficient lists: num = q*den + r."""
    r = list(num)
    d = list(den)
    if _norm(d) == 0.0:
        raise ZeroDivisionError("division by zero polynomial")
    dn = len(d) - 1
    lead = d[-1]
    q = [0.0] * max(1, len(r) - dn)
    trim = tol * max(_norm(r), _norm(d), 1.0)
    _trim_list(r, trim)
    while len(r) - 1 >= dn and _norm(r) > trim:
        k = len(r) - 1 - dn
        f = r[-1] / lead
        q[k] = f
        for i in range(dn + 1):
            r[k + i] -= f * d[i]
        r.pop()
        _trim_list(r, trim)
    return q, r


def _approx_gcd(a: Sequence[float], b: Sequence[float], tol: float = GCD_TRIM_TOL) -> list[float]:
    """Approximate gcd via a normalized Euclidean remainder sequence."""
    x = list(a)
    y = list(b)
    if _norm(y) > 0:
        y = [c / _norm(y) for c in y]
    if _norm(x) > 0:
        x = [c / _norm(x) for c in x]
    while True:
        ny = _norm(y)
        if ny == 0.0 or (len(y) == 1 and abs(y[0]) <= tol):
            break
        _, r = _polydiv(x, y, tol)
        r = _trim_list(r, tol * max(_norm(r), 1.0))
        nr = _norm(r)
        if nr <= tol:
            x, y = y, [0.0]
        else:
            x, y = y, [c / nr for c in r]
    return x


def _eval_list(c: Sequence[float], x: float) -> float:
    acc = 0.0
    for v in reversed(c):
        acc = acc * x + v
    return acc


def _deriv_list(c: Sequence[float]) -> list[float]:
    if len(c) == 1:
        return [0.0]
    return [k * v for k, v in enumerate(c)][1:]


def _sturm_chain(c: Sequence[float]) -> list[list[float]]:
    chain = [list(c), _deriv_list(c)]
    while len(chain[-1]) > 1 and _norm(chain[-1]) > 0:
        _, r = _polydiv(chain[-2], chain[-1], GCD_TRIM_TOL)
        nr = _norm(r)
        if nr <= GCD_TRIM_TOL * max(_norm(chain[-2]), 1.0):
            break
        chain.append([-v / nr for v in r])
    return chain


def _sign_variations(chain: Sequence[Sequence[float]], x: float) -> int:
    eps = 1e-13
    signs = []
    for c in chain:
        v = _eval_list(c, x)
        if abs(v) > eps * max(_norm(c), 1.0) * max(1.0, abs(x)) ** (len(c) - 1):
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _count_roots(chain, lo: float, hi: float) -> int:
    return _sign_variations(chain, lo) - _sign_variations(chain, hi)


def _isolate(chain, lo: float, hi: float, depth: int = 0) -> list[tuple[float, float]]:
    n = _count_roots(chain, lo, hi)
    if n == 0:
        return []
    if n == 1 or depth > 120:
        return [(lo, hi)]
    mid = 0.5 * (lo + hi)
    return _isolate(chain, lo, mid, depth + 1) + _isolate(chain, mid, hi, depth + 1)


def _refine(q: Sequence[float], dq: Sequence[float], lo: float, hi: float) -> float:
    flo = _eval_list(q, lo)
    fhi = _eval_list(q, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    # Bisect down to the hand-over width; the Sturm count guarantees exactly
    # one sign change in (lo, hi] for a square-free q.
    if flo * fhi > 0:
        # Root sits at (or numerically beyond) an endpoint; fall back on the
        # endpoint with the smaller residual.
        return lo if abs(flo) < abs(fhi) else hi
    while hi - lo > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        fm = _eval_list(q, mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    x = 0.5 * (lo + hi)
    best = x
    best_res = abs(_eval_list(q, x))
    for _ in range(NEWTON_STEPS):
        d = _eval_list(dq, x)
        if d == 0.0:
            break
        step = _eval_list(q, x) / d
        x -= step
        if not (lo - BISECT_WIDTH <= x <= hi + BISECT_WIDTH):
            x = 0.5 * (lo + hi)
            break
        res = abs(_eval_list(q, x))
        if res < best_res:
            best, best_res = x, res
        if abs(step) < 1e-16 * max(1.0, abs(x)):
            break
    return best


def real_roots(p: Polynomial, lo: float, hi: float) -> RootSet:
    """All real roots of ``p`` in ``[lo, hi]`` with multiplicities.

    Sturm-sequence isolation runs on the square-free part; multiplicities
    come from the gcd(p, p') decomposition chain.  Raises
    :class:`DegenerateInput` for the zero polynomial.
    """
    if p.is_zero:
        raise DegenerateInput("cannot isolate roots of the zero polynomial")
    if not lo < hi:
        raise DegenerateInput(f"empty interval [{lo}, {hi}]")
    if p.degree == 0:
        return RootSet((), (lo, hi))

    scale = p.scale()
    coeffs = [c / scale for c in p.coeffs]

    # Square-free chain: chain[k] = gcd applied k times; a root of
    # multiplicity m in p survives into chain[0..m-1].
    chain_sf: list[list[float]] = [coeffs]
    while len(chain_sf[-1]) > 1:
        g = _approx_gcd(chain_sf[-1], _deriv_list(chain_sf[-1]))
        if len(g) == 1:
            break
        chain_sf.append(g)

    if len(chain_sf) == 1:
        sqfree = coeffs
    else:
        sqfree, _ = _polydiv(coeffs, chain_sf[1], GCD_TRIM_TOL)
        if _norm(sqfree) == 0.0:
            sqfree = coeffs
    nsf = _norm(sqfree)
    sqfree = [c / nsf for c in sqfree]
    dsqfree = _deriv_list(sqfree)

    # Tiny symmetric expansion so closed-interval endpoints count as inside.
    pad = 1e-9 * max(1.0, abs(lo), abs(hi))
    sturm = _sturm_chain(sqfree)
    brackets = _isolate(sturm, lo - pad, hi + pad)

    refined = sorted(_refine(sqfree, dsqfree, a, b) for a, b in brackets)

    # Merge near-coincident refinements (double roots the approximate gcd
    # did not collapse) and attach multiplicities from the gcd chain.
    merged: list[list[float]] = []
    for r in refined:
        if merged and abs(r - merged[-1][0]) <= ROOT_MERGE_TOL * max(1.0, abs(r)):
            merged[-1][1] += 1
            merged[-1][0] = 0.5 * (merged[-1][0] + r)
        else:
            merged.append([r, 1])

    out: list[tuple[float, int]] = []
    res_tol = ROOT_RESIDUAL_TOL * p.scale()
    for r, dup in merged:
        mult = dup
        if dup == 1:
            mult = 1
            for level in chain_sf[1:]:
                lv = abs(_eval_list(level, r))
                if lv <= 1e-8 * max(_norm(level), 1.0) * max(1.0, abs(r)) ** (len(level) - 1):
                    mult += 1
                else:
                    break
        val = r
        if mult == 1:
            # Final polish on p itself for the residual guarantee.
            x = r
            dp = _deriv_list(list(p.coeffs))
            for _ in range(4):
                d = _eval_list(dp, x)
                if d == 0.0:
                    break
                x -= p(x) / d
            if abs(p(x)) <= abs(p(val)) and abs(x - r) <= 10 * BISECT_WIDTH * max(1.0, abs(r)):
                val = x
            if abs(p(val)) > res_tol:
                continue
        out.append((val, mult))

    return RootSet(tuple(out), (lo, hi))
