"""Interval partition of the positive axis at critical points of F'.

The positive critical points of F split (0, x_max] into m+1 contiguous
intervals; every isolated closed orbit puts its maximum x-amplitude in the
closure of one of them, at most one per interior.  Two cycle-count bounds
follow: 2n-1 from the degree of F alone and 2m+1 from the partition
(interiors plus borders).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateInput
from .poly import Polynomial, real_roots

# Roots of F' at or below this are treated as x = 0, not positive.
_POSITIVE_FLOOR = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    unbounded: bool = False

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, pad: float = 0.0) -> bool:
        return self.lo - pad <= x <= self.hi + pad


@dataclass(frozen=True)
class CriticalPartition:
    critical_points: tuple[float, ...]
    intervals: tuple[Interval, ...]
    x_max: float

    @property
    def m(self) -> int:
        return len(self.critical_points)


@dataclass(frozen=True)
class BoundReport:
    n: int
    m: int
    degree_bound: int
    partition_bound: int


def _cauchy_bound(p: Polynomial) -> float:
    lead = abs(p.coeffs[-1])
    rest = max((abs(c) for c in p.coeffs[:-1]), default=0.0)
    return 1.0 + rest / lead


def positive_critical_points(F: Polynomial, x_max: float | None = None) -> tuple[float, ...]:
    """Roots of F' strictly inside (0, x_max], deduplicated across multiplicity.

    With ``x_max=None`` the search interval is the Cauchy root bound of F',
    which contains every real root.
    """
    if F.degree < 1:
        raise DegenerateInput("F must be nonconstant")
    if x_max is not None and not x_max > 0:
        raise DegenerateInput("x_max must be positive")
    dF = F.derivative()
    if dF.degree == 0:
        return ()
    hi = x_max if x_max is not None else _cauchy_bound(dF)
    roots = real_roots(dF, 0.0, hi)
    return tuple(r for r in roots.values if r > _POSITIVE_FLOOR and r <= hi)


def default_x_max(critical_points: tuple[float, ...]) -> float:
    if not critical_points:
        return 10.0
    return 10.0 * (1.0 + max(critical_points))


def build_partition(F: Polynomial, x_max: float | None = None) -> CriticalPartition:
    """m+1 contiguous intervals covering (0, x_max], the last flagged unbounded."""
    cps = positive_critical_points(F, x_max)
    if x_max is None:
        x_max = default_x_max(cps)
        cps = tuple(c for c in cps if c < x_max)
    edges = [0.0, *cps, x_max]
    intervals = tuple(
        Interval(lo, hi, unbounded=(i == len(edges) - 2))
        for i, (lo, hi) in enumerate(zip(edges, edges[1:]))
    )
    return CriticalPartition(cps, intervals, x_max)


def degree_bound(n: int) -> int:
    """Cycle-count bound 2n - 1 from the degree of F."""
    if n < 1:
        raise DegenerateInput("degree must be at least 1")
    return 2 * n - 1


def partition_bound(p: CriticalPartition) -> int:
    """Cycle-count bound 2m + 1: one per interval interior plus one per border."""
    return 2 * p.m + 1


def bound_report(F: Polynomial, p: CriticalPartition) -> BoundReport:
    return BoundReport(
        n=F.degree,
        m=p.m,
        degree_bound=degree_bound(F.degree),
        partition_bound=partition_bound(p),
    )
