import numpy as np
import pytest

from lienard_lab.errors import DegenerateInput
from lienard_lab.partition import (
    BoundReport,
    bound_report,
    build_partition,
    degree_bound,
    partition_bound,
    positive_critical_points,
)
from lienard_lab.poly import Polynomial


class TestPositiveCriticalPoints:
    def test_quintic(self, quintic_F):
        cps = positive_critical_points(quintic_F, 16.0)
        assert cps == pytest.approx([0.4682, 1.5102], abs=1e-3)

    def test_vdp(self, vdp_F):
        assert positive_critical_points(vdp_F, 10.0) == pytest.approx([1.0], abs=1e-10)

    def test_same_sign_cubic_has_none(self, cubic_no_cycles_F):
        assert positive_critical_points(cubic_no_cycles_F, 10.0) == ()

    def test_constant_rejected(self):
        with pytest.raises(DegenerateInput):
            positive_critical_points(Polynomial([2.0]), 10.0)

    def test_negative_roots_excluded(self):
        # F' = (x + 1)^2 has only a negative root.
        F = Polynomial([0.0, 1.0, 1.0, 1.0 / 3.0])
        assert positive_critical_points(F, 10.0) == ()


class TestBuildPartition:
    def test_quintic_structure(self, quintic_F):
        p = build_partition(quintic_F, x_max=16.0)
        assert len(p.intervals) == 3
        assert p.intervals[0].lo == 0.0
        for left, right in zip(p.intervals, p.intervals[1:]):
            assert left.hi == right.lo  # exact float sharing
        assert p.intervals[-1].unbounded
        assert p.intervals[-1].hi == 16.0
        assert not p.intervals[0].unbounded

    def test_linear_single_unbounded(self):
        p = build_partition(Polynomial([0.0, 1.0]), x_max=7.0)
        assert len(p.intervals) == 1
        assert p.intervals[0] == p.intervals[-1]
        assert p.intervals[0].unbounded
        assert (p.intervals[0].lo, p.intervals[0].hi) == (0.0, 7.0)

    def test_vdp_two_intervals(self, vdp_F):
        p = build_partition(vdp_F, x_max=5.0)
        assert len(p.intervals) == 2
        assert p.intervals[0].hi == pytest.approx(1.0, abs=1e-10)

    def test_default_x_max_rule(self, vdp_F):
        p = build_partition(vdp_F)
        assert p.x_max == pytest.approx(10.0 * (1.0 + p.critical_points[-1]))
        q = build_partition(Polynomial([0.0, 1.0, 0.0, 1.0]))
        assert q.x_max == 10.0

    def test_tiling_no_gaps(self, quintic_F):
        p = build_partition(quintic_F, x_max=12.0)
        assert p.intervals[0].lo == 0.0
        assert p.intervals[-1].hi == p.x_max
        for left, right in zip(p.intervals, p.intervals[1:]):
            assert left.hi == right.lo
        assert p.critical_points == tuple(iv.hi for iv in p.intervals[:-1])


class TestBounds:
    def test_degree_bound_examples(self):
        assert degree_bound(3) == 5
        assert degree_bound(1) == 1
        assert degree_bound(5) == 9

    def test_degree_bound_rejects_nonpositive(self):
        with pytest.raises(DegenerateInput):
            degree_bound(0)

    def test_partition_bound_examples(self, quintic_F, vdp_F):
        assert partition_bound(build_partition(quintic_F)) == 5
        assert partition_bound(build_partition(vdp_F)) == 3
        assert partition_bound(build_partition(Polynomial([0.0, 1.0, 0.0, 1.0]))) == 1

    def test_partition_bound_three_critical_points(self):
        # F' = (x^2-1)^2 (1-x)(x^2 - x + 1/8) has positive roots
        # {(1-sqrt(1/2))/2 approx 0.1464, (1+sqrt(1/2))/2 approx 0.8536, 1}.
        fp = (
            Polynomial([-1.0, 0.0, 1.0])
            * Polynomial([-1.0, 0.0, 1.0])
            * Polynomial([1.0, -1.0])
            * Polynomial([0.125, -1.0, 1.0])
        )
        F = fp.antiderivative()
        part = build_partition(F)
        assert len(part.critical_points) == 3
        assert partition_bound(part) == 7

    def test_bound_report_consistency(self, quintic_F):
        part = build_partition(quintic_F)
        rep = bound_report(quintic_F, part)
        assert rep == BoundReport(n=5, m=2, degree_bound=9, partition_bound=5)
        assert rep.partition_bound <= rep.degree_bound

    def test_monotonicity(self):
        assert all(degree_bound(n) < degree_bound(n + 1) for n in range(1, 8))

    def test_even_fprime_positive_lead_no_roots_single_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            # F' = x^2 + c with c > 0: even degree, positive lead, no real roots.
            c = float(rng.uniform(0.1, 4.0))
            F = Polynomial([0.0, c, 0.0, 1.0 / 3.0])
            p = build_partition(F)
            assert len(p.intervals) == 1
