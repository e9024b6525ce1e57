import math

import numpy as np
import pytest

from lienard_lab.errors import DegenerateInput
from lienard_lab.poly import Polynomial, antiderivative, derivative, real_roots


def brute_real_roots(p: Polynomial, lo: float, hi: float) -> list[float]:
    """Independent root oracle: companion-matrix eigenvalues via numpy."""
    r = np.roots(list(reversed(p.coeffs)))
    vals = sorted(z.real for z in r if abs(z.imag) < 1e-7 and lo - 1e-9 <= z.real <= hi + 1e-9)
    out: list[float] = []
    for v in vals:
        if not out or v - out[-1] > 1e-7 * max(1.0, abs(v)):
            out.append(v)
    return out


class TestEval:
    def test_quintic_at_one(self, quintic_F):
        assert quintic_F(1.0) == pytest.approx(0.8 - 4.0 / 3.0 + 0.32, abs=1e-15)

    def test_constant_term_at_zero(self):
        p = Polynomial([3.5, -2.0, 7.0])
        assert p(0.0) == 3.5

    def test_root_by_construction(self):
        p = Polynomial([-1.0, 0.0, 1.0])
        assert p(1.0) == 0.0

    def test_nan_propagates(self):
        p = Polynomial([1.0, 2.0])
        assert math.isnan(p(float("nan")))

    def test_linearity_random(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = Polynomial(rng.uniform(-10, 10, size=rng.integers(1, 7)))
            b = Polynomial(rng.uniform(-10, 10, size=rng.integers(1, 7)))
            x = float(rng.uniform(-10, 10))
            lhs = (a + b)(x)
            rhs = a(x) + b(x)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestDerivative:
    def test_quintic(self, quintic_F):
        assert derivative(quintic_F).coeffs == pytest.approx([0.8, 0.0, -4.0, 0.0, 1.6])

    def test_constant_gives_zero(self):
        assert derivative(Polynomial([5.0])).is_zero

    def test_mu_cubic(self):
        p = Polynomial([0.0, 1.0, 0.0, -3.0, 0.0, 1.0])
        assert derivative(p).coeffs == pytest.approx([1.0, 0.0, -9.0, 0.0, 5.0])

    def test_degree_drops_by_one(self):
        p = Polynomial([1.0, 2.0, 3.0, 4.0])
        assert derivative(p).degree == p.degree - 1


class TestAntiderivative:
    def test_quintic_fprime(self):
        p = Polynomial([0.8, 0.0, -4.0, 0.0, 1.6])
        F = antiderivative(p)
        assert F.coeffs == pytest.approx([0.0, 0.8, 0.0, -4.0 / 3.0, 0.0, 0.32])

    def test_zero(self):
        assert antiderivative(Polynomial([0.0])).is_zero

    def test_monomial(self):
        assert antiderivative(Polynomial([0.0, 0.0, 3.0])).coeffs == pytest.approx([0.0, 0.0, 0.0, 1.0])

    def test_roundtrip_random(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p = Polynomial(rng.uniform(-5, 5, size=rng.integers(1, 9)))
            back = derivative(antiderivative(p))
            assert len(back.coeffs) == len(p.coeffs)
            for a, b in zip(back.coeffs, p.coeffs):
                # within 4 ulp per coefficient
                assert abs(a - b) <= 4 * math.ulp(max(abs(a), abs(b), 1e-300))


class TestRealRoots:
    def test_quintic_critical_points(self, quintic_F):
        dF = derivative(quintic_F)
        rs = real_roots(dF, 0.0, 16.0)
        assert rs.values == pytest.approx([0.4682, 1.5102], abs=1e-3)

    def test_unit_parabola(self):
        rs = real_roots(Polynomial([-1.0, 0.0, 1.0]), -2.0, 2.0)
        assert rs.values == pytest.approx([-1.0, 1.0], abs=1e-10)
        assert all(m == 1 for _, m in rs.roots)

    def test_double_root_at_discriminant_threshold(self):
        # 5x^4 - 3*mu*x^2 + 1 at the smallest mu with real roots: the two
        # root pairs collide at x = (1/5)^(1/4).
        mu = 2.0 * math.sqrt(5.0) / 3.0
        p = Polynomial([1.0, 0.0, -3.0 * mu, 0.0, 5.0])
        rs = real_roots(p, 0.0, 2.0)
        assert len(rs) == 1
        val, mult = rs.roots[0]
        assert val == pytest.approx(0.2 ** 0.25, abs=1e-4)
        assert mult == 2

    def test_zero_polynomial_rejected(self):
        with pytest.raises(DegenerateInput):
            real_roots(Polynomial([0.0]), -1.0, 1.0)

    def test_residual_bound_simple_roots(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            deg = int(rng.integers(1, 8))
            p = Polynomial(rng.uniform(-2, 2, size=deg + 1))
            if p.degree < 1:
                continue
            rs = real_roots(p, -10.0, 10.0)
            tol = 1e-10 * max(1.0, max(abs(c) for c in p.coeffs))
            for r, m in rs.roots:
                if m == 1:
                    assert abs(p(r)) <= tol

    def test_count_matches_companion_oracle(self):
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(120):
            deg = int(rng.integers(2, 8))
            p = Polynomial(rng.uniform(-2, 2, size=deg + 1))
            if p.degree < 2:
                continue
            expected = brute_real_roots(p, -10.0, 10.0)
            # Skip draws with a root hugging the interval border, where the
            # two methods may legitimately disagree about membership.
            if any(abs(abs(v) - 10.0) < 1e-6 for v in expected):
                continue
            got = real_roots(p, -10.0, 10.0)
            assert len(got) == len(expected)
            for a, b in zip(got.values, expected):
                assert a == pytest.approx(b, abs=1e-6)
            checked += 1
        assert checked > 80

    def test_multiplicity_from_constructed_factors(self):
        # (x - 1)^2 (x + 2) = x^3 - 3x + 2: double root at 1, simple at -2.
        p = Polynomial([2.0, -3.0, 0.0, 1.0])
        rs = real_roots(p, -5.0, 5.0)
        assert [(round(v, 6), m) for v, m in rs.roots] == [(-2.0, 1), (1.0, 2)]

    def test_roots_within_interval(self):
        p = Polynomial([-1.0, 0.0, 1.0])
        rs = real_roots(p, 0.0, 2.0)
        assert rs.values == pytest.approx([1.0])
