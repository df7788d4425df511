import math

import mpmath
import numpy as np
import pytest
import scipy.special as sp

from chiral_skyrmion.errors import DomainError, ParameterError
from chiral_skyrmion.numerics import (
    EXACT_INTEGRALS,
    Profile,
    bessel,
    build_grid,
    cumulative_integral,
    differentiate,
    exact_integral,
    integrand,
    j1_zeros,
    norm_weighted,
    quad,
)
from chiral_skyrmion.operators import bubble


class TestGrid:
    def test_geometric_small(self):
        g = build_grid("geometric", 4, 1.0, 8.0)
        np.testing.assert_allclose(g.nodes, [1, 2, 4, 8], rtol=1e-15)

    def test_endpoints(self):
        g = build_grid("geometric", 2000, 1e-6, 200.0)
        assert g.n == 2000 and g.nodes[0] == 1e-6 and g.nodes[-1] == 200.0

    @pytest.mark.parametrize("kind", ["geometric", "uniform", "loglinear"])
    def test_invariants(self, kind):
        g = build_grid(kind, 500, 1e-3, 50.0)
        assert np.all(np.diff(g.nodes) > 0)
        assert np.all(g.quad_weights > 0)
        assert g.r_min == 1e-3 and g.r_max == 50.0

    @pytest.mark.parametrize("args", [("geometric", 3, 1e-3, 1.0), ("geometric", 10, 1.0, 1.0),
                                      ("geometric", 10, -1.0, 1.0), ("spiral", 10, 1e-3, 1.0)])
    def test_bad_arguments(self, args):
        with pytest.raises(ParameterError):
            build_grid(*args)

    def test_h2_over_r2_with_tail(self):
        g = build_grid("geometric", 2000, 1e-6, 200.0)
        b = bubble(g.nodes)
        assert abs(quad(b.h**2 / g.nodes**2, g, tail_correction=True) - 2.0) < 1e-8

    def test_quadrature_second_order(self):
        errs = []
        exact = 1.0 - 6.0 * math.exp(-5.0)
        for n in (200, 400, 800):
            g = build_grid("uniform", n, 1e-12, 5.0)
            errs.append(abs(quad(np.exp(-g.nodes), g) - exact))
        orders = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(orders > 1.9)

    def test_dual_and_scaled(self):
        g = build_grid("geometric", 100, 1e-2, 1e2)
        d = g.dual()
        assert d.n == 99 and np.all((d.nodes > g.nodes[:-1]) & (d.nodes < g.nodes[1:]))
        s = g.scaled(2.0)
        np.testing.assert_allclose(s.nodes, 2 * g.nodes)
        f = np.exp(-g.nodes)
        assert quad(np.exp(-s.nodes / 2), s) == pytest.approx(4 * quad(f, g), rel=1e-14)


class TestQuad:
    def test_values(self):
        g = build_grid("geometric", 4000, 1e-8, 1e8)
        b = bubble(g.nodes)
        assert quad(b.h**3 / g.nodes, g, tail_correction=True) == pytest.approx(2.0, rel=1e-10)
        assert quad(b.h**4, g, tail_correction=True) == pytest.approx(8 / 3, rel=1e-10)
        assert quad(np.zeros(g.n), g) == 0.0

    def test_length_mismatch(self):
        g = build_grid("geometric", 50, 1e-2, 1e2)
        with pytest.raises(ParameterError):
            quad(np.ones(49), g)

    @pytest.mark.parametrize("ident", sorted(EXACT_INTEGRALS))
    def test_integral_table(self, ident):
        g = build_grid("geometric", 4000, 1e-6, 1e4)
        val = quad(integrand(ident, g.nodes), g, tail_correction=True)
        assert abs(val / exact_integral(ident) - 1) < 1e-8

    @pytest.mark.parametrize("ident", sorted(EXACT_INTEGRALS))
    def test_integral_table_against_mpmath(self, ident):
        mpmath.mp.dps = 30
        h = lambda r: 2 * r / (1 + r * r)
        hh = lambda r: (r * r - 1) / (r * r + 1)
        f = {
            "h2_over_r2": lambda r: h(r) ** 2 / r**2,
            "hhat_h3_over_r": lambda r: hh(r) * h(r) ** 3 / r,
            "h4": lambda r: h(r) ** 4,
            "h4_over_r2": lambda r: h(r) ** 4 / r**2,
            "h3_over_r2": lambda r: h(r) ** 3 / r**2,
            "h3_over_r": lambda r: h(r) ** 3 / r,
            "h3_over_r3": lambda r: h(r) ** 3 / r**3,
            "hhat_h3_over_r3": lambda r: hh(r) * h(r) ** 3 / r**3,
        }[ident]
        val = mpmath.quad(lambda r: f(r) * r, [0, 1, mpmath.inf])
        assert float(val) == pytest.approx(exact_integral(ident), rel=1e-14, abs=1e-14)

    def test_exact_values(self):
        assert exact_integral("h2_over_r2") == 2.0
        assert exact_integral("h3_over_r2") == pytest.approx(math.pi / 2)
        assert exact_integral("h3_over_r3") == 2.0
        with pytest.raises(ParameterError):
            exact_integral("nope")

    def test_cumulative_fourth_order(self):
        errs = []
        for n in (50, 100, 200):
            s = np.linspace(0, 2, n)
            c = cumulative_integral(np.exp(s), s[1] - s[0])
            errs.append(np.max(np.abs(c - (np.exp(s) - 1))))
        assert np.log2(errs[0] / errs[1]) > 3.5


class TestDifferentiate:
    def test_constant(self):
        g = build_grid("geometric", 100, 1e-3, 1e3)
        assert np.all(differentiate(np.full(g.n, 3.7), g) == 0.0)

    @pytest.mark.parametrize("which", ["Q", "h"])
    def test_second_order(self, which):
        errs = []
        for n in (200, 400, 800):
            g = build_grid("geometric", n, 1e-2, 1e2)
            r = g.nodes
            b = bubble(r)
            f, exact = (b.Q, -2 / (1 + r * r)) if which == "Q" else (b.h, 2 * (1 - r * r) / (1 + r * r) ** 2)
            errs.append(np.max(np.abs(differentiate(f, g) - exact)))
        orders = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(orders > 1.9)

    def test_fourth_order_option(self):
        errs = []
        for n in (200, 400):
            g = build_grid("geometric", n, 1e-2, 1e2)
            r = g.nodes
            errs.append(np.max(np.abs(differentiate(bubble(r).Q, g, order=4) + 2 / (1 + r * r))))
        assert np.log2(errs[0] / errs[1]) > 3.5

    def test_linear_in_log(self):
        errs = []
        for n in (100, 200, 400):
            g = build_grid("geometric", n, 1e-2, 1e2)
            errs.append(np.max(np.abs(differentiate(np.log(g.nodes), g) * g.nodes - 1)))
        assert np.log2(errs[0] / errs[1]) > 1.9


class TestNorms:
    def test_zero(self):
        g = build_grid("geometric", 100, 1e-3, 1e3)
        assert norm_weighted(np.zeros(g.n), g, "X") == 0.0

    def test_X_of_h(self):
        g = build_grid("geometric", 4000, 1e-6, 1e6)
        assert norm_weighted(bubble(g.nodes).h, g, "X") == pytest.approx(math.sqrt(2 / 3) + math.sqrt(2), rel=1e-5)

    def test_sup_h_over_r(self):
        g = build_grid("geometric", 1000, 1e-6, 1e3)
        h = bubble(g.nodes).h
        assert np.max(np.abs(h / g.nodes)) == pytest.approx(2.0, rel=1e-10)
        assert norm_weighted(h, g, "Xinf") > 2.0

    def test_lp_and_l1log(self):
        g = build_grid("geometric", 2000, 1e-6, 1e3)
        f = np.exp(-g.nodes)
        assert norm_weighted(f, g, "Lp", 1) == pytest.approx(1.0, rel=1e-5)
        assert norm_weighted(f, g, "Lp", math.inf) == pytest.approx(1.0, rel=1e-5)
        assert norm_weighted(f, g, "L1log") > math.log(2.0)
        with pytest.raises(ParameterError):
            norm_weighted(f, g, "Lp", 0.5)
        with pytest.raises(ParameterError):
            norm_weighted(f, g, "H17")


class TestBessel:
    X = np.concatenate([np.geomspace(1e-8, 1, 40), np.linspace(1, 60, 400), [7.99, 8.0, 8.01, 24.99, 25.0, 25.01, 29.99, 30.0, 30.01, 1.99, 2.0, 2.01]])

    @pytest.mark.parametrize("kind,ref", [("J0", sp.j0), ("J1", sp.j1), ("I0e", sp.i0e), ("I1e", sp.i1e),
                                          ("K0e", sp.k0e), ("K1e", sp.k1e)])
    def test_against_scipy(self, kind, ref):
        got = bessel(kind, self.X)
        want = ref(self.X)
        scale = np.maximum(np.abs(want), 1.0 if kind.startswith("J") else 0.0) + 1e-300
        assert np.max(np.abs(got - want) / scale) < 1e-12

    def test_unscaled(self):
        x = np.array([0.3, 1.0, 5.0, 20.0])
        np.testing.assert_allclose(bessel("I1", x), sp.i1(x), rtol=1e-13)
        np.testing.assert_allclose(bessel("K1", x), sp.k1(x), rtol=1e-13)

    def test_mpmath_spot(self):
        for x in (0.5, 3.3, 12.0, 41.0):
            assert bessel("J1", x) == pytest.approx(float(mpmath.besselj(1, x)), rel=1e-12, abs=1e-15)
            assert bessel("K1", x) == pytest.approx(float(mpmath.besselk(1, x)), rel=1e-12)

    def test_trivial_values(self):
        assert bessel("J1", 0.0) == 0.0
        x = 1e-6
        assert abs(x * bessel("K1", x) - 1) < 1e-5

    def test_wronskian(self):
        x = 1.0
        i1p = bessel("I0", x) - bessel("I1", x) / x
        k1p = -bessel("K0", x) - bessel("K1", x) / x
        assert i1p * bessel("K1", x) - bessel("I1", x) * k1p == pytest.approx(1.0, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel("K1", 0.0)
        with pytest.raises(DomainError):
            bessel("I1", -1.0)

    def test_j1_zeros(self):
        z = j1_zeros(50)
        np.testing.assert_allclose(z, sp.jn_zeros(1, 50), rtol=1e-14)


class TestProfile:
    def test_validation(self):
        g = build_grid("geometric", 10, 1e-2, 1e2)
        with pytest.raises(ParameterError):
            Profile(g, np.ones(9))
        with pytest.raises(ParameterError):
            Profile(g, np.full(10, np.nan))
        with pytest.raises(ParameterError):
            Profile(g, np.ones(10), left_limit=1.0)
        with pytest.raises(ParameterError):
            Profile(g, np.ones(10), right_limit=1.0)
        p = Profile(g, np.ones(10), left_limit=2 * math.pi)
        assert p.with_values(np.zeros(10)).left_limit == 2 * math.pi
