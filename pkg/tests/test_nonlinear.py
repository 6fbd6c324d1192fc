"""Nonlinearity catalog, derivative-bound checker, and inequality ratios."""

import numpy as np
import pytest

from halfwave_lab.besov import BesovParams
from halfwave_lab.ensembles import band_limited_field
from halfwave_lab.nonlinear import (
    DegenerateInputError,
    Nonlinearity,
    chainrule_ratio,
    check_property_Fkp,
    directional_derivative,
    evaluate,
    glassey,
    leibniz_ratio,
    power_abs,
    power_gauge,
)
from halfwave_lab.spectral import Field, Grid


class TestCatalog:
    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            Nonlinearity("power_gauge", 0.9)
        with pytest.raises(ValueError):
            Nonlinearity("power_gauge", 2.0, k=3)  # k > p
        with pytest.raises(ValueError):
            Nonlinearity("mystery", 2.0)
        with pytest.raises(ValueError):
            Nonlinearity("custom", 2.0)  # missing fn

    def test_default_smoothness_index(self):
        assert power_gauge(2.5).k == 2
        assert power_gauge(3.0).k == 2
        assert power_abs(2.0).k == 1

    def test_zero_maps_to_zero(self):
        z = np.array([0.0 + 0.0j])
        for F in (power_gauge(2.3), power_abs(1.7), glassey(2.0)):
            assert F.pointwise(z)[0] == 0.0

    def test_gauge_kind_values(self):
        F = power_gauge(2.0, 1.0)
        assert F.pointwise(np.array([1.0 + 0j]))[0] == pytest.approx(1.0)
        z = np.array([2.0j])
        assert F.pointwise(z)[0] == pytest.approx(4.0j)

    def test_glassey_kills_imaginary_input(self):
        F = glassey(2.0)
        assert F.pointwise(np.array([3.0j]))[0] == 0.0
        val = F.pointwise(np.array([2.0 + 5.0j]))[0]
        assert val == pytest.approx(4.0j)

    def test_pointwise_power_bound(self):
        # |F(u)| <= |lam| |u|^p for the catalog kinds
        rng = np.random.default_rng(0)
        z = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        for F in (power_gauge(2.4, 0.7), power_abs(3.0, 1.2), glassey(1.8, 1.0)):
            bound = abs(F.lam) * np.abs(z) ** F.p
            assert np.all(np.abs(F.pointwise(z)) <= bound * (1 + 1e-12))

    def test_homogeneity_of_gauge_power(self):
        grid = Grid(1, np.pi, 64)
        f = band_limited_field(grid, seed=1)
        F = power_gauge(2.5)
        mu = 1.7
        a = evaluate(F, f.with_values(mu * f.values))
        b = evaluate(F, f)
        assert np.max(np.abs(a.values - mu**2.5 * b.values)) <= 1e-12 * np.max(np.abs(a.values))


class TestDirectionalDerivatives:
    def test_gauge_first_derivative_against_finite_difference(self):
        F = power_gauge(2.5, 0.8 + 0.3j)
        G = Nonlinearity("custom", 2.5, k=2, fn=F.pointwise)
        rng = np.random.default_rng(3)
        for _ in range(20):
            z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            h = np.exp(1j * rng.uniform(0, 2 * np.pi))
            exact = directional_derivative(F, z, h, 1)
            approx = directional_derivative(G, z, h, 1, fd_step=1e-6)
            assert abs(exact - approx) < 1e-6 * max(1.0, abs(exact))

    def test_glassey_derivative_matches_finite_difference(self):
        F = glassey(2.5)
        G = Nonlinearity("custom", 2.5, k=2, fn=F.pointwise)
        z, h = 1.5 - 0.5j, np.exp(0.3j)
        for j in (1, 2):
            exact = directional_derivative(F, z, h, j)
            approx = directional_derivative(G, z, h, j, fd_step=1e-5)
            assert abs(exact - approx) < 1e-4 * max(1.0, abs(exact))


class TestPropertyChecker:
    def test_gauge_p2_lipschitz_constant_matches_oracle(self):
        # frozen oracle: the two-point quotient of |u|u maximizes along a
        # ray, sup_{x>y>0} (x^2 - y^2) / ((x - y) x) = 2
        F = power_gauge(2.0)
        report = check_property_Fkp(F, samples=1000, radius=10.0, seed=1)
        assert report.passed
        assert report.constants[0] == pytest.approx(2.0, rel=0.05)

    def test_gauge_p2_first_order_stable(self):
        F = power_gauge(2.0)
        report = check_property_Fkp(F, samples=800, radius=10.0, seed=2)
        assert report.finite[1] and report.stable[1]

    def test_quadratic_polynomial_second_derivative_constant(self):
        # F = u^2 has constant second derivative, so the j = 2 two-point
        # quotient vanishes (up to finite-difference roundoff)
        F = Nonlinearity("custom", 2.0, k=2, fn=lambda z: z * z)
        report = check_property_Fkp(F, samples=400, radius=10.0, seed=3)
        assert report.constants[2] < 1e-4

    def test_catalog_members_pass_with_declared_indices(self):
        for F in (power_gauge(2.0), power_abs(2.0), power_gauge(3.0)):
            report = check_property_Fkp(F, samples=600, radius=5.0, seed=4)
            assert report.passed, (F.kind, F.p, report)

    def test_glassey_flags_rather_than_fails_near_axis(self):
        # p = 1.6 < k + 1 = 2: top-order bound is the Hoelder form; sign
        # flips of Re z near zero are flagged, not fatal
        F = glassey(1.6, k=1)
        report = check_property_Fkp(F, samples=600, radius=5.0, seed=5)
        assert all(report.finite)


class TestChainRuleRatio:
    def test_scale_invariance_for_gauge_power(self):
        grid = Grid(1, np.pi, 128)
        f = band_limited_field(grid, seed=7)
        F = power_gauge(2.0)
        p = BesovParams(0.5, 2, 2, True)
        r1 = chainrule_ratio(F, f, p)
        r2 = chainrule_ratio(F, f.with_values(5.3 * f.values), p)
        assert abs(r1 - r2) <= 1e-10 * r1

    def test_zero_field_rejected(self):
        grid = Grid(1, np.pi, 64)
        f = Field(grid, np.zeros(64))
        with pytest.raises(DegenerateInputError):
            chainrule_ratio(power_gauge(2.0), f, BesovParams(0.5, 2, 2, True))

    def test_smoothness_precondition(self):
        grid = Grid(1, np.pi, 64)
        f = band_limited_field(grid, seed=8)
        with pytest.raises(ValueError):
            chainrule_ratio(power_gauge(2.0), f, BesovParams(2.5, 2, 2, True))

    def test_ensemble_sup_finite_and_grid_stable(self):
        F = power_gauge(2.0)
        p = BesovParams(0.5, 2, 2, True)
        sups = {}
        k_cut = None
        for N in (128, 256):
            grid = Grid(1, np.pi, N)
            if k_cut is None:
                k_cut = 0.5 * grid.nyquist
            vals = []
            for i in range(40):
                f = band_limited_field(grid, seed=50, index=i, k_cut=k_cut)
                vals.append(chainrule_ratio(F, f, p))
            sups[N] = max(vals)
        assert np.isfinite(sups[128]) and np.isfinite(sups[256])
        assert abs(sups[256] - sups[128]) / sups[128] < 0.2

    def test_dealias_switch_changes_little_on_smooth_fields(self):
        grid = Grid(1, np.pi, 256)
        f = band_limited_field(grid, seed=9, k_cut=0.25 * grid.nyquist)
        F = power_gauge(2.0)
        p = BesovParams(0.5, 2, 2, True)
        r_plain = chainrule_ratio(F, f, p, dealias=False)
        r_filtered = chainrule_ratio(F, f, p, dealias=True)
        assert abs(r_plain - r_filtered) / r_plain < 0.05


class TestLeibnizRatio:
    def test_constant_second_factor(self):
        grid = Grid(1, np.pi, 128)
        f = band_limited_field(grid, seed=11)
        g = Field(grid, np.ones(128))
        ratio = leibniz_ratio(f, g, 0.3)
        assert ratio <= 1.0 + 1e-12

    def test_single_mode_closed_form(self):
        # f = g = e^{ikx}: fg = e^{2ikx} and the ratio collapses to 2^{s-1}
        grid = Grid(1, np.pi, 128)
        s = 0.3
        f = Field(grid, np.exp(1j * 4 * grid.axis_coordinates()))
        ratio = leibniz_ratio(f, f, s)
        assert ratio == pytest.approx(2.0 ** (s - 1.0), abs=1e-8)

    def test_ensemble_sup_finite_and_grid_stable(self):
        s = 0.5
        sups = {}
        k_cut = None
        for N in (32, 64):
            grid = Grid(2, np.pi, N)
            if k_cut is None:
                k_cut = 0.5 * grid.nyquist
            vals = []
            for i in range(50):
                f = band_limited_field(grid, seed=60, index=2 * i, k_cut=k_cut)
                g = band_limited_field(grid, seed=60, index=2 * i + 1, k_cut=k_cut)
                vals.append(leibniz_ratio(f, g, s))
            sups[N] = max(vals)
        assert np.isfinite(sups[64])
        assert abs(sups[64] - sups[32]) / sups[32] < 0.2

    def test_out_of_range_smoothness(self):
        grid = Grid(1, np.pi, 64)
        f = band_limited_field(grid, seed=12)
        with pytest.raises(ValueError):
            leibniz_ratio(f, f, 0.5)  # s = n/2 excluded

    def test_zero_denominator(self):
        grid = Grid(1, np.pi, 64)
        z = Field(grid, np.zeros(64))
        with pytest.raises(DegenerateInputError):
            leibniz_ratio(z, z, 0.3)
