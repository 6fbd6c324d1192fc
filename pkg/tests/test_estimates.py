"""A priori estimate benches: dispersive, weighted, and radial bounds."""

import math

import numpy as np
import pytest

from halfwave_lab.ensembles import band_limited_field, gaussian_bumps_field, radial_field
from halfwave_lab.estimates import (
    EstimateReport,
    WeightSpec,
    is_radial,
    local_energy_check,
    muckenhoupt_characteristic,
    radial_sobolev_ratio,
    strichartz_ratio,
    summarize,
    weighted_chainrule_ratio,
    weighted_riesz_ratio,
)
from halfwave_lab.nonlinear import power_gauge
from halfwave_lab.spectral import Field, Grid, SpectralError, lebesgue_norm


def lattice_mode(grid, m):
    mesh = grid.meshgrid()
    k = [np.pi / grid.half_length * mi for mi in np.atleast_1d(m)]
    phase = sum(ki * xi for ki, xi in zip(k, mesh))
    return Field(grid, np.exp(1j * phase)), np.array(k)


class TestWeightSpec:
    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            WeightSpec(0.0)
        with pytest.raises(ValueError):
            WeightSpec(0.5, -0.1)
        with pytest.raises(ValueError):
            WeightSpec(0.5, 0.1, "bogus")

    def test_admissibility(self):
        assert WeightSpec(0.5, 0.3, "global").admissible(2)
        assert WeightSpec(1.0).admissible(1)
        # head + tail reaching the dimension is excluded
        assert not WeightSpec(0.5, 1.6, "global").admissible(2)

    def test_trivial_weight_is_one(self):
        w = WeightSpec(1.0)
        r = np.linspace(0, 5, 11)
        assert np.allclose(w(r), 1.0)

    def test_origin_clamp_on_grid(self):
        grid = Grid(2, 4.0, 32)
        w = WeightSpec(0.5)
        table = w.on_grid(grid)
        assert np.all(np.isfinite(table))
        assert table.max() == pytest.approx(w(np.array([grid.spacing / 2]))[0])


class TestStrichartz:
    def test_single_mode_closed_form(self):
        # |U(t) e^{ik.x}| = 1 pointwise, so the time norm is T^{1/q}
        grid = Grid(2, np.pi, 32)
        f, k = lattice_mode(grid, (3, 0))
        q, T = 5.0, 1.0
        rep = strichartz_ratio(f, q, T, wrap_guard=False)
        sigma = 1.0 - 1.0 / q
        oracle = T ** (1 / q) / (np.linalg.norm(k) ** sigma * lebesgue_norm(f, 2))
        assert rep.ratio == pytest.approx(oracle, abs=1e-8 * oracle)

    def test_admissible_range_enforced(self):
        grid = Grid(2, 8.0, 32)
        f = gaussian_bumps_field(grid, seed=1, support_radius=1.0, width_range=(0.4, 0.6))
        with pytest.raises(SpectralError):
            strichartz_ratio(f, 3.0, 1.0)  # n = 2 needs q > 4 without radial symmetry
        with pytest.raises(SpectralError):
            strichartz_ratio(f, np.inf, 1.0)

    def test_ensemble_sup_stable_under_horizon_doubling(self):
        grid = Grid(2, 16.0, 96)
        reports_T, reports_2T = [], []
        for i in range(12):
            f = gaussian_bumps_field(grid, seed=7, index=i, support_radius=1.0,
                                     width_range=(0.5, 0.9))
            reports_T.append(strichartz_ratio(f, 5.0, 2.0))
            reports_2T.append(strichartz_ratio(f, 5.0, 4.0))
        sup1 = max(r.ratio for r in reports_T)
        sup2 = max(r.ratio for r in reports_2T)
        assert np.isfinite(sup2)
        assert sup2 <= sup1 * 1.10  # horizon doubling grows the sup < 10%

    def test_radial_endpoint_three_dimensions(self):
        grid = Grid(3, 8.0, 48)
        sups = []
        for i in range(6):
            f = radial_field(grid, seed=9, index=i, width_range=(0.4, 0.7))
            rep = strichartz_ratio(f, 2.0, 2.0, radial=True)
            sups.append(rep.ratio)
        assert np.all(np.isfinite(sups))

    def test_radial_claim_checked(self):
        grid = Grid(2, 8.0, 48)
        f = gaussian_bumps_field(grid, seed=3, support_radius=1.5, width_range=(0.4, 0.6))
        with pytest.raises(SpectralError):
            strichartz_ratio(f, 3.0, 1.0, radial=True)


class TestLocalEnergy:
    def test_unweighted_case_ratio_two(self):
        # delta = 1, G = 0: both time factors collapse and mass
        # conservation pins the ratio at 2
        grid = Grid(2, 8.0, 64)
        u0 = gaussian_bumps_field(grid, seed=3, support_radius=1.0, width_range=(0.4, 0.6))
        rep = local_energy_check(u0, None, WeightSpec(1.0), T=1.0, dt=0.01)
        assert rep.ratio == pytest.approx(2.0, rel=1e-6)

    def test_compact_data_refinement_stable(self):
        w = WeightSpec(0.5)
        ratios = {}
        for N in (64, 128):
            grid = Grid(2, 8.0, N)
            u0 = gaussian_bumps_field(grid, seed=11, support_radius=1.0, width_range=(0.5, 0.8))
            ratios[N] = local_energy_check(u0, None, w, T=1.0, dt=0.01).ratio
        assert abs(ratios[128] - ratios[64]) / ratios[64] < 0.2

    def test_forced_run_finite(self):
        grid = Grid(2, 8.0, 64)
        u0 = gaussian_bumps_field(grid, seed=5, support_radius=1.0, width_range=(0.4, 0.6))
        r = grid.radii()
        bump = np.exp(-(r**2)).astype(complex)

        def source(t):
            return math.exp(-10.0 * (t - 0.5) ** 2) * bump

        rep = local_energy_check(u0, source, WeightSpec(0.5), T=1.0, dt=0.01)
        assert np.isfinite(rep.ratio) and rep.ratio > 0

    def test_log_and_global_forms(self):
        grid = Grid(2, 8.0, 64)
        u0 = gaussian_bumps_field(grid, seed=6, support_radius=1.0, width_range=(0.4, 0.6))
        for w in (WeightSpec(0.5, form="kss"), WeightSpec(0.5, 0.3, form="global")):
            rep = local_energy_check(u0, None, w, T=1.0, dt=0.01)
            assert np.isfinite(rep.ratio)

    def test_inadmissible_weight_rejected(self):
        grid = Grid(2, 8.0, 64)
        u0 = gaussian_bumps_field(grid, seed=5, support_radius=1.0, width_range=(0.4, 0.6))
        with pytest.raises(ValueError):
            local_energy_check(u0, None, WeightSpec(0.5, 1.6, "global"), T=1.0)


class TestMuckenhoupt:
    def test_unit_weight_characteristic_is_one(self):
        val = muckenhoupt_characteristic(
            lambda r: np.ones_like(np.asarray(r, dtype=float)), 2, "A1", 6
        )
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_admissible_weight_stable_under_resolution_doubling(self):
        w = WeightSpec(0.5, 0.3, "global")
        vals = [muckenhoupt_characteristic(w, 2, "A1", res) for res in (8, 16)]
        assert np.isfinite(vals[1])
        assert vals[1] <= vals[0] * 1.10

    def test_inadmissible_control_diverges(self):
        # borderline non-integrable w^2 = r^{-n}: the certified sup must
        # keep growing by more than 2x per resolution doubling
        ctrl = lambda r: np.asarray(r, dtype=float) ** (-2.0)
        vals = [muckenhoupt_characteristic(ctrl, 2, "A1", res) for res in (4, 8, 16)]
        assert vals[1] > 2.0 * vals[0]
        assert vals[2] > 2.0 * vals[1]

    def test_monotone_in_resolution(self):
        w = WeightSpec(0.5, 0.3, "global")
        vals = [muckenhoupt_characteristic(w, 2, "A1", res) for res in (2, 3, 4, 6, 8)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_a2_variant(self):
        w = WeightSpec(0.5)
        v = muckenhoupt_characteristic(w, 2, "A2", 8)
        assert np.isfinite(v) and v >= 1.0 - 1e-9


class TestWeightedRiesz:
    def test_unit_weight_bounds(self):
        grid = Grid(2, 8.0, 64)
        for i in range(10):
            f = band_limited_field(grid, seed=13, index=i)
            r = weighted_riesz_ratio(f, WeightSpec(1.0))
            assert 1.0 / math.sqrt(2) - 1e-12 <= r <= 1.0 + 1e-12

    def test_single_mode_closed_form(self):
        grid = Grid(2, 8.0, 64)
        f, k = lattice_mode(grid, (4, 2))
        r = weighted_riesz_ratio(f, WeightSpec(0.5))
        oracle = np.linalg.norm(k) / np.sum(np.abs(k))
        assert r == pytest.approx(oracle, abs=1e-10)

    def test_admissible_weight_ensemble_stable(self):
        w = WeightSpec(0.5, 0.5, "kss")
        sups = {}
        k_cut = None
        for N in (48, 96):
            grid = Grid(2, 8.0, N)
            if k_cut is None:
                k_cut = 0.5 * grid.nyquist
            vals = []
            for i in range(20):
                f = band_limited_field(grid, seed=17, index=i, k_cut=k_cut)
                vals.append(weighted_riesz_ratio(f, w))
            sups[N] = max(vals)
        assert np.isfinite(sups[96])
        assert abs(sups[96] - sups[48]) / sups[48] < 0.2


class TestRadialSobolev:
    def test_gaussian_profile_finite_and_refinement_stable(self):
        vals = {}
        for N in (64, 128):
            grid = Grid(2, 8.0, N)
            r = grid.radii()
            f = Field(grid, np.exp(-(r**2) / 2).astype(complex))
            vals[N] = radial_sobolev_ratio(f, 0.75, "trace")
        assert abs(vals[128] - vals[64]) / vals[64] < 0.1

    def test_amplitude_scale_invariance(self):
        grid = Grid(2, 8.0, 64)
        f = radial_field(grid, seed=21)
        a = radial_sobolev_ratio(f, 0.75, "trace")
        b = radial_sobolev_ratio(f.with_values(11.0 * f.values), 0.75, "trace")
        assert abs(a - b) <= 1e-12 * a

    def test_concentration_family_bounded(self):
        grid = Grid(2, 8.0, 128)
        r = grid.radii()
        base = radial_sobolev_ratio(Field(grid, np.exp(-(r**2)).astype(complex)), 0.75)
        for scale in (1.0, 0.5, 0.25, 0.125):
            f = Field(grid, np.exp(-((r / scale) ** 2)).astype(complex))
            ratio = radial_sobolev_ratio(f, 0.75, "trace")
            assert ratio <= 3.0 * base  # bounded along the concentrating family

    def test_pointwise_form(self):
        grid = Grid(2, 8.0, 64)
        f = radial_field(grid, seed=23)
        v = radial_sobolev_ratio(f, 0.8, "pointwise")
        assert np.isfinite(v) and v > 0

    def test_non_radial_rejected(self):
        grid = Grid(2, 8.0, 64)
        f = gaussian_bumps_field(grid, seed=25, support_radius=1.5, width_range=(0.4, 0.6))
        assert not is_radial(f)
        with pytest.raises(SpectralError):
            radial_sobolev_ratio(f, 0.75, "trace")

    def test_exponent_ranges(self):
        grid = Grid(2, 8.0, 64)
        f = radial_field(grid, seed=27)
        with pytest.raises(ValueError):
            radial_sobolev_ratio(f, 0.4, "trace")
        with pytest.raises(ValueError):
            radial_sobolev_ratio(f, 1.1, "pointwise")  # s = n/2 excluded in n = 2


class TestWeightedChainRule:
    def test_zero_order_unit_weight_is_hoelder(self):
        # s = 0, w = 1 collapses to ||F(u)||_2 <= |lam| ||u||_inf^{p-1} ||u||_2
        grid = Grid(2, 8.0, 64)
        F = power_gauge(2.0)
        for i in range(10):
            f = gaussian_bumps_field(grid, seed=31, index=i, support_radius=1.0,
                                     width_range=(0.4, 0.7))
            ratio = weighted_chainrule_ratio(F, f, 0.0, WeightSpec(1.0))
            assert ratio <= 1.0 + 1e-12

    def test_homogeneity_invariance(self):
        grid = Grid(2, 8.0, 64)
        F = power_gauge(2.0)
        f = gaussian_bumps_field(grid, seed=33, support_radius=1.0, width_range=(0.5, 0.8))
        w = WeightSpec(0.5)
        a = weighted_chainrule_ratio(F, f, 1.0, w)
        b = weighted_chainrule_ratio(F, f.with_values(4.2 * f.values), 1.0, w)
        assert abs(a - b) <= 1e-10 * a

    def test_ensemble_sup_refinement_stable(self):
        F = power_gauge(2.0)
        w = WeightSpec(0.5)
        sups = {}
        for N in (48, 96):
            grid = Grid(2, 8.0, N)
            vals = []
            for i in range(15):
                f = gaussian_bumps_field(grid, seed=37, index=i, support_radius=1.0,
                                         width_range=(0.5, 0.9))
                vals.append(weighted_chainrule_ratio(F, f, 1.0, w))
            sups[N] = max(vals)
        assert np.isfinite(sups[96])
        assert abs(sups[96] - sups[48]) / sups[48] < 0.2

    def test_smoothness_range_enforced(self):
        grid = Grid(2, 8.0, 48)
        f = radial_field(grid, seed=39)
        with pytest.raises(ValueError):
            weighted_chainrule_ratio(power_gauge(2.0), f, 1.5, WeightSpec(0.5))


class TestReportPlumbing:
    def test_report_rejects_non_finite(self):
        with pytest.raises(ValueError):
            EstimateReport(math.nan, 1.0, 1.0, ())

    def test_summarize(self):
        reports = [EstimateReport(1.0, 2.0, 0.5, ()), EstimateReport(3.0, 2.0, 1.5, ())]
        agg = summarize(reports, refined=[EstimateReport(3.2, 2.0, 1.6, ())])
        assert agg.sup == 1.5
        assert agg.mean == pytest.approx(1.0)
        assert agg.drift == pytest.approx(abs(1.6 - 1.5) / 1.5)
