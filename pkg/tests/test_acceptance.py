"""Acceptance gate: every criterion at its stated tolerance.

Each criterion prints one `[acceptance] criterion N: PASS/FAIL` line
(visible with `pytest -s`, or in the captured output of a failing test).
Grouped sub-checks within a criterion are evaluated before the assert so
the printed line reports every clause, not just the first failure.

The lifespan-scaling criterion dominates the runtime: it runs full
blow-up scans in two and three dimensions at the pinned resolutions.
"""

import math

import numpy as np
import pytest

from halfwave_lab.besov import (
    BesovParams,
    DifferenceScheme,
    besov_norm,
    difference_besov_norm,
    sobolev_norm,
)
from halfwave_lab.blowup import (
    BlowupFunctionalObserver,
    annulus_profile,
    blowup_functionals,
    bump_profile,
    critical_lifespan_lower_bound,
    glassey_run,
    lifespan_lower_bound,
    lifespan_scan,
    ode_inequality_check,
    profile_field,
    reduce_to_wave,
    superpolynomial_trend,
)
from halfwave_lab.cli import reproduce, run_command
from halfwave_lab.ensembles import band_limited_field, gaussian_bumps_field
from halfwave_lab.estimates import (
    WeightSpec,
    local_energy_check,
    muckenhoupt_characteristic,
    radial_sobolev_ratio,
    weighted_chainrule_ratio,
)
from halfwave_lab.nonlinear import chainrule_ratio, power_abs, power_gauge
from halfwave_lab.solver import (
    SolveConfig,
    critical_exponents,
    picard_solve,
    solve,
)
from halfwave_lab.spectral import Field, Grid, lebesgue_norm, propagate


def report(criterion: int, label: str, checks: dict):
    passed = all(checks.values())
    status = "PASS" if passed else "FAIL"
    detail = "; ".join(f"{name}={'ok' if ok else 'FAIL'}" for name, ok in checks.items())
    print(f"[acceptance] criterion {criterion} ({label}): {status} [{detail}]")
    assert passed, f"criterion {criterion} failed: {detail}"


# -- criterion 1 -------------------------------------------------------------

def test_c01_unitarity_and_group_law():
    grid = Grid(2, 1.0, 32)
    rng = np.random.default_rng(2024)
    worst_unitary = 0.0
    worst_group = 0.0
    for i in range(100):
        f = band_limited_field(grid, seed=900, index=i)
        t1, t2 = rng.uniform(-4.0, 4.0, size=2)
        n0 = lebesgue_norm(f, 2)
        worst_unitary = max(worst_unitary, abs(lebesgue_norm(propagate(f, t1), 2) / n0 - 1.0))
        two = propagate(propagate(f, t1), t2)
        one = propagate(f, t1 + t2)
        gap = lebesgue_norm(two.with_values(two.values - one.values), 2)
        worst_group = max(worst_group, gap / n0)
    report(1, "unitarity and group law", {
        f"unitarity {worst_unitary:.2e} <= 1e-12": worst_unitary <= 1e-12,
        f"group law {worst_group:.2e} <= 1e-12": worst_group <= 1e-12,
    })


# -- criterion 2 -------------------------------------------------------------

def test_c02_conservation_laws():
    grid = Grid(1, 8.0, 512)
    u0 = gaussian_bumps_field(grid, seed=11, support_radius=1.0, width_range=(0.4, 0.7))
    u0 = u0.with_values(0.8 * u0.values)
    F = power_gauge(3.0, 1.0)
    cfg = SolveConfig(grid=grid, F=F, dt=1e-3, t_end=1.0, monitors=("mass", "energy", "sup"))
    traj = solve(u0, cfg)
    mass_drift = traj.monitor_drift("mass")
    energy_drift = traj.monitor_drift("energy")
    drifts = []
    dts = [2e-3, 1e-3, 5e-4]
    for dt in dts:
        c = SolveConfig(grid=grid, F=F, dt=dt, t_end=1.0, monitors=("mass", "energy"))
        drifts.append(solve(u0, c).monitor_drift("energy"))
    slope = float(np.polyfit(np.log(dts), np.log(drifts), 1)[0])
    report(2, "conservation laws", {
        f"mass drift {mass_drift:.2e} <= 1e-10": mass_drift <= 1e-10,
        f"energy drift {energy_drift:.2e} <= 1e-6": energy_drift <= 1e-6,
        f"energy order {slope:.2f} in 2 +/- 0.3": 1.7 <= slope <= 2.3,
    })


# -- criterion 3 -------------------------------------------------------------

def test_c03_besov_equivalences():
    ratios_ok = True
    worst = {}
    for n, N in ((1, 256), (2, 64)):
        grid = Grid(n, math.pi, N)
        for s in (0.3, 0.5, 0.75):
            vals = []
            for i in range(50):
                f = band_limited_field(grid, seed=10, index=i)
                vals.append(besov_norm(f, BesovParams(s, 2, 2, True)) / sobolev_norm(f, s, True))
            worst[(n, s)] = (min(vals), max(vals))
            ratios_ok &= min(vals) >= 0.5 and max(vals) <= 2.0
    grid1 = Grid(1, math.pi, 256)
    diff_ok = True
    for s, m in ((0.5, 1), (1.3, 2)):
        p = BesovParams(s, 2, 2, True)
        scheme = DifferenceScheme(m)
        for i in range(50):
            f = band_limited_field(grid1, seed=20, index=i)
            r = difference_besov_norm(f, p, scheme) / besov_norm(f, p)
            diff_ok &= 0.1 <= r <= 10.0
    lo = min(v[0] for v in worst.values())
    hi = max(v[1] for v in worst.values())
    report(3, "dyadic norm equivalences", {
        f"dyadic/multiplier in [0.5, 2] (measured [{lo:.2f}, {hi:.2f}])": ratios_ok,
        "difference/dyadic in [1/10, 10]": diff_ok,
    })


# -- criterion 4 -------------------------------------------------------------

def test_c04_fractional_chain_rule():
    cases = [
        (power_gauge(2.0), 0.5),
        (power_gauge(2.5, k=2), 1.3),
        (power_abs(2.0), 0.5),
    ]
    checks = {}
    for n, N, count in ((1, 256, 100), (2, 128, 60)):
        grid = Grid(n, math.pi, N)
        fine = Grid(n, math.pi, 2 * N)
        k_cut = 0.5 * grid.nyquist
        for F, s in cases:
            params = BesovParams(s, 2, 2, True)
            coarse_vals, fine_vals = [], []
            for i in range(count):
                f = band_limited_field(grid, seed=50, index=i, k_cut=k_cut)
                coarse_vals.append(chainrule_ratio(F, f, params))
            for i in range(min(count, 20)):
                f = band_limited_field(fine, seed=50, index=i, k_cut=k_cut)
                fine_vals.append(chainrule_ratio(F, f, params))
            sup_c = max(coarse_vals)
            sup_f = max(fine_vals)
            sub_sup = max(coarse_vals[: len(fine_vals)])
            drift = abs(sup_f - sub_sup) / sub_sup
            key = f"n={n} {F.kind} p={F.p:g} s={s:g}"
            checks[f"{key} sup finite"] = math.isfinite(sup_c)
            checks[f"{key} drift {drift:.1%} < 20%"] = drift < 0.2
    grid = Grid(1, math.pi, 256)
    f = band_limited_field(grid, seed=51)
    p = BesovParams(0.5, 2, 2, True)
    r1 = chainrule_ratio(power_gauge(2.0), f, p)
    r2 = chainrule_ratio(power_gauge(2.0), f.with_values(6.1 * f.values), p)
    checks[f"homogeneity {abs(r1 - r2):.1e} <= 1e-10"] = abs(r1 - r2) <= 1e-10 * r1
    report(4, "fractional chain rule", checks)


# -- criterion 5 -------------------------------------------------------------

def test_c05_weighted_estimates():
    checks = {}
    # (a) Muckenhoupt characteristic: admissible stable, borderline divergent
    w = WeightSpec(0.5, 0.3, "global")
    adm = [muckenhoupt_characteristic(w, 2, "A1", res) for res in (8, 16)]
    ctrl_w = lambda r: np.asarray(r, dtype=float) ** (-2.0)
    ctrl = [muckenhoupt_characteristic(ctrl_w, 2, "A1", res) for res in (4, 8, 16)]
    checks[f"A1 admissible stable ({abs(adm[1]-adm[0])/adm[0]:.1e})"] = (
        math.isfinite(adm[1]) and abs(adm[1] - adm[0]) / adm[0] < 0.10
    )
    growths = [ctrl[i + 1] / ctrl[i] for i in range(2)]
    checks[f"A1 control diverges >2x per doubling ({growths[0]:.1f}, {growths[1]:.1f})"] = all(
        g > 2.0 for g in growths
    )
    # (b) local-energy ratio finite and refinement stable, (n, delta) = (2, 0.5)
    wp = WeightSpec(0.5)
    ratios = {}
    for N in (64, 128):
        grid = Grid(2, 8.0, N)
        u0 = gaussian_bumps_field(grid, seed=11, support_radius=1.0, width_range=(0.5, 0.8))
        ratios[N] = local_energy_check(u0, None, wp, T=1.0, dt=0.01).ratio
    drift_b = abs(ratios[128] - ratios[64]) / ratios[64]
    checks[f"local-energy ratio finite ({ratios[128]:.2f})"] = math.isfinite(ratios[128])
    checks[f"local-energy drift {drift_b:.1%} < 20%"] = drift_b < 0.2
    # (c) weighted composition rule: ensemble sup finite, refinement stable
    F = power_gauge(2.0)
    sups = {}
    for N in (64, 128):
        grid = Grid(2, 8.0, N)
        vals = [
            weighted_chainrule_ratio(
                F,
                gaussian_bumps_field(grid, seed=37, index=i, support_radius=1.0,
                                     width_range=(0.5, 0.9)),
                1.0,
                wp,
            )
            for i in range(15)
        ]
        sups[N] = max(vals)
    drift_c = abs(sups[128] - sups[64]) / sups[64]
    checks[f"weighted chain rule sup finite ({sups[128]:.3f})"] = math.isfinite(sups[128])
    checks[f"weighted chain rule drift {drift_c:.1%} < 20%"] = drift_c < 0.2
    report(5, "weighted estimates", checks)


# -- criterion 6 -------------------------------------------------------------

def test_c06_radial_sobolev():
    grid = Grid(2, 8.0, 128)
    r = grid.radii()
    base = Field(grid, np.exp(-(r**2)).astype(complex))
    tr = radial_sobolev_ratio(base, 0.75, "trace")
    pw = radial_sobolev_ratio(base, 0.8, "pointwise")
    scaled = radial_sobolev_ratio(base.with_values(37.0 * base.values), 0.75, "trace")
    conc = []
    for scale in (1.0, 0.5, 0.25, 0.125):
        f = Field(grid, np.exp(-((r / scale) ** 2)).astype(complex))
        conc.append(radial_sobolev_ratio(f, 0.75, "trace"))
    report(6, "radial sup-norm bounds", {
        f"trace ratio finite ({tr:.3f})": math.isfinite(tr) and tr > 0,
        f"pointwise ratio finite ({pw:.3f})": math.isfinite(pw) and pw > 0,
        f"amplitude invariance {abs(tr - scaled):.1e} <= 1e-12": abs(tr - scaled) <= 1e-12 * tr,
        f"concentration family bounded (max {max(conc):.3f})": max(conc) <= 3.0 * tr,
    })


# -- criterion 7 -------------------------------------------------------------

@pytest.fixture(scope="module")
def reduction_run():
    grid = Grid(2, 16.0, 128)
    profile = annulus_profile(4.0, 2.0)
    eps = 0.5
    u0 = profile_field(grid, profile, eps)
    obs = BlowupFunctionalObserver(grid, 2.0, profile.support_radius)
    peak = float(np.max(np.abs(u0.values)))
    traj = glassey_run(grid, 2.0, u0, 1e-3, 9.0, 1e6 * peak, track=True, observers=(obs,))
    return grid, profile, u0, traj


def test_c07_reduction_fidelity(reduction_run):
    grid, profile, u0, traj = reduction_run
    hist = reduce_to_wave(traj)
    res_dv = float(np.median(hist.dv_residual))
    res_sp = float(np.median(hist.space_residual))
    # order of the residuals under dt halving (shorter horizon keeps it fast)
    medians = []
    for dt in (2e-3, 1e-3):
        t2 = glassey_run(grid, 2.0, u0, dt, 2.0, 1e9, track=True)
        medians.append(float(np.median(reduce_to_wave(t2).dv_residual)))
    order = math.log(medians[0] / medians[1]) / math.log(2.0)
    series = blowup_functionals(traj)
    envelope = series.G[0] * np.exp(-2.0 * series.times)
    g_ok = bool(np.all(series.G > 0) and np.min(series.G - envelope) >= -1e-6 * series.G[0])
    assert traj.termination.kind == "blowup_detected"
    ode = ode_inequality_check(series, 2, 2.0, profile.support_radius,
                               t_max=0.9 * traj.termination.t_star)
    report(7, "wave reduction fidelity", {
        f"dv residual {res_dv:.1e} <= 1e-4": res_dv <= 1e-4,
        f"space residual {res_sp:.1e} <= 1e-4": res_sp <= 1e-4,
        f"residual order {order:.2f} >= 1.7": order >= 1.7,
        "G positive with exp(-2t) envelope": g_ok,
        f"inf empirical c {ode.inf_c:.2e} > 0 up to 0.9 t*": ode.passed,
    })


# -- criterion 8 -------------------------------------------------------------

N2_SCAN = dict(
    eps_list=[0.4, 0.28, 0.2, 0.14, 0.1],
    profile=("annulus", 4.0, 2.0, 1.4),
    N=256,
    dt=2.5e-3,
)

# pinned option: radial-profile-initialized three-dimensional runs at 96^3;
# the step policy coarsens with the (slower) small-size dynamics and every
# record is re-validated at half the step
N3_SCAN = dict(
    eps_list=[0.7, 0.5, 0.35, 0.25, 0.175],
    profile=("bump", 3.0, None, 1.0),
    N=96,
    dt=lambda eps: min(2.4e-2, 8e-3 * 0.7 / eps),
    box=lambda eps: {0.7: 14.0, 0.5: 20.0, 0.35: 28.0, 0.25: 40.0, 0.175: 56.0}[eps],
)


def _make_profile(spec):
    shape, a, b, amp = spec
    if shape == "bump":
        return bump_profile(a, amp)
    return annulus_profile(a, b, amp)


@pytest.fixture(scope="module")
def n2_lifespan_fit():
    return lifespan_scan(
        2, 2.0, N2_SCAN["eps_list"], _make_profile(N2_SCAN["profile"]),
        points_per_axis=N2_SCAN["N"], dt=N2_SCAN["dt"], validate=True,
        initial_half_length=16.0, max_box_doublings=2,
    )


@pytest.fixture(scope="module")
def n3_lifespan_fit():
    return lifespan_scan(
        3, 1.5, N3_SCAN["eps_list"], _make_profile(N3_SCAN["profile"]),
        points_per_axis=N3_SCAN["N"], dt=N3_SCAN["dt"], validate=True,
        initial_half_length=N3_SCAN["box"], max_box_doublings=1,
    )


def test_c08a_lifespan_scaling_two_dimensional(n2_lifespan_fit):
    fit = n2_lifespan_fit
    kept = [r for r in fit.records if not r.censored]
    eps = np.array([r.epsilon for r in kept])
    tstars = np.array([r.t_star for r in kept])[np.argsort(eps)]
    monotone = bool(np.all(np.diff(tstars) <= 0.05 * tstars[:-1]))
    report(8, "lifespan scaling, two dimensions", {
        f"slope {fit.slope:.3f} in [1.7, 2.3]": 1.7 <= fit.slope <= 2.3,
        f"R^2 {fit.r_squared:.4f} >= 0.98": fit.r_squared >= 0.98,
        f"censored {fit.censored_fraction:.0%} <= 25%": fit.censored_fraction <= 0.25,
        "t* nonincreasing in eps": monotone,
    })


def test_c08b_lifespan_scaling_three_dimensional(n3_lifespan_fit):
    fit = n3_lifespan_fit
    validated = sum(1 for r in fit.records if r.validated)
    report(8, "lifespan scaling, three dimensions", {
        f"slope {fit.slope:.3f} in [0.85, 1.15]": 0.85 <= fit.slope <= 1.15,
        f"censored {fit.censored_fraction:.0%} <= 25%": fit.censored_fraction <= 0.25,
        f"dt-validated records {validated} >= 4": validated >= 4,
    })


def test_c08c_critical_branch_substitutes():
    # the exponential-lifespan branch is not reproducible at desk scale;
    # substitute 1: measured lifespans grow superpolynomially in 1/size
    sizes = [1.2, 1.0, 0.75, 0.6]
    profile = annulus_profile(4.0, 2.0)
    tstars = []
    for sigma in sizes:
        grid = Grid(2, 16.0, 128)
        u0 = profile_field(grid, profile, sigma)
        traj = glassey_run(grid, 3.0, u0, 1e-3, 9.0, 1e6 * sigma)
        assert traj.termination.kind == "blowup_detected"
        tstars.append(traj.termination.t_star)
    growing = superpolynomial_trend(sizes, tstars)
    # substitute 2: exact algebra of the closed-form horizon laws
    delta = critical_exponents(2, 2.0).delta
    doubling = lifespan_lower_bound(0.7 * 2.0 ** (-delta / 1.0), 2, 2.0) / lifespan_lower_bound(0.7, 2, 2.0)
    n, p = 3, 2.0
    crit_val = critical_lifespan_lower_bound(0.5, n, p, c=0.8)
    algebra_ok = (
        abs(doubling - 2.0) <= 1e-12
        and abs(crit_val - math.exp(0.8 * 0.5 ** (-(p - 1.0)))) <= 1e-12 * crit_val
    )
    report(8, "critical branch substitutes", {
        "t* superpolynomial in 1/size (log-log slopes increasing)": growing,
        "closed-form horizon algebra exact": algebra_ok,
    })


# -- criterion 9 -------------------------------------------------------------

def test_c09_picard_cross_validation():
    grid = Grid(1, 8.0, 256)
    u0 = gaussian_bumps_field(grid, seed=1, support_radius=1.0, width_range=(0.4, 0.7))
    u0 = u0.with_values(0.3 * u0.values)
    F = power_gauge(3.0, 1.0)
    cfg = SolveConfig(grid=grid, F=F, dt=0.005, t_end=0.5, picard_iters=8, monitors=("mass",))
    tp = picard_solve(u0, cfg)
    ts = solve(u0, SolveConfig(grid=grid, F=F, dt=0.005, t_end=0.5, monitors=("mass",)))
    num = np.sqrt(grid.cell_volume * np.sum(np.abs(tp.final.values - ts.final.values) ** 2))
    den = np.sqrt(grid.cell_volume * np.sum(np.abs(ts.final.values) ** 2))
    gaps = tp.diagnostics["contraction"]
    ratios_ok = all(b / a <= 0.5 for a, b in zip(gaps, gaps[1:-1]) if a > 1e-14)
    report(9, "Duhamel iteration cross-validation", {
        f"final-state gap {num / den:.1e} <= 1e-5": num / den <= 1e-5,
        "contraction ratios <= 1/2": ratios_ok,
    })


# -- criterion 10 ------------------------------------------------------------

def test_c10_determinism(tmp_path):
    """Byte-identical reproduction through the manifest pipeline for a
    representative run of every command family (full-scale scans certify
    determinism through the same code path at reduced size)."""
    runs = {
        "exponents": {"n": 2, "p": 2.0, "seed": 0},
        "besov": {"n": 1, "N": 128, "L": math.pi, "count": 6, "seed": 5,
                  "s_list": [0.5], "q": 2.0, "r": 2.0, "homogeneous": True},
        "chainrule": {"nonlinearity": {"kind": "power_gauge", "p": 2.0},
                      "s_list": [0.5], "n": 1, "N": 128, "L": math.pi,
                      "count": 10, "seed": 5, "q": 2.0, "r": 2.0,
                      "dealias": False, "refine_check": False},
        "solve": {"n": 1, "N": 256, "L": 8.0, "dt": 2e-3, "t_end": 0.5,
                  "data": {"kind": "gaussian_bumps", "amplitude": 0.6,
                           "support_radius": 1.0, "width_min": 0.4, "width_max": 0.7},
                  "seed": 2, "monitors": ["mass", "energy", "sup"]},
        "bench": {"target": "weights", "n": 2, "resolutions": [4, 8],
                  "delta": 0.5, "delta_prime": 0.3, "kind": "A1", "seed": 0},
        "lifespan": {"n": 2, "p": 2.0, "eps_list": [1.6, 1.1, 0.8, 0.55, 0.4],
                     "profile": {"shape": "annulus", "center_radius": 4.0,
                                 "width": 2.0, "amplitude": 1.0},
                     "N": 64, "dt": 4e-3, "validate": False,
                     "initial_half_length": 16.0, "max_box_doublings": 1, "seed": 0},
        "blowup_diagnose": {"n": 2, "p": 2.0, "eps": 0.5,
                            "profile": {"shape": "annulus", "center_radius": 4.0,
                                        "width": 2.0, "amplitude": 1.0},
                            "N": 64, "L": 16.0, "dt": 2e-3, "t_end": 4.0,
                            "threshold_factor": 1e6, "snapshot_stride": 500,
                            "seed": 0},
    }
    checks = {}
    for command, config in runs.items():
        out = tmp_path / command
        run_command(command, config, out, figures=False)
        results = reproduce(out / "manifest.json", tmp_path / f"{command}-re")
        checks[command] = bool(results) and all(results.values())
    report(10, "byte-identical reproduction", checks)
