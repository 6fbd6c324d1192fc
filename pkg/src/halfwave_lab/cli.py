"""Command-line entry point.

Subcommands: ``exponents``, ``besov``, ``chainrule``, ``solve``, ``bench``,
``lifespan``, ``blowup-diagnose``, ``reproduce``.  Each consumes a JSON
configuration (``--config``), optionally overridden by dedicated flags,
validates it against the published schema, runs, and writes a report
bundle: CSV tables, JSON summaries, PNG figures, and a sealed manifest.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure (non-finite state, unexpected blow-up, reproduction mismatch),
4 lifespan-fit refusal due to censoring.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = ["main"]

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_NUMERICAL = 3
_EXIT_CENSORED = 4


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration plumbing
# ---------------------------------------------------------------------------

def _load_schema(name: str):
    base = resources.files("halfwave_lab") / "schemas"
    return json.loads((base / f"{name}.json").read_text()), json.loads(
        (base / "common.json").read_text()
    )


def _validate(config: dict, schema_name: str):
    import jsonschema
    from referencing import Registry, Resource

    schema, common = _load_schema(schema_name)
    registry = Registry().with_resource("common.json", Resource.from_contents(common))
    validator = jsonschema.Draft202012Validator(schema, registry=registry)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.path))
    if errors:
        msgs = "; ".join(f"{'/'.join(map(str, e.path)) or '<root>'}: {e.message}" for e in errors)
        raise ConfigError(f"configuration rejected by schema {schema_name}: {msgs}")


_DEFAULTS = {
    "exponents": {"n": 3, "p": 3.0, "seed": 0},
    "besov": {
        "n": 1, "N": 256, "L": math.pi, "count": 50, "seed": 0,
        "s_list": [0.5, 1.3], "q": 2.0, "r": 2.0, "homogeneous": True,
    },
    "chainrule": {
        "nonlinearity": {"kind": "power_gauge", "p": 2.0},
        "s_list": [0.5], "n": 1, "N": 256, "L": math.pi, "count": 100,
        "seed": 0, "q": 2.0, "r": 2.0, "dealias": False, "refine_check": True,
    },
    "solve": {
        "n": 1, "N": 512, "L": 8.0, "dt": 1e-3, "t_end": 1.0,
        "method": "strang_split", "picard_iters": 8,
        "nonlinearity": {"kind": "power_gauge", "p": 3.0, "lam_re": 1.0, "lam_im": 0.0},
        "data": {"kind": "gaussian_bumps", "amplitude": 0.8,
                 "support_radius": 1.0, "width_min": 0.4, "width_max": 0.7},
        "seed": 0, "monitors": ["mass", "energy", "sup"], "hs_norms": [],
        "blowup_threshold": None, "dealias": False, "monitor_stride": 1,
        "save_snapshots": False, "snapshot_stride": None, "wrap_guard": True,
        "expect_completion": False,
    },
    "bench": {"target": "weights", "n": 2, "N": 64, "L": 8.0, "count": 10, "seed": 0,
              "q": 5.0, "T": 2.0, "radial": False, "delta": 0.5, "delta_prime": 0.3,
              "form": "pure_power", "dt": 1e-2, "resolutions": [4, 8, 16], "kind": "A1",
              "s": 1.0, "s1": 0.75, "form_radial": "trace",
              "nonlinearity": {"kind": "power_gauge", "p": 2.0}, "refine_check": True},
    "lifespan": {
        "n": 2, "p": 2.0, "eps_list": [0.4, 0.28, 0.2, 0.14, 0.1],
        "profile": {"shape": "annulus", "center_radius": 4.0, "width": 2.0, "amplitude": 1.4},
        "N": 256, "dt": 2e-3, "threshold_factor": 1e6, "initial_half_length": None,
        "max_box_doublings": 2, "validate": True, "branch": None, "seed": 0,
    },
    "blowup_diagnose": {
        "n": 2, "p": 2.0, "eps": 0.5,
        "profile": {"shape": "annulus", "center_radius": 4.0, "width": 2.0, "amplitude": 1.0},
        "N": 128, "L": 16.0, "dt": 1e-3, "t_end": None, "threshold_factor": 1e6,
        "snapshot_stride": 500, "seed": 0,
    },
}

_OVERRIDE_MAP = {
    "n": "n", "p": "p", "N": "N", "L": "L", "dt": "dt", "t_end": "t_end",
}


def complete_config(command: str, overrides: dict) -> dict:
    """Defaults merged with overrides, then schema-validated."""
    if command not in _DEFAULTS:
        raise ConfigError(f"unknown command {command!r}")
    config = copy.deepcopy(_DEFAULTS[command])
    config.update(overrides)
    config.setdefault("seed", 0)
    _validate(config, command)
    return config


def _resolve_config(command: str, args) -> dict:
    overrides = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        overrides.update(loaded)
    for flag, key in _OVERRIDE_MAP.items():
        value = getattr(args, flag, None)
        if value is not None and key in _DEFAULTS[command]:
            overrides[key] = value
    if args.seed is not None:
        overrides["seed"] = args.seed
    return complete_config(command, overrides)


def _nonlinearity_from(config) -> "object":
    from .nonlinear import Nonlinearity

    if config is None:
        return None
    lam = complex(config.get("lam_re", 1.0), config.get("lam_im", 0.0))
    return Nonlinearity(config["kind"], config["p"], config.get("k"), lam)


def _profile_from(config):
    from .blowup import annulus_profile, bump_profile

    if config["shape"] == "bump":
        return bump_profile(config.get("support_radius", 3.0), config.get("amplitude", 1.0))
    return annulus_profile(
        config.get("center_radius", 4.0), config.get("width", 2.0), config.get("amplitude", 1.0)
    )


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _run_exponents(config, bundle):
    from .solver import critical_exponents

    e = critical_exponents(config["n"], config["p"])
    row = (e.n, e.p, e.s_c, e.first_threshold, e.second_threshold, e.classification,
           e.delta if e.delta is not None else "",
           e.lifespan_exponent if e.lifespan_exponent is not None else "",
           e.exponential_lifespan, e.small_data_global_window)
    bundle.add_table(
        "exponents.csv",
        ["n", "p", "s_c", "first_threshold", "second_threshold", "classification",
         "delta", "lifespan_exponent", "exponential_lifespan", "small_data_global_window"],
        [row],
        description="derived scaling indices; s_c and thresholds dimensionless",
    )
    bundle.add_summary("exponents.json", {
        "n": e.n, "p": e.p, "s_c": e.s_c,
        "first_threshold": e.first_threshold if math.isfinite(e.first_threshold) else None,
        "second_threshold": e.second_threshold if math.isfinite(e.second_threshold) else None,
        "classification": e.classification, "delta": e.delta,
        "lifespan_exponent": e.lifespan_exponent,
        "exponential_lifespan": e.exponential_lifespan,
        "small_data_global_window": e.small_data_global_window,
    })
    return f"s_c = {e.s_c:g}, classification: {e.classification}\n"


def _run_besov(config, bundle, figures=True):
    from .besov import BesovParams, DifferenceScheme, besov_norm, difference_besov_norm
    from .ensembles import band_limited_field
    from .report import ratio_figure
    from .spectral import Grid

    grid = Grid(config["n"], config["L"], config["N"])
    rows = []
    groups = {}
    for i in range(config["count"]):
        f = band_limited_field(grid, config["seed"], i)
        for s in config["s_list"]:
            params = BesovParams(s, config["q"], config["r"], config["homogeneous"])
            scheme = DifferenceScheme(int(math.floor(s)) + 1)
            lp = besov_norm(f, params)
            diff = difference_besov_norm(f, params, scheme)
            ratio = diff / lp if lp > 0 else math.nan
            rows.append((i, s, config["q"], config["r"], config["homogeneous"], lp, diff, ratio))
            groups.setdefault(f"s={s:g}", []).append(ratio)
    bundle.add_table(
        "besov.csv",
        ["field_id", "s", "q", "r", "homogeneous", "lp_value", "diff_value", "ratio"],
        rows,
        description=(
            "dyadic-projection norm (lp_value) vs finite-difference route "
            "(diff_value), dimensionless ratio = diff/lp"
        ),
    )
    summary = {
        f"s={s:g}": {
            "min_ratio": float(np.min(groups[f"s={s:g}"])),
            "max_ratio": float(np.max(groups[f"s={s:g}"])),
            "mean_ratio": float(np.mean(groups[f"s={s:g}"])),
        }
        for s in config["s_list"]
    }
    bundle.add_summary("besov_summary.json", summary)
    if figures:
        ratio_figure(bundle.directory / "besov_ratios.png", groups,
                     title="difference route / dyadic route", ylabel="ratio",
                     hlines=(0.1, 10.0))
        bundle.add_figure("besov_ratios.png")
    lines = [f"{k}: ratio in [{v['min_ratio']:.3f}, {v['max_ratio']:.3f}]" for k, v in summary.items()]
    return "\n".join(lines) + "\n"


def _run_chainrule(config, bundle, figures=True):
    from .besov import BesovParams
    from .ensembles import band_limited_field
    from .nonlinear import chainrule_ratio
    from .report import ratio_figure
    from .spectral import Grid

    F = _nonlinearity_from(config["nonlinearity"])
    grid = Grid(config["n"], config["L"], config["N"])
    k_cut = 0.5 * grid.nyquist
    rows, groups = [], {}
    for i in range(config["count"]):
        f = band_limited_field(grid, config["seed"], i, k_cut=k_cut)
        for s in config["s_list"]:
            params = BesovParams(s, config["q"], config["r"], True)
            ratio = chainrule_ratio(F, f, params, dealias=config["dealias"])
            rows.append((i, s, config["q"], config["r"], ratio))
            groups.setdefault(f"s={s:g}", []).append(ratio)
    bundle.add_table(
        "chainrule.csv",
        ["field_id", "s", "q", "r", "ratio"],
        rows,
        description=(
            "composition-inequality ratio ||F(u)||_B / (||u||_inf^{p-1} ||u||_B), dimensionless"
        ),
    )
    summary = {}
    for s in config["s_list"]:
        vals = groups[f"s={s:g}"]
        entry = {"sup": float(np.max(vals)), "mean": float(np.mean(vals))}
        if config["refine_check"]:
            fine = Grid(config["n"], config["L"], 2 * config["N"])
            subsample = min(config["count"], 10)
            fine_vals = []
            for i in range(subsample):
                f2 = band_limited_field(fine, config["seed"], i, k_cut=k_cut)
                fine_vals.append(
                    chainrule_ratio(F, f2, BesovParams(s, config["q"], config["r"], True),
                                    dealias=config["dealias"])
                )
            coarse_vals = [rows[i * len(config["s_list"]) + config["s_list"].index(s)][4]
                           for i in range(subsample)]
            entry["refinement_drift"] = abs(max(fine_vals) - max(coarse_vals)) / max(coarse_vals)
        summary[f"s={s:g}"] = entry
    bundle.add_summary("chainrule_summary.json", summary)
    if figures:
        ratio_figure(bundle.directory / "chainrule_ratios.png", groups,
                     title="composition-rule ratios", ylabel="ratio")
        bundle.add_figure("chainrule_ratios.png")
    lines = [f"{k}: sup {v['sup']:.4f}" for k, v in summary.items()]
    return "\n".join(lines) + "\n"


def _build_data(config, grid):
    from .blowup import profile_field
    from .ensembles import band_limited_field, gaussian_bumps_field, radial_field

    data = config["data"]
    amp = data.get("amplitude", 1.0)
    kind = data["kind"]
    if kind == "gaussian_bumps":
        f = gaussian_bumps_field(
            grid, config["seed"], support_radius=data.get("support_radius", 1.0),
            width_range=(data.get("width_min", 0.4), data.get("width_max", 0.7)),
        )
    elif kind == "band_limited":
        f = band_limited_field(grid, config["seed"])
    elif kind == "radial":
        f = radial_field(grid, config["seed"])
    else:
        return profile_field(grid, _profile_from(data["profile"]), amp)
    return f.with_values(amp * f.values, time_tag=0.0)


def _run_solve(config, bundle, figures=True):
    from .report import line_figure
    from .solver import SolveConfig, picard_solve, solve
    from .spectral import Grid
    from .storage import save_field

    grid = Grid(config["n"], config["L"], config["N"])
    u0 = _build_data(config, grid)
    cfg = SolveConfig(
        grid=grid,
        F=_nonlinearity_from(config["nonlinearity"]),
        dt=config["dt"],
        t_end=config["t_end"],
        method=config["method"],
        picard_iters=config["picard_iters"],
        blowup_threshold=config["blowup_threshold"],
        dealias=config["dealias"],
        monitors=tuple(config["monitors"]),
        hs_norms=tuple(config["hs_norms"]),
        monitor_stride=config["monitor_stride"],
        snapshot_stride=config["snapshot_stride"],
        wrap_guard=config["wrap_guard"],
    )
    traj = picard_solve(u0, cfg) if config["method"] == "picard" else solve(u0, cfg)

    names = list(traj.monitors)
    columns = ["t"] + names
    rows = [
        (t, *(traj.monitors[name][i] for name in names))
        for i, t in enumerate(traj.times)
    ]
    bundle.add_table(
        "monitors.csv", columns, rows,
        description=(
            "t in box time units (propagation speed 1); mass = L2 norm of u; "
            "energy = half square of half-order derivative norm plus coupling "
            "times L^{p+1} power; sup = max |u|; hs_* = inhomogeneous Sobolev norms"
        ),
    )
    drifts = {name: traj.monitor_drift(name) for name in names if name != "sup"}
    summary = {
        "termination": traj.termination.kind,
        "t_star": traj.termination.t_star,
        "message": traj.termination.message,
        "drifts": drifts,
        "method": config["method"],
    }
    if config["method"] == "picard":
        summary["contraction_gaps"] = [float(g) for g in traj.diagnostics["contraction"]]
        summary["non_contracting"] = bool(traj.diagnostics["non_contracting"])
    bundle.add_summary("run_summary.json", summary)
    if config["save_snapshots"]:
        for i, snap in enumerate(traj.snapshots):
            name = f"field_{i:04d}.hwf"
            save_field(bundle.directory / name, snap)
    if figures:
        series = {name: traj.monitors[name] for name in names}
        line_figure(bundle.directory / "monitors.png", traj.times, series,
                    title="run monitors", xlabel="t", ylabel="value", logy=False)
        bundle.add_figure("monitors.png")
    if traj.termination.kind == "error":
        raise NumericalFailure(f"run failed: {traj.termination.message}")
    if config["expect_completion"] and traj.termination.kind != "completed":
        raise NumericalFailure(
            f"expected completion but run terminated with {traj.termination.kind}"
        )
    return (
        f"{traj.termination.kind} at t = {traj.times[-1]:g}; drifts: "
        + ", ".join(f"{k} {v:.3e}" for k, v in drifts.items())
        + "\n"
    )


def _run_bench(config, bundle, figures=True):
    from .ensembles import gaussian_bumps_field, radial_field
    from .estimates import (
        WeightSpec,
        local_energy_check,
        muckenhoupt_characteristic,
        radial_sobolev_ratio,
        strichartz_ratio,
        weighted_chainrule_ratio,
    )
    from .report import line_figure, ratio_figure
    from .spectral import Grid

    target = config["target"]
    seed = config["seed"]
    grid = Grid(config["n"], config["L"], config["N"])
    summary, rows, groups = {}, [], {}

    if target == "strichartz":
        for i in range(config["count"]):
            f = gaussian_bumps_field(grid, seed, i, support_radius=0.08 * config["L"],
                                     width_range=(0.5, 0.9))
            for T in (config["T"], 2.0 * config["T"]):
                rep = strichartz_ratio(f, config["q"], T, radial=config["radial"])
                rows.append((i, config["q"], T, rep.lhs, rep.rhs, rep.ratio))
                groups.setdefault(f"T={T:g}", []).append(rep.ratio)
        sup1 = max(groups[f"T={config['T']:g}"])
        sup2 = max(groups[f"T={2 * config['T']:g}"])
        summary = {"sup": sup1, "sup_doubled_horizon": sup2,
                   "horizon_growth": (sup2 - sup1) / sup1}
        bundle.add_table(
            "strichartz.csv",
            ["field_id", "q", "T", "lhs", "rhs", "ratio"],
            rows,
            description="time-averaged sup-norm of the free evolution over the "
                        "fractional-derivative norm of the data, dimensionless ratio",
        )
    elif target == "local-energy":
        w = WeightSpec(config["delta"], config["delta_prime"], config["form"])
        for i in range(config["count"]):
            f = gaussian_bumps_field(grid, seed, i, support_radius=0.12 * config["L"],
                                     width_range=(0.5, 0.9))
            rep = local_energy_check(f, None, w, T=config["T"], dt=config["dt"])
            rows.append((i, config["delta"], config["form"], config["T"], rep.ratio))
            groups.setdefault("ratio", []).append(rep.ratio)
        summary = {"sup": max(groups["ratio"]), "mean": float(np.mean(groups["ratio"]))}
        if config["refine_check"]:
            fine = Grid(config["n"], config["L"], 2 * config["N"])
            f = gaussian_bumps_field(fine, seed, 0, support_radius=0.12 * config["L"],
                                     width_range=(0.5, 0.9))
            rep = local_energy_check(f, None, w, T=config["T"], dt=config["dt"])
            summary["refinement_drift"] = abs(rep.ratio - rows[0][4]) / rows[0][4]
        bundle.add_table(
            "local_energy.csv",
            ["field_id", "delta", "form", "T", "ratio"],
            rows,
            description="weighted space-time bound ratio LHS/RHS, dimensionless",
        )
    elif target == "weights":
        w = WeightSpec(config["delta"], config["delta_prime"], config["form"] if config["form"] != "pure_power" else "global")
        n = config["n"]
        control = lambda r: np.asarray(r, dtype=float) ** (-float(n))
        for res in config["resolutions"]:
            a = muckenhoupt_characteristic(w, n, config["kind"], res)
            b = muckenhoupt_characteristic(control, n, config["kind"], res)
            rows.append((res, config["kind"], "admissible", a))
            rows.append((res, config["kind"], "borderline_control", b))
            groups.setdefault("admissible", []).append(a)
            groups.setdefault("borderline_control", []).append(b)
        adm, ctl = groups["admissible"], groups["borderline_control"]
        summary = {
            "admissible_final": adm[-1],
            "admissible_growth_per_doubling": [adm[i + 1] / adm[i] for i in range(len(adm) - 1)],
            "control_growth_per_doubling": [ctl[i + 1] / ctl[i] for i in range(len(ctl) - 1)],
        }
        bundle.add_table(
            "weights.csv",
            ["resolution", "kind", "weight", "characteristic"],
            rows,
            description="sampled Muckenhoupt characteristics over the documented "
                        "ball family; dimensionless",
        )
        if figures:
            line_figure(bundle.directory / "weights.png", config["resolutions"],
                        {"admissible": adm, "borderline control": ctl},
                        title="characteristic vs resolution", xlabel="resolution",
                        ylabel="characteristic", logy=True)
            bundle.add_figure("weights.png")
    elif target == "radial-sobolev":
        for i in range(config["count"]):
            f = radial_field(grid, seed, i)
            for form in ("trace", "pointwise"):
                s = config["s1"] if form == "trace" else min(config["s1"], 0.49 + config["n"] / 4)
                try:
                    ratio = radial_sobolev_ratio(f, s, form)
                except ValueError:
                    continue
                rows.append((i, form, s, ratio))
                groups.setdefault(form, []).append(ratio)
        summary = {form: {"sup": max(v), "mean": float(np.mean(v))} for form, v in groups.items()}
        bundle.add_table(
            "radial_sobolev.csv",
            ["field_id", "form", "s", "ratio"],
            rows,
            description="radial sup-norm bounds over fractional energies, dimensionless",
        )
    elif target == "weighted-chainrule":
        F = _nonlinearity_from(config["nonlinearity"])
        w = WeightSpec(config["delta"], config["delta_prime"], config["form"])
        for i in range(config["count"]):
            f = gaussian_bumps_field(grid, seed, i, support_radius=0.12 * config["L"],
                                     width_range=(0.5, 0.9))
            ratio = weighted_chainrule_ratio(F, f, config["s"], w)
            rows.append((i, config["s"], config["delta"], ratio))
            groups.setdefault("ratio", []).append(ratio)
        summary = {"sup": max(groups["ratio"]), "mean": float(np.mean(groups["ratio"]))}
        if config["refine_check"]:
            fine = Grid(config["n"], config["L"], 2 * config["N"])
            f = gaussian_bumps_field(fine, seed, 0, support_radius=0.12 * config["L"],
                                     width_range=(0.5, 0.9))
            r2 = weighted_chainrule_ratio(F, f, config["s"], w)
            summary["refinement_drift"] = abs(r2 - rows[0][3]) / rows[0][3]
        bundle.add_table(
            "weighted_chainrule.csv",
            ["field_id", "s", "delta", "ratio"],
            rows,
            description="weighted composition-rule ratio, dimensionless",
        )
    if figures and target in ("strichartz", "local-energy", "radial-sobolev", "weighted-chainrule"):
        name = f"{target.replace('-', '_')}_ratios.png"
        ratio_figure(bundle.directory / name, groups, title=f"{target} ratios",
                     ylabel="ratio")
        bundle.add_figure(name)
    bundle.add_summary(f"{target.replace('-', '_')}_summary.json", summary)
    return json.dumps(summary, default=float) + "\n"


def _run_lifespan(config, bundle, figures=True):
    from .blowup import lifespan_scan
    from .report import fit_figure
    from .solver import critical_exponents

    profile = _profile_from(config["profile"])
    fit = lifespan_scan(
        config["n"], config["p"], config["eps_list"], profile,
        points_per_axis=config["N"], dt=config["dt"],
        threshold_factor=config["threshold_factor"],
        initial_half_length=config["initial_half_length"],
        max_box_doublings=config["max_box_doublings"],
        validate=config["validate"], branch=config["branch"],
    )
    rows = [
        (r.epsilon, r.t_star if r.t_star is not None else "", r.censored, r.dt,
         r.points_per_axis, r.half_length,
         r.refinement_delta if r.refinement_delta is not None else "",
         r.validated)
        for r in fit.records
    ]
    bundle.add_table(
        "lifespan.csv",
        ["epsilon", "t_star", "censored", "dt", "N", "L", "refinement_delta", "validated"],
        rows,
        description="measured blow-up times (box time units) per data size epsilon; "
                    "censored rows hit the wrap guard before the threshold",
    )
    exps = critical_exponents(config["n"], config["p"])
    summary = {
        "branch": fit.branch,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "residual": fit.residual,
        "censored_fraction": fit.censored_fraction,
        "predicted_slope": exps.lifespan_exponent if fit.branch == "subcritical_power" else None,
        "profile": profile.description,
    }
    bundle.add_summary("lifespan_fit.json", summary)
    if figures:
        kept = [r for r in fit.records if not r.censored]
        if fit.branch == "subcritical_power":
            x = np.log(1.0 / np.array([r.epsilon for r in kept]))
            xlabel = "log(1/epsilon)"
        else:
            x = np.array([r.epsilon for r in kept]) ** (-(config["p"] - 1.0))
            xlabel = "epsilon^{-(p-1)}"
        y = np.log([r.t_star for r in kept])
        fit_figure(bundle.directory / "lifespan_fit.png", x, y, fit.slope, fit.intercept,
                   title="lifespan scaling", xlabel=xlabel, ylabel="log t*")
        bundle.add_figure("lifespan_fit.png")
    return (
        f"branch {fit.branch}: slope {fit.slope:.3f} "
        f"(predicted {summary['predicted_slope']}), R^2 {fit.r_squared:.4f}\n"
    )


def _run_blowup_diagnose(config, bundle, figures=True):
    from .blowup import (
        BlowupFunctionalObserver,
        blowup_functionals,
        glassey_run,
        ode_inequality_check,
        profile_field,
        reduce_to_wave,
    )
    from .report import line_figure
    from .spectral import Grid

    grid = Grid(config["n"], config["L"], config["N"])
    profile = _profile_from(config["profile"])
    u0 = profile_field(grid, profile, config["eps"])
    peak = float(np.max(np.abs(u0.values)))
    t_end = config["t_end"]
    if t_end is None:
        t_end = config["L"] - profile.support_radius - 2.0 * grid.spacing
    n_steps = max(1, math.floor(t_end / config["dt"]))
    obs = BlowupFunctionalObserver(grid, config["p"], profile.support_radius)
    traj = glassey_run(grid, config["p"], u0, config["dt"], n_steps * config["dt"],
                       config["threshold_factor"] * peak, track=True, observers=(obs,))
    hist = reduce_to_wave(traj)
    series = blowup_functionals(traj)

    bundle.add_table(
        "functionals.csv",
        ["t", "F", "H", "G", "F_source"],
        list(zip(series.times, series.F, series.H, series.G, series.F_source)),
        description="test-function weighted functionals of the reduced wave state; "
                    "F_source = integral of phi |v_t|^p (equals dF/dt along exact dynamics)",
    )
    bundle.add_table(
        "reduction.csv",
        ["t", "dv_residual", "space_residual"],
        list(zip(hist.times, hist.dv_residual, hist.space_residual)),
        description="relative identity residuals of the auxiliary wave state",
    )
    t_star = traj.termination.t_star
    window = 0.9 * t_star if t_star else series.times[-1]
    ode = ode_inequality_check(series, config["n"], config["p"], profile.support_radius,
                               t_max=window)
    envelope = series.G[0] * np.exp(-2.0 * series.times)
    summary = {
        "termination": traj.termination.kind,
        "t_star": t_star,
        "median_dv_residual": float(np.median(hist.dv_residual)),
        "median_space_residual": float(np.median(hist.space_residual)),
        "G_min": float(np.min(series.G)),
        "G_envelope_min_gap": float(np.min(series.G - envelope)),
        "identity_max_defect": float(np.max(np.abs(series.G + series.F - 2 * series.H))),
        "ode_inf_c": ode.inf_c,
        "ode_holder_sup": ode.holder_sup,
        "ode_window_end": float(window),
        "mass_drift": traj.monitor_drift("mass"),
    }
    bundle.add_summary("blowup_summary.json", summary)
    if figures:
        line_figure(bundle.directory / "functionals.png", series.times,
                    {"F": series.F, "H": series.H, "G": series.G,
                     "F_source": series.F_source},
                    title="blow-up functionals", xlabel="t", ylabel="value", logy=True)
        bundle.add_figure("functionals.png")
    return (
        f"{traj.termination.kind}, t* = {t_star}; inf c = {ode.inf_c:.4g}; "
        f"median residuals {summary['median_dv_residual']:.2e} / "
        f"{summary['median_space_residual']:.2e}\n"
    )


_RUNNERS = {
    "exponents": _run_exponents,
    "besov": _run_besov,
    "chainrule": _run_chainrule,
    "solve": _run_solve,
    "bench": _run_bench,
    "lifespan": _run_lifespan,
    "blowup_diagnose": _run_blowup_diagnose,
}


def run_command(command: str, config: dict, out_dir, figures: bool = True) -> "object":
    """Programmatic entry point shared by the CLI and `reproduce`; fills in
    defaults and validates before running."""
    from .report import ReportBundle

    config = complete_config(command, config)
    bundle = ReportBundle(Path(out_dir), command, config, config.get("seed", 0))
    runner = _RUNNERS[command]
    if command == "exponents":
        note = runner(config, bundle)
    else:
        note = runner(config, bundle, figures=figures)
    bundle.seal(notes=note)
    return bundle


def reproduce(manifest_path, work_dir=None) -> dict:
    """Re-execute a sealed manifest and byte-compare the tables."""
    from .report import load_manifest, verify_manifest

    manifest = load_manifest(manifest_path)
    base = Path(manifest_path)
    if base.is_file():
        base = base.parent
    work = Path(work_dir) if work_dir else base / "reproduce"
    run_command(manifest["command"], manifest["config"], work, figures=False)
    return verify_manifest(manifest, work)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfwave-lab",
        description="Pseudospectral laboratory for the nonlinear half-wave equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("exponents", "besov", "chainrule", "solve", "bench", "lifespan",
                 "blowup-diagnose"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--no-figures", action="store_true")
        p.add_argument("--n", type=int, default=None, help="spatial dimension")
        p.add_argument("--p", type=float, default=None, help="nonlinearity power")
        p.add_argument("--N", type=int, default=None, help="grid points per axis")
        p.add_argument("--L", type=float, default=None, help="box half length")
        p.add_argument("--dt", type=float, default=None, help="time step")
        p.add_argument("--t-end", dest="t_end", type=float, default=None)
    rp = sub.add_parser("reproduce")
    rp.add_argument("manifest", type=str)
    rp.add_argument("--out", type=str, default=None)
    rp.add_argument("--threads", type=int, default=None)
    return parser


def _thread_count(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("HALFWAVE_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HALFWAVE_LAB_THREADS must be an integer, got {env!r}")
    return 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    import scipy.fft

    try:
        workers = _thread_count(args)
        if args.command == "reproduce":
            with scipy.fft.set_workers(workers):
                results = reproduce(args.manifest, args.out)
            failed = [name for name, ok in results.items() if not ok]
            for name, ok in sorted(results.items()):
                print(f"{'PASS' if ok else 'FAIL'} {name}")
            if failed:
                print(f"{len(failed)} table(s) differ", file=sys.stderr)
                return _EXIT_NUMERICAL
            return _EXIT_OK

        command = args.command.replace("-", "_")
        config = _resolve_config(command, args)
        out_dir = args.out or f"halfwave-{args.command}-out"
        with scipy.fft.set_workers(workers):
            bundle = run_command(command, config, out_dir, figures=not args.no_figures)
        print((bundle.directory / "summary.md").read_text().rstrip())
        print(f"bundle: {bundle.directory}")
        return _EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except (NumericalFailure, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except Exception as exc:  # censored-fit refusal carries its own code
        from .blowup import CensoredFitError

        if isinstance(exc, CensoredFitError):
            print(f"scan refused: {exc}", file=sys.stderr)
            return _EXIT_CENSORED
        raise


if __name__ == "__main__":
    sys.exit(main())
