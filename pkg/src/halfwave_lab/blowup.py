"""Blow-up laboratory: wave reduction, exponential test function,
concavity functionals, and the lifespan scanner.

The derivative-type runs i du/dt - D u = i lam |Re u|^p with real radial
data eps * g are shadowed by the auxiliary state v solving
dv/dt = i D v + u, v(0) = 0.  Along exact dynamics Re u is the time
derivative of v, -Im u is D v, and v solves the second-order wave
equation with source |dv/dt|^p; the co-integration residuals of those
identities are the reduction fidelity measure.

The test function phi(t, x) = exp(-t) * phi0(|x|), phi0 the exponential
sphere average, satisfies (Laplacian) phi = phi and d phi/dt = -phi and
weights three functionals of v:

    F = int phi (v_t + v),  H = int phi v_t,  G = 2H - F = int phi (v_t - v),

whose growth obeys F' = int phi |v_t|^p and, for admissible data, the
concavity-type differential inequality

    F'(t) >= c F(t)^p (t + R)^{-(n-1)(p-1)/2}

with R the support radius of g.  The lab records these series during the
run, checks the inequality empirically, and scans measured lifespans
against data size to fit the predicted power laws.

Functional quadrature is restricted to the causal support |x| <= R + t
plus a margin: outside it v vanishes except for spectral roundoff, and
the exponentially large test function must not amplify that roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nonlinear import glassey
from .solver import SolveConfig, Trajectory, critical_exponents, solve
from .spectral import Field, Grid, fractional_derivative, lebesgue_norm

__all__ = [
    "TestFunction",
    "ReductionState",
    "ReductionFailure",
    "FunctionalSeries",
    "BlowupFunctionalObserver",
    "ScanRecord",
    "LifespanFit",
    "CensoredFitError",
    "bump_profile",
    "annulus_profile",
    "profile_field",
    "reduce_to_wave",
    "blowup_functionals",
    "ode_inequality_check",
    "lifespan_scan",
    "glassey_run",
    "lifespan_lower_bound",
    "critical_lifespan_lower_bound",
    "data_size_lambda",
    "superpolynomial_trend",
]


# ---------------------------------------------------------------------------
# data profiles
# ---------------------------------------------------------------------------

def _smooth_cap(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; unit peak at s = 0."""
    out = np.zeros_like(s, dtype=float)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def bump_profile(support_radius: float, amplitude: float = 1.0):
    """Centered smooth compactly supported cap of the given radius."""

    def profile(r: np.ndarray) -> np.ndarray:
        return amplitude * _smooth_cap(np.asarray(r, dtype=float) / support_radius)

    profile.support_radius = support_radius
    profile.description = f"bump(R={support_radius:g}, amp={amplitude:g})"
    return profile


def annulus_profile(center_radius: float, width: float, amplitude: float = 1.0):
    """Smooth shell supported on |r - center_radius| < width."""

    def profile(r: np.ndarray) -> np.ndarray:
        s = (np.asarray(r, dtype=float) - center_radius) / width
        return amplitude * _smooth_cap(s)

    profile.support_radius = center_radius + width
    profile.description = f"annulus(r0={center_radius:g}, w={width:g}, amp={amplitude:g})"
    return profile


def profile_field(grid: Grid, profile, eps: float) -> Field:
    """Real radial data eps * g sampled on the grid."""
    return Field(grid, (eps * profile(grid.radii())).astype(np.complex128), time_tag=0.0)


# ---------------------------------------------------------------------------
# the exponential test function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Sphere average of exp(x . omega - t), evaluated radially.

    The angular integral is done by periodic trapezoid (n = 2, spectrally
    accurate for entire integrands) or Gauss-Legendre in the polar cosine
    (n = 3, likewise spectral); n = 1 is the exact two-point sum.  The
    profile at t = 0 is all that is ever stored: time enters as the exact
    separable factor exp(-t).
    """

    __test__ = False  # not a pytest item despite the analytic name

    dim: int
    quad_order: int = 64

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("test function implemented for dimensions 1, 2, 3")
        if self.quad_order < 4:
            raise ValueError("quadrature order too low")

    def _profile_with_order(self, r: np.ndarray, order: int, moment: int = 0) -> np.ndarray:
        """int_{S^{n-1}} (omega . e1)^moment exp(r * omega . e1) d omega."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.dim == 1:
            plus, minus = np.exp(r), np.exp(-r)
            return plus + (-1.0) ** moment * minus
        if self.dim == 2:
            theta = 2.0 * np.pi * np.arange(order) / order
            c = np.cos(theta)
            return (2.0 * np.pi / order) * np.einsum(
                "t,rt->r", c**moment, np.exp(np.outer(r, c))
            )
        nodes, weights = np.polynomial.legendre.leggauss(order)
        return 2.0 * np.pi * np.einsum(
            "t,rt->r", weights * nodes**moment, np.exp(np.outer(r, nodes))
        )

    def check_convergence(self, r_max: float, tol: float = 1e-8):
        a = self._profile_with_order(np.array([r_max]), self.quad_order)[0]
        b = self._profile_with_order(np.array([r_max]), 2 * self.quad_order)[0]
        if abs(a - b) > tol * abs(b):
            raise ValueError(
                f"test-function quadrature not converged at r={r_max:g} "
                f"(order {self.quad_order}: rel change {abs(a - b) / abs(b):.2e}); raise quad_order"
            )

    def profile(self, r: np.ndarray, moment: int = 0) -> np.ndarray:
        """Radial profile at t = 0; `moment` inserts powers of the polar
        cosine, which is exactly d^moment/dr^moment of the profile."""
        return self._profile_with_order(r, self.quad_order, moment)

    def __call__(self, t: float, grid: Grid) -> Field:
        """phi(t, .) on the grid: exp(-t) times the cached radial profile."""
        return Field(grid, math.exp(-t) * self.grid_profile(grid))

    def grid_profile(self, grid: Grid) -> np.ndarray:
        cache = _phi_cache.setdefault((self.dim, self.quad_order), {})
        key = (grid.dim, grid.half_length, grid.points_per_axis)
        if key not in cache:
            r = grid.radii()
            r_flat = r.ravel()
            r_unique, inverse = np.unique(np.round(r_flat, 12), return_inverse=True)
            self.check_convergence(float(r_unique[-1]))
            prof = self.profile(r_unique)
            cache[key] = prof[inverse].reshape(grid.shape)
        return cache[key]

    def eigenrelation_residual(self, radii: np.ndarray) -> float:
        """Max relative defect of (d_rr + (n-1)/r d_r) phi0 = phi0 on the
        given positive radii, derivatives taken under the integral."""
        radii = np.asarray(radii, dtype=float)
        radii = radii[radii > 0]
        p0 = self.profile(radii, 0)
        p1 = self.profile(radii, 1)
        p2 = self.profile(radii, 2)
        lap = p2 + (self.dim - 1.0) / radii * p1
        return float(np.max(np.abs(lap - p0) / np.abs(p0)))


_phi_cache: dict = {}


# ---------------------------------------------------------------------------
# reduction access
# ---------------------------------------------------------------------------

class ReductionFailure(RuntimeError):
    """Co-integrated wave state failed its defining identities."""


@dataclass(frozen=True)
class ReductionState:
    """One snapshot of the (u, v) pair with its identity residuals."""

    time: float
    u: Field
    v: Field
    v_t: Field  # Re u, the exact time derivative of v along the flow


@dataclass(frozen=True)
class ReductionHistory:
    states: tuple
    times: np.ndarray          # residual sample times (one per interior step)
    dv_residual: np.ndarray    # ||centered dv/dt - Re u|| / ||u||
    space_residual: np.ndarray  # ||D v + Im u|| / ||u||


def reduce_to_wave(traj: Trajectory, tolerance_scale: float = 100.0) -> ReductionHistory:
    """Extract the co-integrated wave states and validate the identities.

    The trajectory must have been produced with track_reduction enabled.
    Residuals beyond tolerance_scale times the expected step-size-squared
    scale raise ReductionFailure.
    """
    red = traj.diagnostics.get("reduction")
    if red is None:
        raise ReductionFailure("trajectory was run without reduction tracking")
    dt = abs(traj.config.dt)
    dv, dspace = red["dv_residual"], red["space_residual"]
    if len(dv):
        expected = dt**2 + 1e-12
        worst = max(float(np.median(dv)), float(np.median(dspace)))
        if worst > tolerance_scale * expected:
            raise ReductionFailure(
                f"identity residuals {worst:.3e} exceed {tolerance_scale:g} x expected {expected:.3e}"
            )
    states = []
    for uf, vf in zip(traj.snapshots, red["v_snapshots"]):
        states.append(
            ReductionState(
                time=float(uf.time_tag),
                u=uf,
                v=vf,
                v_t=uf.with_values(uf.values.real.astype(np.complex128)),
            )
        )
    return ReductionHistory(tuple(states), red["times"], dv, dspace)


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------

class BlowupFunctionalObserver:
    """Per-step accumulator of the phi-weighted functionals.

    Quadrature is restricted to |x| <= support_radius + t + margin, the
    causal support of v; the margin absorbs the smoothing of the split
    steps.  Outside that set the integrand is spectral roundoff times an
    exponentially large weight and must not be summed.
    """

    name = "functionals"

    def __init__(self, grid: Grid, p: float, support_radius: float,
                 test_function: TestFunction | None = None, margin: float = 2.0):
        self.grid = grid
        self.p = p
        self.r0 = support_radius
        self.margin = margin
        self.tf = test_function or TestFunction(grid.dim)
        self.phi0 = self.tf.grid_profile(grid)
        self.radii = grid.radii()
        self.vol = grid.cell_volume
        self.rows = []

    def observe(self, step: int, t: float, u_values: np.ndarray, v_values):
        if v_values is None:
            raise ReductionFailure("functional observer requires reduction tracking")
        mask = self.radii <= min(self.r0 + t + self.margin, 2.0 * self.grid.half_length)
        w = self.phi0[mask] * math.exp(-t)
        v_t = u_values.real[mask]
        v = v_values.real[mask]
        P = self.vol * float(np.sum(w * v))
        Q = self.vol * float(np.sum(w * v_t))
        Fp = self.vol * float(np.sum(w * np.abs(v_t) ** self.p))
        self.rows.append((t, P, Q, Fp))

    def finalize(self) -> dict:
        arr = np.asarray(self.rows)
        return {
            "times": arr[:, 0],
            "int_phi_v": arr[:, 1],
            "int_phi_vt": arr[:, 2],
            "int_phi_vt_power": arr[:, 3],
        }


@dataclass(frozen=True)
class FunctionalSeries:
    """Time series of F, H, G = 2H - F and the direct source quadrature
    int phi |v_t|^p (which equals F' along exact dynamics)."""

    times: np.ndarray
    F: np.ndarray
    H: np.ndarray
    G: np.ndarray
    F_source: np.ndarray

    def numerical_F_prime(self) -> np.ndarray:
        return np.gradient(self.F, self.times)


def blowup_functionals(traj: Trajectory) -> FunctionalSeries:
    """Assemble the functional series recorded by the observer."""
    data = traj.diagnostics.get("functionals")
    if data is None:
        raise ReductionFailure("trajectory carries no functional series")
    P, Q = data["int_phi_v"], data["int_phi_vt"]
    return FunctionalSeries(
        times=data["times"],
        F=Q + P,
        H=Q,
        G=Q - P,
        F_source=data["int_phi_vt_power"],
    )


# ---------------------------------------------------------------------------
# the differential inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeCheckReport:
    times: np.ndarray
    c_empirical: np.ndarray
    inf_c: float
    holder_sup: float
    passed: bool


def ode_inequality_check(series: FunctionalSeries, n: int, p: float, R: float,
                         t_max: float | None = None) -> OdeCheckReport:
    """Empirical constant of F' >= c F^p (t + R)^{-(n-1)(p-1)/2}.

    Uses the direct source quadrature for F'; requires F > 0 on the
    window.  Also reports the sup of F / (F'^{1/p} (t + R)^{(n-1)(1-1/p)/2}),
    the intermediate bound that produces the inequality.
    """
    mask = np.ones(len(series.times), dtype=bool)
    if t_max is not None:
        mask &= series.times <= t_max
    t = series.times[mask]
    F = series.F[mask]
    Fp = series.F_source[mask]
    if np.any(F <= 0):
        raise ValueError("F must stay positive on the requested window")
    exponent = (n - 1.0) * (p - 1.0) / 2.0
    c_emp = Fp * (t + R) ** exponent / F**p
    holder = F / (Fp ** (1.0 / p) * (t + R) ** ((n - 1.0) / 2.0 * (1.0 - 1.0 / p)))
    inf_c = float(np.min(c_emp))
    return OdeCheckReport(
        times=t,
        c_empirical=c_emp,
        inf_c=inf_c,
        holder_sup=float(np.max(holder)),
        passed=bool(inf_c > 0 and np.isfinite(inf_c)),
    )


# ---------------------------------------------------------------------------
# lifespan scanning
# ---------------------------------------------------------------------------

class CensoredFitError(RuntimeError):
    """Too many scan records were censored by the wrap guard."""


@dataclass(frozen=True)
class ScanRecord:
    epsilon: float
    t_star: float | None
    censored: bool
    dt: float
    points_per_axis: int
    half_length: float
    refinement_delta: float | None  # relative t* change under dt halving
    mass_drift: float | None

    @property
    def validated(self) -> bool:
        return self.refinement_delta is not None and self.refinement_delta < 0.05


@dataclass(frozen=True)
class LifespanFit:
    records: tuple
    branch: str                 # "subcritical_power" | "critical_exponential"
    slope: float
    intercept: float
    r_squared: float
    residual: float
    censored_fraction: float


def glassey_run(grid: Grid, p: float, u0: Field, dt: float, t_end: float,
                threshold: float, track: bool = False,
                observers: tuple = ()) -> Trajectory:
    """One derivative-type blow-up run with the sup-norm detector armed."""
    cfg = SolveConfig(
        grid=grid,
        F=glassey(p, 1.0),
        dt=dt,
        t_end=t_end,
        monitors=("mass", "sup"),
        monitor_stride=max(1, int(round(0.1 / dt))),
        blowup_threshold=threshold,
        track_reduction=track,
        observers=observers,
        wrap_guard=True,
    )
    return solve(u0, cfg)


def _measure_t_star(dim, p, profile, eps, points_per_axis, dt, half_length,
                    threshold_factor) -> tuple:
    grid = Grid(dim, half_length, points_per_axis)
    u0 = profile_field(grid, profile, eps)
    peak = float(np.max(np.abs(u0.values)))
    t_end_max = half_length - profile.support_radius - 2.0 * grid.spacing
    n_steps = max(1, math.floor(t_end_max / dt))
    traj = glassey_run(grid, p, u0, dt, n_steps * dt, threshold_factor * peak)
    t_star = traj.termination.t_star if traj.termination.kind == "blowup_detected" else None
    return t_star, traj


def lifespan_scan(dim: int, p: float, eps_list, profile, *, points_per_axis: int,
                  dt=2e-3, threshold_factor: float = 1e6,
                  initial_half_length=None, max_box_doublings: int = 2,
                  validate: bool = True, branch: str | None = None) -> LifespanFit:
    """Measure lifespans over a data-size sweep and fit the scaling law.

    Per size eps the box is grown from a pilot guess until the run blows
    up inside the wrap-guard horizon (or the doubling budget is spent and
    the record is censored).  When `validate` is set every measured t* is
    re-run at dt/2 and the relative change recorded; the fit uses the
    refined values.  The subcritical branch fits log t* against log(1/eps),
    the critical branch fits log t* against eps^{-(p-1)}.

    `dt` and `initial_half_length` may be callables of eps: long small-size
    runs tolerate coarser steps (the dynamics slow down with the data) and
    tighter boxes; the halving gate records whether each choice was fine
    enough.

    Raises CensoredFitError when more than a quarter of the records are
    censored.
    """
    eps_list = list(eps_list)
    if len(eps_list) < 4:
        raise ValueError("need at least 4 sizes per scan")
    if max(eps_list) / min(eps_list) < 4.0 - 1e-9:
        raise ValueError("sizes must span at least a factor of 4")
    exps = critical_exponents(dim, p)
    if branch is None:
        branch = "critical_exponential" if exps.exponential_lifespan else "subcritical_power"
    dt_of = dt if callable(dt) else (lambda _eps: dt)
    box_of = initial_half_length if callable(initial_half_length) else None

    L = (initial_half_length if not callable(initial_half_length) else None) \
        or 4.0 * profile.support_radius
    records = []
    last_t_star = None
    for eps in sorted(eps_list, reverse=True):
        dt_eps = float(dt_of(eps))
        if box_of is not None:
            box = float(box_of(eps))
        else:
            if last_t_star is not None:
                # pilot guess: previous lifespan scaled with headroom; the
                # doubling loop fixes underestimates
                L = max(L, 1.3 * last_t_star + profile.support_radius + 1.0)
            box = L
        t_star, traj = _measure_t_star(dim, p, profile, eps, points_per_axis, dt_eps, box,
                                       threshold_factor)
        doublings = 0
        while t_star is None and doublings < max_box_doublings:
            box *= 2.0
            doublings += 1
            t_star, traj = _measure_t_star(dim, p, profile, eps, points_per_axis, dt_eps, box,
                                           threshold_factor)
        refinement = None
        final_t = t_star
        if t_star is not None and validate:
            t_half, _ = _measure_t_star(dim, p, profile, eps, points_per_axis, dt_eps / 2.0,
                                        box, threshold_factor)
            if t_half is not None:
                refinement = abs(t_half - t_star) / t_star
                final_t = t_half
        drift = traj.monitor_drift("mass") if t_star is None else None
        records.append(
            ScanRecord(
                epsilon=eps,
                t_star=final_t,
                censored=t_star is None,
                dt=dt_eps / 2.0 if (validate and t_star is not None) else dt_eps,
                points_per_axis=points_per_axis,
                half_length=box,
                refinement_delta=refinement,
                mass_drift=drift,
            )
        )
        if final_t is not None:
            last_t_star = final_t

    censored_fraction = sum(r.censored for r in records) / len(records)
    if censored_fraction > 0.25:
        raise CensoredFitError(
            f"{censored_fraction:.0%} of records censored; scan cannot be fitted"
        )
    kept = [r for r in records if not r.censored]
    if branch == "subcritical_power":
        x = np.log(1.0 / np.array([r.epsilon for r in kept]))
    else:
        x = np.array([r.epsilon for r in kept]) ** (-(p - 1.0))
    y = np.log(np.array([r.t_star for r in kept]))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return LifespanFit(
        records=tuple(records),
        branch=branch,
        slope=float(coef[0]),
        intercept=float(coef[1]),
        r_squared=1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        residual=math.sqrt(ss_res / len(kept)),
        censored_fraction=censored_fraction,
    )


# ---------------------------------------------------------------------------
# closed-form lifespan bounds
# ---------------------------------------------------------------------------

def data_size_lambda(u0: Field, s1: float) -> float:
    """Geometric-mean data size ||D^{s1} u0||^{1/2} ||D^{1-s1} u0||^{1/2}."""
    a = lebesgue_norm(fractional_derivative(u0, s1), 2)
    b = lebesgue_norm(fractional_derivative(u0, 1.0 - s1), 2)
    return math.sqrt(a * b)


def lifespan_lower_bound(lam: float, n: int, p: float, c: float = 1.0) -> float:
    """Guaranteed existence horizon c * Lambda^{-(p-1)/delta},
    delta = 1 - (n-1)(p-1)/2 > 0."""
    exps = critical_exponents(n, p)
    if exps.delta is None:
        raise ValueError("power is not subcritical for this dimension")
    return c * lam ** (-(p - 1.0) / exps.delta)


def critical_lifespan_lower_bound(eps: float, n: int, p: float, c: float = 1.0) -> float:
    """Critical-branch horizon exp(c * eps^{-(p-1)})."""
    exps = critical_exponents(n, p)
    if not exps.exponential_lifespan:
        raise ValueError("power is not on the critical line for this dimension")
    return math.exp(c * eps ** (-(p - 1.0)))


def superpolynomial_trend(eps_values, t_stars) -> bool:
    """Whether measured lifespans grow faster than any fixed power: the
    log-log local slopes must increase as the size decreases."""
    eps_values = np.asarray(eps_values, dtype=float)
    t_stars = np.asarray(t_stars, dtype=float)
    order = np.argsort(eps_values)[::-1]
    x = np.log(1.0 / eps_values[order])
    y = np.log(t_stars[order])
    slopes = np.diff(y) / np.diff(x)
    return bool(np.all(np.diff(slopes) > 0))
