"""Empirical verification of the a priori estimates.

Every function here measures a ratio LHS/RHS of one inequality on concrete
fields; the benches assert only that ensemble suprema of these ratios are
finite and stable under refinement, since the theory never names its
constants.

Covered inequalities:

- dispersive bound ||U(t) f||_{L^q_T L^inf_x} <= C ||f||_{H^sigma-dot},
  sigma = n/2 - 1/q, with the radial improvements of the admissible range;
- weighted space-time (local energy / KSS) bounds for the inhomogeneous
  equation i du/dt - D u = G with radial weights r^{-(1-d)/2} <r>^{-d'/2},
  in the T-power, log, and global flavors;
- Muckenhoupt A_1/A_2 characteristics of those weights over a documented
  family of balls (radial centers, dyadic radii, shell quadrature);
- the weighted norm equivalence ||w D^1 f|| <~ sum_j ||w d_j f|| behind the
  Riesz-transform reduction;
- radial L^inf trace bounds r^{(n-1)/2}|f| <= C ||D^{s1} f||^{1/2}
  ||D^{1-s1} f||^{1/2} and r^{n/2-s}|f| <= C ||f||_{H^s-dot};
- the weighted composition rule
  ||w^{-1} D^s F(u)|| <~ ||w D^s u|| * ||w^{-2} |u|^{p-1}||_inf.

Weights are evaluated at grid radii with the origin sample clamped to half
a grid spacing; that clamp is a documented quadrature choice, legitimate
because admissible weights are locally square integrable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nonlinear import DegenerateInputError, Nonlinearity, evaluate
from .solver import SolveConfig, _Stepper, support_radius
from .spectral import (
    Field,
    Grid,
    SpectralError,
    fractional_derivative,
    partial_derivative,
    remove_mean,
)

__all__ = [
    "WeightSpec",
    "EstimateReport",
    "strichartz_ratio",
    "local_energy_check",
    "muckenhoupt_characteristic",
    "weighted_riesz_ratio",
    "radial_sobolev_ratio",
    "weighted_chainrule_ratio",
    "is_radial",
    "summarize",
]

_SPHERE_AREA = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


@dataclass(frozen=True)
class WeightSpec:
    """Radial weight w(r) = r^{-(1-delta)/2} <r>^{-tail/2} with
    <r> = sqrt(1 + r^2).

    form "pure_power" has no tail factor, "kss" reuses delta as the tail
    exponent, "global" uses delta_prime.  Admissibility in dimension n
    means 0 <= 1 - delta <= 1 - delta + tail < n, which puts w^2 in the
    first Muckenhoupt class.
    """

    delta: float
    delta_prime: float = 0.0
    form: str = "pure_power"

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.delta_prime < 0:
            raise ValueError(f"delta_prime must be nonnegative, got {self.delta_prime}")
        if self.form not in ("pure_power", "kss", "global"):
            raise ValueError(f"unknown weight form {self.form!r}")

    @property
    def tail_exponent(self) -> float:
        if self.form == "pure_power":
            return 0.0
        if self.form == "kss":
            return self.delta
        return self.delta_prime

    def admissible(self, dim: int) -> bool:
        head = 1.0 - self.delta
        return 0.0 <= head <= head + self.tail_exponent < dim

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        head = -(1.0 - self.delta) / 2.0
        with np.errstate(divide="ignore"):
            out = np.where(r > 0, r, 1.0) ** head
            out = np.where(r > 0, out, np.inf if head < 0 else 1.0)
        tail = self.tail_exponent
        if tail:
            out = out * (1.0 + r**2) ** (-tail / 4.0)
        return out

    def squared(self, r: np.ndarray) -> np.ndarray:
        return self(r) ** 2

    def on_grid(self, grid: Grid) -> np.ndarray:
        """Weight at sample radii, origin clamped to half a spacing."""
        r = np.maximum(grid.radii(), 0.5 * grid.spacing)
        return self(r)


@dataclass(frozen=True)
class EstimateReport:
    """One measured inequality instance, optionally with ensemble stats."""

    lhs: float
    rhs: float
    ratio: float
    params: tuple
    sup: float | None = None
    mean: float | None = None
    drift: float | None = None

    def __post_init__(self):
        for v in (self.lhs, self.rhs, self.ratio):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"estimate report values must be finite and nonnegative, got {v}")


def summarize(reports, refined=None) -> EstimateReport:
    """Aggregate single-field reports into an ensemble report; `refined`
    supplies the same measurements on a refined grid for the drift figure."""
    ratios = np.array([r.ratio for r in reports])
    sup = float(ratios.max())
    drift = None
    if refined is not None:
        sup_ref = max(r.ratio for r in refined)
        drift = abs(sup_ref - sup) / sup if sup > 0 else 0.0
    base = reports[int(np.argmax(ratios))]
    return EstimateReport(
        lhs=base.lhs, rhs=base.rhs, ratio=base.ratio, params=base.params,
        sup=sup, mean=float(ratios.mean()), drift=drift,
    )


# ---------------------------------------------------------------------------
# dispersive bound
# ---------------------------------------------------------------------------

def _strichartz_admissible(n: int, q: float, radial: bool) -> bool:
    if q == np.inf or q <= 2:
        return radial and n >= 3 and q == 2
    if n == 2:
        return q > 4 or (radial and 2 < q <= 4)
    if n >= 3:
        return True
    return False


def strichartz_ratio(f: Field, q: float, T: float, radial: bool = False,
                     time_samples: int = 65, wrap_guard: bool = True) -> EstimateReport:
    """||U(t) f||_{L^q_T L^inf_x} / ||f||_{H^sigma-dot}, sigma = n/2 - 1/q.

    The time norm uses a composite trapezoid rule on >= 64 intervals; the
    space norm is the grid max.  The admissible exponent set depends on
    (n, radial); the endpoint q = inf is rejected.  The wrap guard can be
    waived for lattice eigenfunctions, whose evolution is box-exact.
    """
    grid = f.grid
    n = grid.dim
    if n < 2:
        raise SpectralError("dispersive bench needs dimension 2 or 3")
    if not _strichartz_admissible(n, q, radial):
        raise SpectralError(f"exponent q={q} outside the admissible set for n={n}, radial={radial}")
    if time_samples < 65:
        raise ValueError("need at least 64 trapezoid intervals")
    if wrap_guard and T + support_radius(f) > grid.half_length * (1 + 1e-12):
        raise SpectralError("time horizon would let the evolution wrap the box")
    if radial and not is_radial(f):
        raise SpectralError("radial improvement requested for a non-radial field")
    from .besov import sobolev_norm

    sigma = n / 2.0 - 1.0 / q
    rhs = sobolev_norm(f, sigma, homogeneous=True)
    if rhs == 0.0:
        raise DegenerateInputError("vanishing reference norm")
    times = np.linspace(0.0, T, time_samples)
    dt = times[1] - times[0]
    import scipy.fft

    spec0 = scipy.fft.fftn(f.values)
    k_abs = grid.wavenumber_magnitude()
    sup_values = np.empty(time_samples)
    for i, t in enumerate(times):
        ut = scipy.fft.ifftn(spec0 * np.exp(-1j * t * k_abs))
        sup_values[i] = np.max(np.abs(ut))
    lhs = float(np.trapezoid(sup_values**q, dx=dt) ** (1.0 / q))
    return EstimateReport(lhs, rhs, lhs / rhs, params=(("q", q), ("T", T), ("radial", radial)))


# ---------------------------------------------------------------------------
# weighted space-time bound for the forced equation
# ---------------------------------------------------------------------------

def local_energy_check(u0: Field, source, w: WeightSpec, T: float, dt: float = 1e-2,
                       wrap_guard: bool = True) -> EstimateReport:
    """Weighted space-time bound for i du/dt - D u = G.

    Integrates the forced flow by splitting (midpoint source kicks) and
    accumulates both sides of the weighted inequality matching the weight
    form: T-power factors for "pure_power", log(2+T) factors for "kss",
    no factors for "global".  G may be None (free flow) or a callable
    t -> samples.
    """
    grid = u0.grid
    if not w.admissible(grid.dim):
        raise ValueError("inadmissible weight for this dimension")
    cfg = SolveConfig(grid=grid, F=None, dt=dt, t_end=T, monitors=(),
                      source=source, wrap_guard=wrap_guard)
    n_steps = cfg.n_steps()
    stepper = _Stepper(cfg)
    wgrid = w.on_grid(grid)
    vol = grid.cell_volume

    values = u0.values.copy()
    sup_l2 = math.sqrt(vol * float(np.sum(np.abs(values) ** 2)))
    wu_sq = [float(np.sum((wgrid * np.abs(values)) ** 2)) * vol]
    g_sq = 0.0
    t = 0.0
    for i in range(n_steps):
        if source is not None:
            gmid = source(t + 0.5 * dt)
            gmid = gmid.values if isinstance(gmid, Field) else np.asarray(gmid)
            g_sq += dt * float(np.sum((np.abs(gmid) / wgrid) ** 2)) * vol
        values = stepper.step(values, t)
        if not np.all(np.isfinite(values.view(np.float64))):
            raise FloatingPointError("forced run left the finite range")
        t = (i + 1) * dt
        sup_l2 = max(sup_l2, math.sqrt(vol * float(np.sum(np.abs(values) ** 2))))
        wu_sq.append(float(np.sum((wgrid * np.abs(values)) ** 2)) * vol)

    wu_int = float(np.trapezoid(np.asarray(wu_sq), dx=dt))
    if w.form == "pure_power":
        in_factor, out_factor = T ** (-w.delta / 2.0), T ** (w.delta / 2.0)
    elif w.form == "kss":
        in_factor = math.log(2.0 + T) ** (-0.5)
        out_factor = math.log(2.0 + T) ** 0.5
    else:
        in_factor = out_factor = 1.0
    lhs = sup_l2 + in_factor * math.sqrt(wu_int)
    u0_l2 = math.sqrt(vol * float(np.sum(np.abs(u0.values) ** 2)))
    rhs = u0_l2 + out_factor * math.sqrt(g_sq)
    if rhs == 0.0:
        raise DegenerateInputError("trivial data and source")
    return EstimateReport(lhs, rhs, lhs / rhs,
                          params=(("delta", w.delta), ("form", w.form), ("T", T), ("dt", dt)))


# ---------------------------------------------------------------------------
# Muckenhoupt characteristics
# ---------------------------------------------------------------------------

def _shell_average(weight_sq, dim: int, center: float, radius: float, depth: int,
                   gl_nodes: int = 16):
    """Average of a radial function over the ball B(center * e1, radius),
    by slicing into spheres |x| = r and integrating the covered surface
    fraction; returns (average, node_values).

    Near the origin the r-integral is decomposed into `depth` dyadic
    shells so integrable singularities are captured; mass below the last
    shell is dropped (an under-approximation that certifies divergence
    growth for non-integrable weights).
    """
    r_lo = max(0.0, center - radius)
    r_hi = center + radius
    area = _SPHERE_AREA[dim]

    def covered_area(r):
        # surface measure of the sphere of radius r inside the ball
        r = np.asarray(r, dtype=float)
        full = area * r ** (dim - 1)
        if center == 0.0:
            return full
        with np.errstate(divide="ignore", invalid="ignore"):
            cosang = np.clip((center**2 + r**2 - radius**2) / (2.0 * center * r), -1.0, 1.0)
        ang = np.arccos(cosang)
        if dim == 1:
            frac = np.where(r <= radius - center, 1.0, 0.5)
        elif dim == 2:
            frac = ang / np.pi
        else:
            frac = (1.0 - cosang) / 2.0
        inside_full = r <= radius - center
        return np.where(inside_full, full, full * frac)

    nodes, weights = np.polynomial.legendre.leggauss(gl_nodes)

    def integrate(lo, hi, fn):
        r = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        return 0.5 * (hi - lo) * float(np.sum(weights * fn(r))), r

    seg_edges = []
    if r_lo > 0:
        seg_edges = [(r_lo, r_hi)]
    else:
        hi = r_hi
        for _ in range(depth):
            seg_edges.append((hi / 2.0, hi))
            hi /= 2.0
    total, volume = 0.0, 0.0
    node_values = []
    for lo, hi in seg_edges:
        v, r = integrate(lo, hi, lambda rr: covered_area(rr) * weight_sq(rr))
        vol_piece, _ = integrate(lo, hi, covered_area)
        total += v
        volume += vol_piece
        node_values.append(weight_sq(r))
    # quadrature volume (not the exact ball volume) keeps the ratio of the
    # two integrals consistent under truncation of the innermost shells
    return total / volume, np.concatenate(node_values)


def muckenhoupt_characteristic(weight, dim: int, kind: str = "A1", resolution: int = 8,
                               outer_radius: float = 8.0) -> float:
    """Sampled Muckenhoupt characteristic of a radial weight squared.

    `weight` is a WeightSpec (its square is used) or a callable r -> w^2.
    The ball family has 32 radial centers in [0, outer_radius] and dyadic
    radii outer_radius * 2^-i down to level `resolution`; ball averages
    use shell quadrature whose near-origin depth is resolution**2 dyadic
    shells.  The returned sup is monotone nondecreasing in `resolution`
    (the family grows and the shell sums only gain nonnegative mass), and
    it converges for weights with integrable local singularities while
    growing without bound for the non-integrable control cases.
    """
    if kind not in ("A1", "A2"):
        raise ValueError("kind must be A1 or A2")
    if isinstance(weight, WeightSpec):
        w_sq = weight.squared
    else:
        w_sq = weight

    def w_sq_inv(r):
        return 1.0 / w_sq(r)

    centers = np.linspace(0.0, outer_radius, 32)
    radii = [outer_radius * 2.0 ** (-i) for i in range(0, min(resolution, 50) + 1)]
    depth = min(resolution**2, 400)
    best = 0.0
    for radius in radii:
        for center in centers:
            if center - radius > 0 and center > 2.5 * radius:
                continue  # far-from-origin balls of smooth weights are uninformative
            avg_w, nodes_w = _shell_average(w_sq, dim, float(center), float(radius), depth)
            if kind == "A1":
                ess = float(np.max(1.0 / nodes_w))
                cand = avg_w * ess
            else:
                avg_inv, _ = _shell_average(w_sq_inv, dim, float(center), float(radius), depth)
                cand = avg_w * avg_inv
            best = max(best, cand)
    return best


# ---------------------------------------------------------------------------
# weighted derivative equivalence
# ---------------------------------------------------------------------------

def weighted_riesz_ratio(f: Field, w: WeightSpec) -> float:
    """||w D^1 f||_2 / sum_j ||w d_j f||_2 on mean-removed fields; the
    boundedness of the Riesz transforms on the weighted space makes the
    two sides equivalent."""
    grid = f.grid
    g = remove_mean(f)
    wgrid = w.on_grid(grid)
    vol = grid.cell_volume
    num = math.sqrt(vol * float(np.sum((wgrid * np.abs(fractional_derivative(g, 1.0).values)) ** 2)))
    den = 0.0
    for j in range(1, grid.dim + 1):
        den += math.sqrt(vol * float(np.sum((wgrid * np.abs(partial_derivative(g, j).values)) ** 2)))
    if den == 0.0:
        raise DegenerateInputError("vanishing gradient")
    return num / den


# ---------------------------------------------------------------------------
# radial L^inf bounds
# ---------------------------------------------------------------------------

def is_radial(f: Field, tol: float = 1e-8) -> bool:
    """Whether samples at equal radius agree to tol * sup |f|."""
    r2 = np.round((f.grid.radii() ** 2).ravel() / f.grid.spacing**2).astype(np.int64)
    vals = f.values.ravel()
    order = np.argsort(r2, kind="stable")
    r2s, vs = r2[order], vals[order]
    sup = np.max(np.abs(vals))
    if sup == 0.0:
        return True
    boundaries = np.flatnonzero(np.diff(r2s)) + 1
    groups = np.split(vs, boundaries)
    for g in groups:
        if len(g) > 1 and np.max(np.abs(g - g[0])) > tol * sup:
            return False
    return True


def radial_sobolev_ratio(f: Field, s1: float, form: str = "trace") -> float:
    """Radial L^inf bounds against fractional energies.

    form "trace": sup_r r^{(n-1)/2} |f| over ||D^{s1} f||^{1/2}
    ||D^{1-s1} f||^{1/2}, s1 in (1/2, 1); form "pointwise":
    sup_r r^{n/2-s} |f| over the s-order homogeneous norm, s in (1/2, n/2).
    The origin sample is excluded from the sup (its radial weight
    vanishes for n >= 2 anyway).
    """
    grid = f.grid
    n = grid.dim
    if form == "trace":
        if not 0.5 < s1 < 1.0:
            raise ValueError("trace form needs s1 in (1/2, 1)")
        exponent = (n - 1.0) / 2.0
    elif form == "pointwise":
        if not 0.5 < s1 < n / 2.0:
            raise ValueError("pointwise form needs s in (1/2, n/2)")
        exponent = n / 2.0 - s1
    else:
        raise ValueError(f"unknown form {form!r}")
    if not is_radial(f):
        raise SpectralError("input must be radial for this bound")
    r = grid.radii()
    mask = r > 0
    lhs = float(np.max(r[mask] ** exponent * np.abs(f.values[mask])))
    from .besov import sobolev_norm

    if form == "trace":
        rhs = math.sqrt(sobolev_norm(f, s1, True) * sobolev_norm(f, 1.0 - s1, True))
    else:
        rhs = sobolev_norm(f, s1, True)
    if rhs == 0.0:
        raise DegenerateInputError("vanishing reference norm")
    return lhs / rhs


# ---------------------------------------------------------------------------
# weighted composition rule
# ---------------------------------------------------------------------------

def weighted_chainrule_ratio(F: Nonlinearity, f: Field, s: float, w: WeightSpec) -> float:
    """||w^{-1} D^s F(f)||_2 / (||w D^s f||_2 * sup w^{-2} |f|^{p-1}),
    for s in [0, 1] and an admissible weight."""
    grid = f.grid
    if not 0.0 <= s <= 1.0:
        raise ValueError("weighted composition rule covers s in [0, 1]")
    if not w.admissible(grid.dim):
        raise ValueError("inadmissible weight for this dimension")
    wgrid = w.on_grid(grid)
    vol = grid.cell_volume
    ds_f = fractional_derivative(remove_mean(f), s) if s > 0 else f
    den_norm = math.sqrt(vol * float(np.sum((wgrid * np.abs(ds_f.values)) ** 2)))
    gain = float(np.max(np.abs(f.values) ** (F.p - 1.0) / wgrid**2))
    if den_norm == 0.0 or gain == 0.0:
        raise DegenerateInputError("degenerate weighted composition input")
    Fu = evaluate(F, f)
    ds_Fu = fractional_derivative(remove_mean(Fu), s) if s > 0 else Fu
    lhs = math.sqrt(vol * float(np.sum((np.abs(ds_Fu.values) / wgrid) ** 2)))
    return lhs / (den_norm * gain)
