"""Nonlinearity catalog, derivative-regularity checker, and the empirical
composition/product inequality ratios.

The catalog covers the power-type right-hand sides of the half-wave
equation:

- ``power_gauge``: lambda |u|^{p-1} u  (gauge invariant; algebraic for odd
  integer p),
- ``power_abs``:   lambda |u|^p        (algebraic for even integer p),
- ``glassey``:     i lambda |Re u|^p   (the derivative-type model driving
  the blow-up construction),
- ``custom``:      any vectorized callable with F(0) = 0.

A nonlinearity is treated as a map from R^2 to R^2 of the complex plane.
The regularity checker estimates, for each derivative order j up to the
declared smoothness index k, the best constant in the two-point bound

    |F^(j)(z1) - F^(j)(z2)| <= C_j * |z1 - z2| * max(|z1|, |z2|)^{p-j-1}

(or the Hoelder variant |z1 - z2|^{p-j} when j = k and p < k + 1) by
sampling pairs in a disk, including near-coincident collinear pairs where
such suprema are attained.  Derivative magnitudes are maxima of repeated
directional derivatives over a fixed fan of directions: analytic formulas
for the catalog kinds, central finite differences for custom ones.

The chain-rule and product-rule ratios divide the measured left-hand side
of the corresponding smoothness inequality by its right-hand side; the
benches only ever assert finiteness and refinement stability of ensemble
suprema, never specific constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .besov import BesovParams, besov_norm, sobolev_norm
from .spectral import Field, dealias as dealias_field, lebesgue_norm

__all__ = [
    "Nonlinearity",
    "DegenerateInputError",
    "PropertyReport",
    "evaluate",
    "check_property_Fkp",
    "chainrule_ratio",
    "leibniz_ratio",
    "power_gauge",
    "power_abs",
    "glassey",
]

_KINDS = ("power_gauge", "power_abs", "glassey", "custom")


class DegenerateInputError(ValueError):
    """A ratio was requested for an input with a vanishing denominator."""


@dataclass(frozen=True)
class Nonlinearity:
    """Catalog entry for a right-hand side F(u).

    p > 1 is the power, k the integer smoothness index (1 <= k <= p; the
    natural choice for non-algebraic powers is ceil(p) - 1), lam the
    coefficient.  `fn` supplies the pointwise map for custom kinds.
    `derivative_constants` holds measured two-point constants once a
    regularity check has been attached.
    """

    kind: str
    p: float
    k: int | None = None
    lam: complex = 1.0
    fn: object = None
    derivative_constants: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if not self.p > 1:
            raise ValueError(f"power must satisfy p > 1, got {self.p}")
        if self.k is None:
            object.__setattr__(self, "k", max(1, math.ceil(self.p) - 1))
        if not 1 <= self.k <= self.p:
            raise ValueError(f"smoothness index must satisfy 1 <= k <= p, got k={self.k}, p={self.p}")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom nonlinearity needs a callable fn")

    @property
    def gauge_invariant(self) -> bool:
        return self.kind == "power_gauge"

    def pointwise(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        if self.kind == "power_gauge":
            return self.lam * np.abs(z) ** (self.p - 1.0) * z
        if self.kind == "power_abs":
            return self.lam * np.abs(z) ** self.p + 0.0j
        if self.kind == "glassey":
            return 1j * self.lam * np.abs(z.real) ** self.p + 0.0j * z
        return np.asarray(self.fn(z), dtype=np.complex128)


def power_gauge(p: float, lam: complex = 1.0, k: int | None = None) -> Nonlinearity:
    return Nonlinearity("power_gauge", p, k, lam)


def power_abs(p: float, lam: complex = 1.0, k: int | None = None) -> Nonlinearity:
    return Nonlinearity("power_abs", p, k, lam)


def glassey(p: float, lam: complex = 1.0, k: int | None = None) -> Nonlinearity:
    return Nonlinearity("glassey", p, k, lam)


def evaluate(F: Nonlinearity, f: Field, dealias: bool = False) -> Field:
    """Pointwise application F(f); with `dealias` the input and the result
    are both passed through the 2/3-rule filter."""
    g = dealias_field(f) if dealias else f
    out = g.with_values(F.pointwise(g.values))
    return dealias_field(out) if dealias else out


# ---------------------------------------------------------------------------
# directional derivatives
# ---------------------------------------------------------------------------

def _pow_pair(z: complex, c1: float, c2: float) -> complex:
    """z^{c1} * conj(z)^{c2} for real exponents, single-valued whenever
    c1 - c2 is an integer (which every term used here satisfies)."""
    r = abs(z)
    if r == 0.0:
        total = c1 + c2
        if total > 0:
            return 0.0
        if total == 0:
            return 1.0
        return math.inf
    theta = math.atan2(z.imag, z.real)
    return r ** (c1 + c2) * complex(math.cos((c1 - c2) * theta), math.sin((c1 - c2) * theta))


def _falling(a: float, i: int) -> float:
    out = 1.0
    for t in range(i):
        out *= a - t
    return out


def directional_derivative(F: Nonlinearity, z: complex, h: complex, j: int,
                           fd_step: float = 1e-5) -> complex:
    """j-th derivative of tau -> F(z + tau h) at tau = 0, |h| = 1.

    Catalog kinds use the exact two-index monomial calculus; custom kinds
    fall back to central finite differences of the given step.
    """
    if j == 0:
        return complex(F.pointwise(np.array([z]))[0])
    if F.kind in ("power_gauge", "power_abs"):
        if F.kind == "power_gauge":
            a, b = (F.p + 1.0) / 2.0, (F.p - 1.0) / 2.0
        else:
            a = b = F.p / 2.0
        hb = h.conjugate()
        total = 0.0 + 0.0j
        for i in range(j + 1):
            coef = math.comb(j, i) * _falling(a, i) * _falling(b, j - i)
            if coef == 0.0:
                continue
            total += coef * _pow_pair(z, a - i, b - (j - i)) * h**i * hb ** (j - i)
        return F.lam * total
    if F.kind == "glassey":
        x = z.real
        sign = 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)
        mag = abs(x) ** (F.p - j) if (abs(x) > 0 or F.p - j > 0) else math.inf
        if F.p - j == 0 and abs(x) == 0:
            mag = 1.0
        return 1j * F.lam * _falling(F.p, j) * mag * sign**j * (h.real) ** j
    # custom: central differences
    def g(tau: float) -> complex:
        return complex(F.pointwise(np.array([z + tau * h]))[0])

    e = fd_step
    if j == 1:
        return (g(e) - g(-e)) / (2 * e)
    if j == 2:
        return (g(e) - 2 * g(0) + g(-e)) / e**2
    if j == 3:
        return (g(2 * e) - 2 * g(e) + 2 * g(-e) - g(-2 * e)) / (2 * e**3)
    if j == 4:
        return (g(2 * e) - 4 * g(e) + 6 * g(0) - 4 * g(-e) + g(-2 * e)) / e**4
    raise NotImplementedError("finite-difference derivatives implemented up to order 4")


_DIRECTION_FAN = [complex(math.cos(t), math.sin(t)) for t in np.linspace(0.0, np.pi, 8, endpoint=False)]


def derivative_gap(F: Nonlinearity, z1: complex, z2: complex, j: int, fd_step: float = 1e-5) -> float:
    """max over the direction fan of |F^(j)(z1)[h,...] - F^(j)(z2)[h,...]|."""
    best = 0.0
    for h in _DIRECTION_FAN:
        d1 = directional_derivative(F, z1, h, j, fd_step)
        d2 = directional_derivative(F, z2, h, j, fd_step)
        val = abs(d1 - d2)
        if math.isnan(val):
            return math.nan
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# the (k, p) regularity checker
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the two-point derivative-bound estimation."""

    orders: tuple          # j = 0..k
    constants: tuple       # empirical sup of LHS/RHS per order
    doubled_constants: tuple  # same with twice the sample count
    stable: tuple          # |change| < 10% per order
    finite: tuple
    bound_forms: tuple     # "lipschitz" or "hoelder" per order
    flagged_samples: int   # pairs skipped near a derivative singularity
    passed: bool


def _sample_pairs(rng: np.random.Generator, samples: int, radius: float):
    """Random pairs in the disk, half independent, half near-coincident
    collinear (where Lipschitz-quotient suprema are attained)."""
    n_free = samples // 2
    z1 = radius * np.sqrt(rng.uniform(0, 1, samples)) * np.exp(2j * np.pi * rng.uniform(0, 1, samples))
    z2 = np.empty_like(z1)
    z2[:n_free] = radius * np.sqrt(rng.uniform(0, 1, n_free)) * np.exp(
        2j * np.pi * rng.uniform(0, 1, n_free)
    )
    eps = 10.0 ** rng.uniform(-4, -1, samples - n_free)
    sign = np.where(rng.uniform(size=samples - n_free) < 0.5, 1.0, -1.0)
    z2[n_free:] = z1[n_free:] * (1.0 - sign * eps)
    return z1, z2


def check_property_Fkp(F: Nonlinearity, samples: int = 2000, radius: float = 10.0,
                       seed: int = 0) -> PropertyReport:
    """Estimate the two-point derivative bounds of F up to order k.

    For each j the empirical constant is the sup over sampled pairs of
    LHS/RHS; the check passes when every constant is finite and moves by
    less than 10% when the sample count doubles.  Pairs whose derivative
    evaluation hits a genuine singularity (e.g. Re z = 0 for the
    derivative-type kind at high order) are flagged and skipped rather
    than poisoning the sup.
    """
    sups, sups2, stable, finite, forms = [], [], [], [], []
    flagged = 0
    for j in range(F.k + 1):
        lipschitz = F.p >= j + 1
        forms.append("lipschitz" if lipschitz else "hoelder")
        run = []
        for factor, bucket in ((1, None), (2, None)):
            rng = np.random.default_rng(np.random.SeedSequence([seed, j, factor]))
            z1s, z2s = _sample_pairs(rng, samples * factor, radius)
            best = 0.0
            for z1, z2 in zip(z1s, z2s):
                gap = derivative_gap(F, complex(z1), complex(z2), j, fd_step=1e-5 * radius)
                if math.isnan(gap) or math.isinf(gap):
                    flagged += 1
                    continue
                d = abs(z1 - z2)
                if d == 0:
                    continue
                if lipschitz:
                    rhs = d * max(abs(z1), abs(z2)) ** (F.p - j - 1.0)
                else:
                    rhs = d ** (F.p - j)
                if rhs == 0:
                    continue
                best = max(best, gap / rhs)
            run.append(best)
        sup1, sup2 = run
        sups.append(sup1)
        sups2.append(sup2)
        finite.append(math.isfinite(sup2))
        denom = max(sup1, 1e-300)
        stable.append(math.isfinite(sup2) and abs(sup2 - sup1) / denom < 0.10)
    passed = all(finite) and all(stable)
    return PropertyReport(
        orders=tuple(range(F.k + 1)),
        constants=tuple(sups),
        doubled_constants=tuple(sups2),
        stable=tuple(stable),
        finite=tuple(finite),
        bound_forms=tuple(forms),
        flagged_samples=flagged,
        passed=passed,
    )


def with_measured_constants(F: Nonlinearity, report: PropertyReport) -> Nonlinearity:
    return replace(F, derivative_constants=report.doubled_constants)


# ---------------------------------------------------------------------------
# inequality ratios
# ---------------------------------------------------------------------------

def chainrule_ratio(F: Nonlinearity, f: Field, p: BesovParams, dealias: bool = False) -> float:
    """||F(f)||_{B} / (||f||_inf^{p-1} ||f||_{B}) for the selected Besov
    norm; the composition inequality asserts this is bounded over bounded
    families, with the homogeneity in f cancelling exactly for the
    gauge-invariant power."""
    if not 0 < p.s < min(F.k + 1, F.p):
        raise ValueError(f"smoothness s={p.s} outside (0, min(k+1, p)) for this nonlinearity")
    sup = lebesgue_norm(f, np.inf)
    base = besov_norm(f, p)
    if sup == 0.0 or base == 0.0:
        raise DegenerateInputError("chain-rule ratio needs nonzero sup and Besov norms")
    num = besov_norm(evaluate(F, f, dealias=dealias), p)
    return num / (sup ** (F.p - 1.0) * base)


def leibniz_ratio(f: Field, g: Field, s: float) -> float:
    """||fg||_{H^s-dot} / (||f||_inf ||g||_{H^s-dot} + ||f||_{H^s-dot} ||g||_inf),
    for 0 < s < n/2."""
    n = f.grid.dim
    if not 0 < s < n / 2:
        raise ValueError(f"product rule tested for 0 < s < n/2, got s={s}, n={n}")
    fs, gs = sobolev_norm(f, s, True), sobolev_norm(g, s, True)
    fi, gi = lebesgue_norm(f, np.inf), lebesgue_norm(g, np.inf)
    denom = fi * gs + fs * gi
    if denom == 0.0:
        raise DegenerateInputError("product-rule ratio needs a nonzero denominator")
    prod = f.with_values(f.values * g.values)
    return sobolev_norm(prod, s, True) / denom
