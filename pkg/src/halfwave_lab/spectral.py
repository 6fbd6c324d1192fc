"""Periodic grids, complex fields, and Fourier-multiplier operators.

Everything downstream builds on three objects defined here:

- `Grid`: a periodic box [-L, L)^n sampled on N points per axis, together
  with its discrete frequency lattice k = (pi/L) * m, m in {-N/2, ..., N/2-1}.
- `Field`: immutable complex samples on a Grid, optionally time-tagged.
- `Multiplier`: a function of the frequency lattice applied through the FFT.

The operators of interest are all Fourier multipliers: the half-Laplacian
powers D^s = (-Laplacian)^{s/2} with symbol |k|^s, the free propagator
U(t) = exp(-i t D), the Riesz transforms R_j with symbol i k_j / |k|, and
plain partial derivatives i k_j.  The zero mode is mapped to 0 under every
homogeneous symbol of positive order (the grid mean stands in for the
low-frequency part that the whole-space theory excludes).

All norms are double precision; L^q norms are plain Riemann sums, which on
a periodic lattice coincide with the trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

__all__ = [
    "Grid",
    "Field",
    "Multiplier",
    "SpectralError",
    "fractional_derivative",
    "propagate",
    "riesz_transform",
    "partial_derivative",
    "lebesgue_norm",
    "spectral_l2_norm",
    "dealias",
    "mean_value",
    "remove_mean",
]

_GRID_CACHE_ATTRS = ("_k_axes", "_k_abs", "_radii", "_dealias_mask")


class SpectralError(ValueError):
    """Invalid request to a spectral operator (bad exponent, axis, input)."""


@dataclass(frozen=True)
class Grid:
    """Periodic box [-L, L)^n with N samples per axis and its dual lattice.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1, 2 or 3.
    half_length : float
        L > 0; the box is [-L, L) along each axis.
    points_per_axis : int
        Even N >= 8.

    The frequency lattice is k = (pi / L) * m with integer m running over
    {-N/2, ..., N/2 - 1} per axis, stored in FFT layout so that the
    round-trip fftn/ifftn is the identity to machine precision.
    """

    dim: int
    half_length: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise SpectralError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.half_length > 0:
            raise SpectralError(f"half_length must be positive, got {self.half_length}")
        n = self.points_per_axis
        if n < 8 or n % 2 != 0:
            raise SpectralError(f"points_per_axis must be even and >= 8, got {n}")

    # -- geometry -----------------------------------------------------------

    @property
    def spacing(self) -> float:
        """Sample spacing h = 2L / N."""
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def num_points(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis_coordinates(self) -> np.ndarray:
        """Sample coordinates -L + i*h along one axis."""
        n = self.points_per_axis
        return -self.half_length + self.spacing * np.arange(n)

    def meshgrid(self) -> list:
        """Coordinate arrays of shape `self.shape`, one per axis."""
        x = self.axis_coordinates()
        return list(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def radii(self) -> np.ndarray:
        """|x| at every sample point."""
        cached = _cache(self).get("_radii")
        if cached is None:
            mesh = self.meshgrid()
            cached = np.sqrt(sum(c**2 for c in mesh))
            _cache(self)["_radii"] = cached
            cached.setflags(write=False)
        return cached

    # -- frequency lattice --------------------------------------------------

    def wavenumbers(self) -> list:
        """Angular wavenumber arrays k_j (FFT layout), one per axis, shape `shape`."""
        cached = _cache(self).get("_k_axes")
        if cached is None:
            k1d = 2.0 * np.pi * scipy.fft.fftfreq(self.points_per_axis, d=self.spacing)
            cached = list(np.meshgrid(*([k1d] * self.dim), indexing="ij"))
            for arr in cached:
                arr.setflags(write=False)
            _cache(self)["_k_axes"] = cached
        return cached

    def wavenumber_magnitude(self) -> np.ndarray:
        """|k| on the lattice (FFT layout)."""
        cached = _cache(self).get("_k_abs")
        if cached is None:
            cached = np.sqrt(sum(k**2 for k in self.wavenumbers()))
            cached.setflags(write=False)
            _cache(self)["_k_abs"] = cached
        return cached

    @property
    def nyquist(self) -> float:
        """Largest representable axis wavenumber pi*N / (2L)."""
        return np.pi * self.points_per_axis / (2.0 * self.half_length)

    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask: True where every |k_j| <= (2/3) * nyquist."""
        cached = _cache(self).get("_dealias_mask")
        if cached is None:
            cut = (2.0 / 3.0) * self.nyquist
            cached = np.ones(self.shape, dtype=bool)
            for k in self.wavenumbers():
                cached &= np.abs(k) <= cut
            cached.setflags(write=False)
            _cache(self)["_dealias_mask"] = cached
        return cached


_grid_caches: dict = {}


def _cache(grid: Grid) -> dict:
    # keyed by value so equal grids share lattice arrays
    key = (grid.dim, grid.half_length, grid.points_per_axis)
    return _grid_caches.setdefault(key, {})


@dataclass(frozen=True)
class Field:
    """Complex samples on a Grid; immutable once constructed.

    `values` has shape grid.shape (row-major axis order).  Non-finite
    entries are rejected.  `time_tag` is an optional simulation time in
    seconds carried along for bookkeeping.
    """

    grid: Grid
    values: np.ndarray
    time_tag: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            if vals.size == self.grid.num_points:
                vals = vals.reshape(self.grid.shape)
            else:
                raise SpectralError(
                    f"values shape {vals.shape} incompatible with grid shape {self.grid.shape}"
                )
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise SpectralError("field values must be finite (NaN/Inf rejected)")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray, time_tag=None) -> "Field":
        """New field on the same grid."""
        return Field(self.grid, values, self.time_tag if time_tag is None else time_tag)

    def spectrum(self) -> np.ndarray:
        """Forward FFT of the samples (unnormalized, FFT layout)."""
        return scipy.fft.fftn(self.values)

    @staticmethod
    def from_spectrum(grid: Grid, spectrum: np.ndarray, time_tag=None) -> "Field":
        return Field(grid, scipy.fft.ifftn(spectrum), time_tag)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class Multiplier:
    """A Fourier multiplier: symbol on the nonzero lattice plus an explicit
    zero-mode value.

    `symbol` maps the wavenumber arrays (k_1, ..., k_n) to a complex array;
    it is only ever evaluated on the lattice.  The zero-mode convention is
    stored separately so that homogeneous symbols like |k|^s need no special
    casing at k = 0.
    """

    symbol: object  # callable (k_axes, k_abs) -> ndarray
    zero_mode_value: complex = 0.0

    def table(self, grid: Grid) -> np.ndarray:
        """Symbol evaluated on the full lattice, zero mode patched."""
        k_axes = grid.wavenumbers()
        k_abs = grid.wavenumber_magnitude()
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.asarray(self.symbol(k_axes, k_abs), dtype=np.complex128)
        if values.shape != grid.shape:
            values = np.broadcast_to(values, grid.shape).copy()
        else:
            values = values.copy()
        values[(0,) * grid.dim] = self.zero_mode_value
        if not np.all(np.isfinite(values.view(np.float64))):
            raise SpectralError("multiplier symbol is non-finite on the lattice")
        return values

    def apply(self, f: Field, time_tag=None) -> Field:
        spec = f.spectrum()
        spec *= self.table(f.grid)
        return Field.from_spectrum(f.grid, spec, f.time_tag if time_tag is None else time_tag)


def apply_symbol_table(f: Field, table: np.ndarray, time_tag=None) -> Field:
    """Apply a precomputed symbol table (hot loops cache these)."""
    spec = f.spectrum()
    spec *= table
    return Field.from_spectrum(f.grid, spec, f.time_tag if time_tag is None else time_tag)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def fractional_derivative(f: Field, s: float) -> Field:
    """D^s f, the multiplier |k|^s; s = 0 is the identity.

    The zero mode is annihilated for s > 0 and kept for s = 0.  Negative
    orders are not supported.
    """
    if s < 0:
        raise SpectralError(f"fractional derivative needs s >= 0, got s={s}")
    if s == 0:
        return f.with_values(f.values)
    mult = Multiplier(lambda k_axes, k_abs: k_abs**s, zero_mode_value=0.0)
    return mult.apply(f)


def propagate(f: Field, t: float) -> Field:
    """U(t) f = exp(-i t D) f; unitary on L^2 for every real t."""
    if not math.isfinite(t):
        raise SpectralError(f"propagation time must be finite, got {t}")
    mult = Multiplier(lambda k_axes, k_abs: np.exp(-1j * t * k_abs), zero_mode_value=1.0)
    new_tag = None if f.time_tag is None else f.time_tag + t
    return mult.apply(f, time_tag=new_tag)


def propagator_table(grid: Grid, t: float) -> np.ndarray:
    """Precomputed symbol of U(t) for repeated stepping."""
    return Multiplier(lambda k_axes, k_abs: np.exp(-1j * t * k_abs), zero_mode_value=1.0).table(grid)


def riesz_transform(f: Field, j: int) -> Field:
    """R_j f, the multiplier i k_j / |k| with the zero mode sent to 0.

    The axis index follows the analytic convention j = 1, ..., n.
    """
    n = f.grid.dim
    if not 1 <= j <= n:
        raise IndexError(f"axis index must satisfy 1 <= j <= {n}, got {j}")
    mult = Multiplier(
        lambda k_axes, k_abs: 1j * k_axes[j - 1] / k_abs, zero_mode_value=0.0
    )
    return mult.apply(f)


def partial_derivative(f: Field, j: int) -> Field:
    """d/dx_j via the multiplier i k_j (axis convention as `riesz_transform`)."""
    n = f.grid.dim
    if not 1 <= j <= n:
        raise IndexError(f"axis index must satisfy 1 <= j <= {n}, got {j}")
    mult = Multiplier(lambda k_axes, k_abs: 1j * k_axes[j - 1], zero_mode_value=0.0)
    return mult.apply(f)


def lebesgue_norm(f: Field, q) -> float:
    """L^q norm of the samples: (h^n sum |f|^q)^(1/q); q = inf is max |f|.

    The Riemann sum is exact quadrature for trigonometric polynomials of
    degree below Nyquist, and agrees with the Parseval value at q = 2.
    """
    if q != np.inf and q < 1:
        raise SpectralError(f"Lebesgue exponent must satisfy q >= 1, got {q}")
    a = np.abs(f.values)
    if q == np.inf:
        return float(a.max())
    vol = f.grid.cell_volume
    if q == 2:
        return float(np.sqrt(vol * np.sum(a * a)))
    return float((vol * np.sum(a**q)) ** (1.0 / q))


def spectral_l2_norm(f: Field) -> float:
    """L^2 norm computed from the spectrum (Parseval cross-check path)."""
    spec = f.spectrum()
    vol = f.grid.cell_volume / f.grid.num_points
    return float(np.sqrt(vol * np.sum(np.abs(spec) ** 2)))


def mean_value(f: Field) -> complex:
    return complex(np.mean(f.values))


def remove_mean(f: Field) -> Field:
    return f.with_values(f.values - np.mean(f.values))


def dealias(f: Field) -> Field:
    """Zero every mode with |k_j| beyond two thirds of Nyquist (2/3 rule)."""
    spec = f.spectrum()
    spec[~f.grid.dealias_mask()] = 0.0
    return Field.from_spectrum(f.grid, spec, f.time_tag)
