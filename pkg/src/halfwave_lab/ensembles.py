"""Seeded random field families used by every measurement campaign.

Three generators cover the needs of the norm and inequality benches:

- band-limited fields: random complex spectra supported in |k| <= k_cut,
  with k_cut fixed in physical units so that refining the grid samples the
  same underlying function;
- Gaussian bump superpositions, effectively compactly supported, for runs
  that must respect the wrap guard;
- radial profiles for the rotation-symmetric inequalities.

Regeneration is deterministic from (seed, index): member i of an ensemble
never depends on how many members were drawn before it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Field, Grid, lebesgue_norm

__all__ = ["Ensemble", "band_limited_field", "gaussian_bumps_field", "radial_field"]


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def band_limited_field(grid: Grid, seed: int, index: int = 0, k_cut: float | None = None,
                       normalize: bool = True) -> Field:
    """Random complex spectrum on 0 < |k| <= k_cut, zero mean, unit L^2.

    k_cut defaults to half the Nyquist wavenumber of an N-point grid on the
    same box, but may be pinned explicitly so that grids of different N
    carry the same function.
    """
    rng = _rng(seed, index)
    if k_cut is None:
        k_cut = 0.5 * grid.nyquist
    k_abs = grid.wavenumber_magnitude()
    inside = (k_abs > 0) & (k_abs <= k_cut)
    # Draw coefficients in a fixed lattice order (sorted by the integer
    # multi-index) so the same (seed, k_cut) gives the same function on any
    # grid large enough to hold the band.
    idx = np.argwhere(inside)
    k1 = 2.0 * np.pi * np.fft.fftfreq(grid.points_per_axis, d=grid.spacing)
    m_of = np.rint(k1 * grid.half_length / np.pi).astype(int)
    multi = np.stack([m_of[idx[:, d]] for d in range(grid.dim)], axis=1)
    order = np.lexsort(multi.T[::-1])
    coeffs = (rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx)))
    spec = np.zeros(grid.shape, dtype=np.complex128)
    spec[tuple(idx[order].T)] = coeffs
    f = Field.from_spectrum(grid, spec)
    if normalize:
        f = f.with_values(f.values / lebesgue_norm(f, 2))
    return f


def gaussian_bumps_field(grid: Grid, seed: int, index: int = 0, n_bumps: int = 3,
                         support_radius: float | None = None,
                         width_range: tuple = (0.5, 1.5), complex_amplitudes: bool = True,
                         normalize: bool = True) -> Field:
    """Superposition of Gaussian bumps with centers inside |x| <= support_radius."""
    rng = _rng(seed, index)
    if support_radius is None:
        support_radius = 0.25 * grid.half_length
    mesh = grid.meshgrid()
    vals = np.zeros(grid.shape, dtype=np.complex128)
    for _ in range(n_bumps):
        center = rng.uniform(-support_radius, support_radius, size=grid.dim)
        width = rng.uniform(*width_range)
        if complex_amplitudes:
            amp = rng.standard_normal() + 1j * rng.standard_normal()
        else:
            amp = rng.uniform(0.5, 1.5)
        r2 = sum((c - ci) ** 2 for c, ci in zip(mesh, center))
        vals += amp * np.exp(-r2 / (2.0 * width**2))
    f = Field(grid, vals)
    if normalize:
        f = f.with_values(f.values / lebesgue_norm(f, 2))
    return f


def radial_field(grid: Grid, seed: int, index: int = 0, width_range: tuple = (0.6, 2.0),
                 modulated: bool = True, normalize: bool = True) -> Field:
    """Radial profile a * (1 + b r^2) * exp(-r^2 / (2 sigma^2)), real-valued."""
    rng = _rng(seed, index)
    sigma = rng.uniform(*width_range)
    a = rng.uniform(0.5, 1.5)
    b = rng.uniform(-0.3, 0.8) if modulated else 0.0
    r = grid.radii()
    vals = a * (1.0 + b * r**2) * np.exp(-(r**2) / (2.0 * sigma**2))
    f = Field(grid, vals.astype(np.complex128))
    if normalize:
        f = f.with_values(f.values / lebesgue_norm(f, 2))
    return f


_GENERATORS = {
    "band_limited": band_limited_field,
    "gaussian_bumps": gaussian_bumps_field,
    "radial": radial_field,
}


@dataclass(frozen=True)
class Ensemble:
    """A deterministic family of random fields on a fixed grid.

    `kind` selects the generator; `options` are forwarded to it.  Member i
    is reproducible from (seed, i) alone.
    """

    grid: Grid
    seed: int
    count: int
    kind: str = "band_limited"
    options: tuple = ()

    def __post_init__(self):
        if self.kind not in _GENERATORS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {sorted(_GENERATORS)}")
        if self.count < 1:
            raise ValueError("ensemble count must be >= 1")

    def member(self, index: int, grid: Grid | None = None) -> Field:
        """Member `index`, optionally re-sampled on a finer grid."""
        gen = _GENERATORS[self.kind]
        return gen(grid or self.grid, self.seed, index, **dict(self.options))

    def __iter__(self):
        for i in range(self.count):
            yield self.member(i)
