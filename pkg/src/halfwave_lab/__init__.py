"""halfwave_lab: a pseudospectral laboratory for the nonlinear half-wave
equation i du/dt - sqrt(-Laplacian) u = F(u) on periodic boxes.

Subpackage map:

- `spectral`: grids, fields, Fourier-multiplier operators, L^q norms.
- `besov`: dyadic (Littlewood-Paley) projections, Besov/Sobolev norms, and
  their finite-difference characterization.
- `ensembles`: seeded random field families for all measurement campaigns.
- `nonlinear`: the nonlinearity catalog, regularity checker, and the
  composition/product inequality ratios.
- `solver`: split-step and Duhamel/Picard time integration with monitors,
  blow-up detection, and a scattering decay check.
- `estimates`: dispersive, weighted local-energy, Muckenhoupt, radial
  Sobolev, and weighted composition-rule benches.
- `blowup`: second-order wave reduction, exponential test function,
  concavity-type functionals, and the lifespan scanner.
- `report`, `cli`: reproducible run bundles (CSV + JSON + figures) behind a
  single command-line entry point.
"""

__version__ = "0.1.0"
