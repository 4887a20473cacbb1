"""
Correlated yield-stress fields
==============================

A Gaussian field with triangular spectrum is synthesized on a periodic
64 x 64 lattice, pushed through a log-normal transform and averaged onto
the meso-scale points of one unit fiber.  Shorter correlation lengths give
finer fiber meshes.
"""

import numpy as np

from stochfiber import FieldSpec, MarginalSpec, generate_gaussian_field
from stochfiber.random_field import lognormal_transform
from stochfiber.random_field import autocorrelation, fiber_yields, generate_gaussian_fields

spec = FieldSpec(lc=0.1, N=10, M=64)
grid = generate_gaussian_field(spec, seed=0)
print(f"lattice {spec.M}x{spec.M}, period {spec.L0:g} m, spacing {spec.dx:.4g} m")
print(f"one realization: mean {grid.values.mean():+.2e}, variance {grid.values.var():.3f}")

# ensemble statistics converge to a zero mean and the sinc^2 correlation
g = generate_gaussian_fields(spec, seed=0, count=500)
print(f"ensemble variance at one point: {g[:, 10, 20].var():.3f} (discrete target 0.99)")
for h in range(0, 7, 2):
    c = np.mean(g * np.roll(g, -h, axis=2)) / np.mean(g**2)
    print(f"  lag {h * spec.dx:.4f} m: sample correlation {c:.3f}, "
          f"target {float(autocorrelation(h * spec.dx, 0.0, spec.ku)):.3f}")

concrete = MarginalSpec(m=30.5e6, s=0.943 * 30.5e6)
yields = lognormal_transform(grid, concrete).values
print(f"yield stress over the lattice: median {np.median(yields) / 1e6:.1f} MPa, "
      f"mean {yields.mean() / 1e6:.1f} MPa")

for lc in (0.1, 0.2, 0.4):
    y = fiber_yields(lc, concrete, seed=0)
    print(f"lc/d = {lc}: {y.shape[0]}x{y.shape[1]} meso points per fiber, "
          f"fiber mean {y.mean() / 1e6:.1f} MPa")
