"""Pointwise bound |s - f| <= kappa * c_f for a function in the native space
of the Gaussian, checked in extended precision."""
import numpy as np

from rbfpower import (RadialKernel, SpectralFunction, bound_check, cf_norm,
                      uniform_grid)

kernel = RadialKernel("gaussian", 1, 1.0)
centers = uniform_grid([(0, 1)], 10)
f = SpectralFunction.kernel_span(kernel, [0.15, 0.5, 0.85], [1.0, -0.7, 0.4])
print(f"c_f = {cf_norm(f, kernel):.12g}")

samples = np.random.default_rng(0).uniform(0, 1, 1000)
report = bound_check(kernel, centers, f, samples)
tight = np.argmin(report.margin)
print(f"{report.violations} violations over {len(samples)} samples "
      f"({report.bits} bits)")
print(f"tightest sample x={report.points[tight, 0]:.4f}: "
      f"|s - f| = {report.lhs[tight]:.3e}, bound {report.rhs[tight]:.3e}")
