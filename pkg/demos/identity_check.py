"""Compare the Fourier form of the Kriging objective with candidate closed
forms for a first derivative of a Gaussian interpolant."""
import numpy as np

from rbfpower import (CenterSet, RadialKernel, adjudicate_identity, assemble,
                      lagrange_values)

kernel = RadialKernel("gaussian", 1, 1.0)
centers = CenterSet(np.array([0.3, 1.9, 3.4, 5.2, 7.6]))
x = 2.6
U = lagrange_values(assemble(kernel, centers), x, (1,))

report = adjudicate_identity(kernel, centers, U, x, (1,))
print(f"quadrature value {report.I:.12g} (error proxy "
      f"{report.refinement_delta:.2e})")
for name, cand in report.to_dict()["candidates"].items():
    print(f"  {name:22s} {cand['value']:+.12g}  deviation {cand['abs_dev']:.2e}")
print("verdict:", report.verdict)
