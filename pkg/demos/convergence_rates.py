"""Log-log slope of the Kriging maximum against the fill distance for the
norm kernel (algebraic rate) and the Gaussian (steepening rate)."""
from rbfpower import RadialKernel, convergence_study

levels = [9, 17, 33, 65, 129]
norm = convergence_study(RadialKernel("norm", 1), [(0, 1)], levels, 0.25,
                         samples=50)
print(f"norm: slope {norm.slope:.4f}, predicted {norm.predicted_exponent}")
print(norm.to_csv())

gauss = convergence_study(RadialKernel("gaussian", 1, 1.0), [(0, 1)], levels,
                          0.25, samples=50)
print(f"gaussian: coarse slope {gauss.partial_slope(0, 3):.1f}, "
      f"fine slope {gauss.partial_slope(2, 5):.1f}, "
      f"predicted {gauss.predicted_exponent}")
