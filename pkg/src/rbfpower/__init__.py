"""Radial basis function interpolation with Kriging-function error bounds and
a numerical harness for their Fourier-side identities."""
from .bounds import (BoundReport, ConvergenceStudy, bound_check,
                     convergence_study, error_bound)
from .exceptions import (ConditioningWarning, ConvergenceError,
                         ExponentConditionError, NotDominatedError,
                         NumericalError, RBFError, SingularSystemError,
                         SmoothnessError, UnisolvencyError,
                         UnsupportedOrderError, ValidationError)
from .geometry import (CenterSet, PolynomialBasis, basis_dimension,
                       fill_distance, separation_distance, unisolvency_check,
                       uniform_grid)
from .interpolate import (Interpolant, SaddleSystem, assemble, evaluate,
                          lagrange_values, solve_interpolant)
from .kernel import (RadialKernel, eval_derivative, eval_profile,
                     eval_spectrum)
from .kriging import (KrigingProblem, KrigingValue, kriging_values,
                      minimize_kriging, quadratic_form)
from .spectral import (CANDIDATES, IdentityReport, QuadratureGrid,
                       SpectralFunction, adjudicate_identity, cf_norm,
                       error_representation_check, fourier_form,
                       verify_transform_pair)

__version__ = "0.1.0"
