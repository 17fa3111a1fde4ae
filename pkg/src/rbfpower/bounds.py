"""Pointwise error bounds ``|s - f| <= kappa * c_f`` and convergence studies
of the Kriging function against the predicted exponent ``s_inf/2 - |mu|``."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _highprec
from .exceptions import (ExponentConditionError, NumericalError, RBFError,
                         ValidationError)
from .geometry import (CenterSet, PolynomialBasis, fill_distance,
                       uniform_grid)
from .interpolate import CONDITION_WARN, assemble, solve_interpolant
from .kernel import RadialKernel, as_multi_index, check_exponent_conditions
from .kriging import DEFAULT_CONVENTION, KrigingValue, kriging_values
from .spectral import QuadratureGrid, SpectralFunction, cf_norm

__all__ = ["error_bound", "bound_check", "BoundReport", "convergence_study",
           "ConvergenceStudy", "kronecker_samples", "UNBOUNDED_MARKER"]

BOUND_RTOL = 1e-6
BOUND_ATOL = 1e-10
SLOPE_WINDOW = 0.15
MIN_LEVELS = 4
UNBOUNDED_MARKER = "unbounded"
# golden ratio and plastic number conjugates: additive recurrences with low
# discrepancy that avoid the dyadic points of uniform center grids
_KRONECKER = {1: (0.6180339887498949,),
              2: (0.7548776662466927, 0.5698402909980532)}


def error_bound(kappa, cf: float) -> float:
    """``kappa * c_f``; ``kappa`` is a KrigingValue or a nonnegative number."""
    if isinstance(kappa, KrigingValue):
        if not kappa.defined:
            raise ValidationError(
                f"Kriging value is undefined (negative form "
                f"{kappa.kappa_sq:.3g})")
        kappa = kappa.kappa
    if kappa is None or not kappa >= 0:
        raise ValidationError("kappa must be a nonnegative number")
    if not cf >= 0:
        raise ValidationError("c_f must be nonnegative")
    return float(kappa) * float(cf)


def _fmt(v):
    return repr(float(v))


@dataclass
class BoundReport:
    points: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    cf: float
    bits: Optional[int] = None

    @property
    def margin(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def violated(self) -> np.ndarray:
        return self.lhs > self.rhs * (1 + BOUND_RTOL) + BOUND_ATOL

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.violated))

    def to_csv(self) -> str:
        n = self.points.shape[1]
        names = ["x"] if n == 1 else [f"x{k + 1}" for k in range(n)]
        out = io.StringIO()
        out.write(",".join(names + ["lhs", "rhs", "margin"]) + "\n")
        for p, l, r, m in zip(self.points, self.lhs, self.rhs, self.margin):
            out.write(",".join([_fmt(c) for c in p]
                               + [_fmt(l), _fmt(r), _fmt(m)]) + "\n")
        return out.getvalue()


def bound_check(kernel: RadialKernel, centers: CenterSet, f: SpectralFunction,
                samples, grid: Optional[QuadratureGrid] = None,
                precision="auto", q=None, workers=1) -> BoundReport:
    """Compare ``|s(x) - f(x)|`` with ``kappa(x) * c_f`` at each sample.

    Ill-conditioned systems (condition above 1e12) are solved in extended
    precision unless ``precision`` is None; ``f`` then needs an mpfr
    evaluator (kernel spans and explicit gaussians have one).
    """
    n = kernel.dim
    samples = np.asarray(samples, dtype=float).reshape(-1, n)
    system = assemble(kernel, centers, _basis(kernel, q))
    cf = cf_norm(f, kernel, grid, workers=workers)
    values = f(centers.points)
    use_mp = precision not in (None, "double") and (
        precision != "auto" or system.condition > CONDITION_WARN)
    bits = None
    if use_mp:
        fixed = None if precision in ("auto", "adaptive") else int(precision)
        errs, bits = _highprec.interpolation_errors(
            system, f.mp_value, samples, f.mp_value, fixed)
        _, kappas, _, _ = _highprec.kriging_values(
            system, samples, (0,) * n, DEFAULT_CONVENTION, fixed)
    else:
        interp = solve_interpolant(system, values)
        errs = interp(samples) - f(samples)
        kappas = np.array([np.nan if v.kappa is None else v.kappa
                           for v in kriging_values(system, samples, 0)])
    if np.any(np.isnan(kappas)):
        bad = int(np.flatnonzero(np.isnan(kappas))[0])
        raise NumericalError(f"Kriging value undefined at sample {bad}")
    lhs = np.abs(np.asarray(errs, dtype=float)).reshape(-1)
    return BoundReport(samples, lhs, kappas * cf, cf, bits)


def _basis(kernel, q):
    return None if q is None else PolynomialBasis(int(q), kernel.dim)


def kronecker_samples(box, count, rho=0.0) -> np.ndarray:
    """``count`` additive-recurrence points in ``box`` shrunk by ``rho``."""
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    n = len(box)
    if n not in _KRONECKER:
        raise ValidationError("sampling is implemented for n <= 2")
    lo, hi = box[:, 0] + rho, box[:, 1] - rho
    if np.any(hi <= lo):
        raise ValidationError(f"box is empty after shrinking by rho={rho}")
    k = np.arange(1, int(count) + 1)[:, None]
    frac = np.mod(0.5 + k * np.array(_KRONECKER[n])[None, :], 1.0)
    return lo + (hi - lo) * frac


@dataclass
class ConvergenceStudy:
    kernel: RadialKernel
    box: np.ndarray
    levels: list
    rho: float
    mu: tuple
    samples: int
    M: list = field(default_factory=list)
    h: list = field(default_factory=list)
    kappa_max: list = field(default_factory=list)
    slope: float = math.nan
    intercept: float = math.nan

    @property
    def predicted_exponent(self):
        s_inf = self.kernel.spectrum.s_inf
        if not math.isfinite(s_inf):
            return UNBOUNDED_MARKER
        return s_inf / 2 - sum(self.mu)

    @property
    def within_window(self) -> Optional[bool]:
        p = self.predicted_exponent
        if p == UNBOUNDED_MARKER:
            return None
        return abs(self.slope - p) <= SLOPE_WINDOW

    def partial_slope(self, start, stop):
        """Least-squares slope over levels ``start:stop``."""
        lh = np.log(self.h[start:stop])
        lk = np.log(self.kappa_max[start:stop])
        return float(np.polyfit(lh, lk, 1)[0])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("level,M,h,kappa_max,log_h,log_kappa\n")
        for k, (m, h, kap) in enumerate(zip(self.M, self.h, self.kappa_max)):
            out.write(",".join([str(k), str(m), _fmt(h), _fmt(kap),
                                _fmt(math.log(h)), _fmt(math.log(kap))])
                      + "\n")
        return out.getvalue()

    def plot_data(self) -> str:
        return "".join(f"{_fmt(math.log(h))} {_fmt(math.log(k))}\n"
                       for h, k in zip(self.h, self.kappa_max))

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "predicted_exponent": self.predicted_exponent,
                "window": SLOPE_WINDOW,
                "within_window": self.within_window,
                "levels": list(self.levels), "rho": self.rho,
                "mu": list(self.mu), "samples": self.samples}


def _level(kernel, box, count, samples, rho, mu, convention, precision,
           resolution, q):
    centers = uniform_grid(box, count)
    system = assemble(kernel, centers, _basis(kernel, q))
    vals = kriging_values(system, samples, mu, convention, precision)
    undefined = [k for k, v in enumerate(vals) if not v.defined]
    if undefined:
        raise NumericalError(
            f"Kriging value negative at {len(undefined)} samples")
    kappa = max(v.kappa for v in vals)
    spacing = float(np.min((box[:, 1] - box[:, 0]) / (count - 1)))
    res = resolution or int(min(16 * 2 * rho / spacing + 1,
                                4097 if kernel.dim == 1 else 257))
    res = max(res, 9)
    h = max(fill_distance(centers, x, rho, res) for x in samples)
    return len(centers), h, kappa


def convergence_study(kernel: RadialKernel, box, levels, rho, mu=None,
                      samples=64, convention=DEFAULT_CONVENTION,
                      precision="auto", resolution=None, q=None,
                      workers=1) -> ConvergenceStudy:
    """Kriging maxima on nested uniform grids and the fitted log-log slope.

    ``levels`` are center counts per axis.  ``kappa_max`` is the maximum
    over ``samples`` low-discrepancy points of the box shrunk by ``rho``;
    ``h`` is the largest grid-sampled fill distance ``h_rho`` over the
    same points.
    """
    n = kernel.dim
    mu = (0,) * n if mu is None else as_multi_index(mu, n)
    box = np.asarray(box, dtype=float).reshape(n, 2)
    levels = [int(c) for c in levels]
    if len(levels) < MIN_LEVELS:
        raise ValidationError(f"a convergence study needs at least "
                              f"{MIN_LEVELS} levels, got {len(levels)}")
    if any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 2:
        raise ValidationError("levels must be strictly increasing and >= 2")
    if not rho > 0:
        raise ValidationError("rho must be positive")
    if not check_exponent_conditions(kernel, mu):
        spec = kernel.spectrum
        raise ExponentConditionError(
            f"decay exponents s0={spec.s0}, s_inf={spec.s_inf} violate "
            f"2|mu| < s_inf or s0 < 2q for mu={mu}")
    pts = kronecker_samples(box, samples, rho)

    def run(index):
        try:
            return _level(kernel, box, levels[index], pts, rho, mu,
                          convention, precision, resolution, q)
        except RBFError as exc:
            raise type(exc)(f"level {index} (count {levels[index]}): "
                            f"{exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(run, range(len(levels))))
    else:
        rows = [run(k) for k in range(len(levels))]
    study = ConvergenceStudy(kernel, box, levels, float(rho), mu,
                             int(samples))
    study.M = [r[0] for r in rows]
    study.h = [r[1] for r in rows]
    study.kappa_max = [r[2] for r in rows]
    if min(study.kappa_max) <= 0:
        raise NumericalError("kappa_max vanished; the slope is undefined")
    slope, intercept = np.polyfit(np.log(study.h), np.log(study.kappa_max), 1)
    study.slope, study.intercept = float(slope), float(intercept)
    return study
