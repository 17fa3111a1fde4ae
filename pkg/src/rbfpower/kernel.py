"""Radial kernels, their derivatives and their (generalized) Fourier spectra.

Kernels are stored with a sign normalization that makes the Gram quadratic
form nonnegative on weight vectors annihilating ``P_q``::

    gaussian            exp(-beta r^2)       q = 0
    multiquadric        -sqrt(c^2 + r^2)     q = 1
    norm                -r                   q = 1
    thin_plate_spline   r^2 log r            q = 2   (n = 2 only)

Fourier convention: ``psi(y) = (2 pi)^-n  int exp(i<y,t>) psihat(t) dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import (SmoothnessError, UnsupportedOrderError,
                         ValidationError)

__all__ = [
    "FAMILIES", "MAX_DERIVATIVE_ORDER", "UNBOUNDED",
    "RadialKernel", "SpectrumDescriptor",
    "as_multi_index", "eval_profile", "eval_derivative", "eval_spectrum",
    "check_exponent_conditions",
]

FAMILIES = ("gaussian", "multiquadric", "norm", "thin_plate_spline")
CPD_ORDER = {"gaussian": 0, "multiquadric": 1, "norm": 1,
             "thin_plate_spline": 2}
MAX_DERIVATIVE_ORDER = 2
#: sentinel for an unbounded decay exponent (gaussian s_inf)
UNBOUNDED = math.inf

# generalized Fourier transform of r^2 log r in R^2 is 8 pi |t|^-4
TPS_SPECTRUM_CONSTANT = 8.0 * math.pi
NORM_SPECTRUM_CONSTANT = 2.0


def as_multi_index(mu, dim: int) -> tuple:
    """Validate ``mu`` as a multi-index of length ``dim``.

    Integers are accepted for ``dim == 1``; ``0`` means the zero index in
    any dimension.
    """
    if np.isscalar(mu):
        mu = (0,) * dim if mu == 0 else (mu,)
    mu = tuple(int(m) for m in mu)
    if len(mu) != dim:
        raise ValidationError(
            f"multi-index {mu} has length {len(mu)}, expected {dim}")
    if any(m < 0 for m in mu):
        raise ValidationError(f"multi-index {mu} has negative components")
    return mu


@dataclass(frozen=True)
class SpectrumDescriptor:
    """Decay data of ``psihat``: ``psihat(t) <= c |t|^(-n-s)``.

    ``s0`` governs ``t -> 0`` and ``s_inf`` governs ``t -> infinity``;
    ``s_inf = UNBOUNDED`` means faster than any power.
    """
    has_closed_form: bool
    c: Optional[float]
    s0: float
    s_inf: float
    singular_at_origin: bool
    evaluator: Optional[Callable] = None

    def __call__(self, t):
        if self.evaluator is None:
            raise ValidationError("no closed-form spectrum for this kernel")
        return self.evaluator(t)


@dataclass(frozen=True)
class RadialKernel:
    """Radial basis kernel ``psi(x) = phi(|x|)``.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    dim : int
        Spatial dimension n.
    shape : float
        ``beta`` for the gaussian, ``c`` for the multiquadric; ignored for
        the norm kernel and the thin-plate spline.
    """
    family: str
    dim: int = 1
    shape: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(
                f"unknown kernel family {self.family!r}; "
                f"expected one of {FAMILIES}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError(f"dimension must be a positive integer, "
                                  f"got {self.dim}")
        if self.family in ("gaussian", "multiquadric"):
            if not (self.shape > 0 and math.isfinite(self.shape)):
                raise ValidationError(
                    f"shape parameter must be positive, got {self.shape}")
        if self.family == "thin_plate_spline" and self.dim != 2:
            raise ValidationError("thin-plate spline is defined for n = 2")

    @property
    def cpd_order(self) -> int:
        return CPD_ORDER[self.family]

    @property
    def spectrum(self) -> SpectrumDescriptor:
        n = self.dim
        if self.family == "gaussian":
            beta = self.shape
            scale = (math.pi / beta) ** (n / 2)

            def gaussian_hat(t):
                t2 = _sqnorm(t, n)
                return scale * np.exp(-t2 / (4.0 * beta))

            return SpectrumDescriptor(True, scale, -float(n), UNBOUNDED,
                                      False, gaussian_hat)
        if self.family == "multiquadric":
            return SpectrumDescriptor(False, None, 1.0, UNBOUNDED, True)
        if self.family == "norm":
            if n != 1:
                return SpectrumDescriptor(False, None, 1.0, 1.0, True)

            def norm_hat(t):
                return NORM_SPECTRUM_CONSTANT / _sqnorm(t, n)

            return SpectrumDescriptor(True, NORM_SPECTRUM_CONSTANT, 1.0, 1.0,
                                      True, norm_hat)

        def tps_hat(t):
            return TPS_SPECTRUM_CONSTANT / _sqnorm(t, n) ** 2

        return SpectrumDescriptor(True, TPS_SPECTRUM_CONSTANT, 2.0, 2.0,
                                  True, tps_hat)

    def phi(self, r):
        """Radial profile, vectorized over ``r >= 0``."""
        r = np.asarray(r, dtype=float)
        return self.radial_terms(r * r, order=0)[0]

    def radial_terms(self, s, order: int = 2):
        """``F(s), F'(s), F''(s)`` with ``phi(r) = F(r^2)``.

        Only the first ``order + 1`` terms are computed; the rest are None.
        Singular values at ``s = 0`` come out as inf/nan and must be
        screened by the caller.
        """
        s = np.asarray(s, dtype=float)
        fam, a = self.family, self.shape
        out = [None, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam == "gaussian":
                e = np.exp(-a * s)
                out = [e, -a * e, a * a * e]
            elif fam == "multiquadric":
                w = a * a + s
                out = [-np.sqrt(w), -0.5 / np.sqrt(w), 0.25 * w ** -1.5]
            elif fam == "norm":
                root = np.sqrt(s)
                out = [-root, -0.5 / root, 0.25 / (s * root)]
            else:
                logs = np.log(s)
                f0 = np.where(s > 0, 0.5 * s * logs, 0.0)
                out = [f0, 0.5 * (logs + 1.0), 0.5 / s]
        return out[:order + 1] + [None] * (2 - order)


def _sqnorm(t, n):
    t = np.asarray(t, dtype=float)
    if n == 1 and (t.ndim == 0 or t.shape[-1] != 1):
        return t * t
    return np.sum(t * t, axis=-1)


def eval_profile(kernel: RadialKernel, r):
    """``phi(r)`` under the stored sign normalization."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValidationError("radius must be nonnegative")
    out = kernel.phi(r)
    return float(out) if out.ndim == 0 else out


def _points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 and dim == 1:
        x = x.reshape(1)
    if x.shape[-1] != dim:
        raise ValidationError(
            f"point dimension {x.shape[-1]} does not match kernel "
            f"dimension {dim}")
    return x


def eval_derivative(kernel: RadialKernel, mu, x):
    """Classical partial derivative ``D^mu psi(x)`` for ``|mu| <= 2``.

    ``x`` is a point of shape ``(n,)`` or a stack of shape ``(K, n)``.
    """
    mu = as_multi_index(mu, kernel.dim)
    order = sum(mu)
    if order > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}")
    x = _points(x, kernel.dim)
    s = np.sum(x * x, axis=-1)
    if order > 0 and kernel.family in ("norm", "thin_plate_spline"):
        if np.any(s == 0):
            raise SmoothnessError(
                f"{kernel.family} kernel is not differentiable at the origin")
    terms = kernel.radial_terms(s, order=order)
    if order == 0:
        out = terms[0]
    elif order == 1:
        i = mu.index(1)
        out = 2.0 * x[..., i] * terms[1]
    else:
        nz = [k for k, m in enumerate(mu) if m]
        if len(nz) == 1:
            i = nz[0]
            # x_i^2 F'' vanishes at 0, guard the 0 * inf of singular kernels
            xi2 = x[..., i] ** 2
            out = 2.0 * terms[1] + 4.0 * np.where(xi2 > 0, xi2 * terms[2], 0.0)
        else:
            i, j = nz
            xij = x[..., i] * x[..., j]
            out = 4.0 * np.where(xij != 0, xij * terms[2], 0.0)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def eval_spectrum(kernel: RadialKernel, t):
    """Closed-form ``psihat(t)``; ``t`` of shape ``(n,)`` or ``(K, n)``."""
    spec = kernel.spectrum
    if not spec.has_closed_form:
        raise ValidationError(
            f"{kernel.family} kernel (n={kernel.dim}) has no closed-form "
            f"spectrum")
    t = _points(t, kernel.dim)
    if spec.singular_at_origin and np.any(np.sum(t * t, axis=-1) == 0):
        raise ValidationError("spectrum is singular at t = 0")
    out = np.asarray(spec(t), dtype=float)
    return float(out) if out.ndim == 0 else out


def check_exponent_conditions(kernel: RadialKernel, mu) -> bool:
    """True iff ``2|mu| < s_inf`` and ``s0 < 2q``."""
    mu = as_multi_index(mu, kernel.dim)
    spec = kernel.spectrum
    return 2 * sum(mu) < spec.s_inf and spec.s0 < 2 * kernel.cpd_order


def doubled(mu: Sequence[int]) -> tuple:
    return tuple(2 * m for m in mu)
