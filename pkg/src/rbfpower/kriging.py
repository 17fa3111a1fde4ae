"""Kriging (power) function by equality-constrained quadratic minimization.

For admissible weights ``U`` (``P^T U = S^(mu)(x)``) the objective is::

    U^T A U - 2 U^T R^(mu)(x) + c

with ``c = psi^(2mu)(0)`` ("original") or ``(-1)^|mu| psi^(2mu)(0)``
("corrected").  The two coincide for ``mu = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import _highprec
from .exceptions import (NumericalError, SingularSystemError,
                         UnsupportedOrderError, ValidationError)
from .interpolate import (CONDITION_FAIL, CONDITION_WARN, SaddleSystem,
                          kernel_vector)
from .kernel import (MAX_DERIVATIVE_ORDER, RadialKernel, as_multi_index,
                     doubled, eval_derivative)

__all__ = ["CONVENTIONS", "KrigingProblem", "KrigingValue", "constant_term",
           "form_terms", "quadratic_form", "minimize_kriging",
           "kriging_values"]

CONVENTIONS = ("original", "corrected")
DEFAULT_CONVENTION = "corrected"
FEASIBILITY_TOL = 1e-8
NEGATIVITY_TOL = 1e-9


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValidationError(f"unknown convention {convention!r}; "
                              f"expected one of {CONVENTIONS}")


@dataclass(frozen=True, eq=False)
class KrigingProblem:
    system: SaddleSystem
    x: np.ndarray
    mu: tuple
    convention: str = DEFAULT_CONVENTION

    def __post_init__(self):
        n = self.system.kernel.dim
        object.__setattr__(self, "mu", as_multi_index(self.mu, n))
        object.__setattr__(self, "x",
                           np.asarray(self.x, dtype=float).reshape(n))
        _check_convention(self.convention)
        if 2 * sum(self.mu) > MAX_DERIVATIVE_ORDER:
            raise UnsupportedOrderError(
                f"Kriging for |mu| = {sum(self.mu)} needs derivatives of "
                f"order {2 * sum(self.mu)}")


@dataclass(frozen=True)
class KrigingValue:
    """Minimized form ``kappa_sq``; ``kappa`` is None when it is negative."""
    kappa_sq: float
    kappa: Optional[float]
    minimizer: np.ndarray
    convention: str

    @property
    def defined(self) -> bool:
        return self.kappa is not None


def constant_term(kernel: RadialKernel, mu, convention=DEFAULT_CONVENTION):
    """``psi^(2mu)(0)``, times ``(-1)^|mu|`` for the corrected convention."""
    _check_convention(convention)
    mu = as_multi_index(mu, kernel.dim)
    value = eval_derivative(kernel, doubled(mu), np.zeros(kernel.dim))
    if convention == "corrected" and sum(mu) % 2:
        value = -value
    return float(value)


def form_terms(system: SaddleSystem, U, x, mu):
    """The pieces ``(U^T A U, U^T R^(mu)(x), psi^(2mu)(0))``."""
    mu = as_multi_index(mu, system.kernel.dim)
    U = np.asarray(U, dtype=float).reshape(system.M)
    R, _ = kernel_vector(system, np.reshape(x, (1, -1)), mu)
    uau = float(U @ system.A @ U)
    ur = float(U @ R[0])
    return uau, ur, constant_term(system.kernel, mu, "original")


def quadratic_form(system: SaddleSystem, U, x, mu,
                   convention=DEFAULT_CONVENTION, cross_term=True) -> float:
    """``U^T A U - 2 U^T R^(mu)(x) + constant_term``.

    ``cross_term=False`` drops ``-2 U^T R``, the odd-order variant some
    derivations arrive at.
    """
    _check_convention(convention)
    mu = as_multi_index(mu, system.kernel.dim)
    uau, ur, _ = form_terms(system, U, x, mu)
    c = constant_term(system.kernel, mu, convention)
    return uau - 2.0 * ur + c if cross_term else uau + c


def _scale(system, U):
    phi0 = abs(float(system.kernel.phi(0.0)))
    amax = float(np.abs(system.A).max())
    return max(phi0, amax) * float(U @ U)


def _value(system, U, kappa_sq, convention):
    scale = max(_scale(system, U), 1e-300)
    if kappa_sq >= -NEGATIVITY_TOL * scale:
        kappa = math.sqrt(max(kappa_sq, 0.0))
    else:
        kappa = None
    return KrigingValue(float(kappa_sq), kappa, U, convention)


def _stationarity_matrix(system):
    M, Q = system.M, system.Q
    K = np.zeros((M + Q, M + Q))
    K[:M, :M] = 2.0 * system.A
    K[:M, M:] = system.P
    K[M:, :M] = system.P.T
    return K


def minimize_kriging(problem: KrigingProblem) -> KrigingValue:
    """Minimize the Kriging objective over ``P^T U = S^(mu)(x)``.

    Solved through the stationarity system
    ``[2A, P; P^T, 0] (U, lam) = (2 R^(mu)(x), S^(mu)(x))``.
    """
    return kriging_values(problem.system, problem.x[None, :], problem.mu,
                          problem.convention)[0]


def kriging_values(system: SaddleSystem, points, mu,
                   convention=DEFAULT_CONVENTION, precision=None):
    """Kriging values at many points sharing one factorization.

    ``precision`` is None (float64), a number of mantissa bits, or
    ``"auto"``: float64 when the saddle matrix is well conditioned,
    otherwise extended precision raised until results settle.
    """
    _check_convention(convention)
    n = system.kernel.dim
    mu = as_multi_index(mu, n)
    if 2 * sum(mu) > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"Kriging for |mu| = {sum(mu)} is not supported")
    points = np.asarray(points, dtype=float).reshape(-1, n)
    if precision == "auto":
        precision = None if system.condition <= CONDITION_WARN else "adaptive"
    if precision is not None:
        bits = None if precision == "adaptive" else int(precision)
        vals, kappas, mins, _ = _highprec.kriging_values(
            system, points, mu, convention, bits)
        return [KrigingValue(float(v), None if math.isnan(k) else float(k),
                             u, convention)
                for v, k, u in zip(vals, kappas, mins)]

    cond = system.condition
    if not cond < CONDITION_FAIL:
        raise SingularSystemError(
            f"saddle system condition ~{cond:.3g} is beyond float64; use "
            f"extended precision", condition=cond)
    K = _stationarity_matrix(system)
    R, S = kernel_vector(system, points, mu)
    rhs = np.hstack([2.0 * R, S]).T
    try:
        lu, piv = scipy.linalg.lu_factor(K, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularSystemError(f"stationarity system: {exc}") from exc
    if np.any(np.diag(lu) == 0):
        raise SingularSystemError("stationarity system is singular")
    sol = scipy.linalg.lu_solve((lu, piv), rhs)
    out = []
    for k in range(len(points)):
        U = sol[:system.M, k].copy()
        gap = np.abs(system.P.T @ U - S[k]).max() if system.Q else 0.0
        if gap > FEASIBILITY_TOL * max(1.0, np.abs(S[k]).max(initial=0.0)):
            raise NumericalError(
                f"Kriging minimizer violates the moment constraints by "
                f"{gap:.3g}")
        kappa_sq = quadratic_form(system, U, points[k], mu, convention)
        out.append(_value(system, U, kappa_sq, convention))
    return out
