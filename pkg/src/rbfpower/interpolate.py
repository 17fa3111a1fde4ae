"""Saddle-point interpolation system, interpolant evaluation, Lagrange values.

The system is::

    [ A   P ] [a]   [f]
    [ P^T 0 ] [b] = [0]

with ``A_ij = phi(|x_i - x_j|)`` and ``P_ij = p_j(x_i)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.linalg import lapack
from scipy.spatial.distance import cdist

from .exceptions import (ConditioningWarning, SingularSystemError,
                         UnisolvencyError, ValidationError)
from .geometry import (CenterSet, PolynomialBasis, separation_distance,
                       unisolvency_check)
from .kernel import RadialKernel, as_multi_index, eval_derivative

__all__ = ["SaddleSystem", "Interpolant", "assemble", "solve_interpolant",
           "evaluate", "lagrange_values", "kernel_vector"]

CONDITION_WARN = 1e12
# beyond 1/eps the factorization carries no significant digits
CONDITION_FAIL = 1.0 / np.finfo(float).eps
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class SaddleSystem:
    kernel: RadialKernel
    centers: CenterSet
    basis: PolynomialBasis
    A: np.ndarray
    P: np.ndarray

    @property
    def M(self) -> int:
        return self.A.shape[0]

    @property
    def Q(self) -> int:
        return self.P.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        M, Q = self.M, self.Q
        K = np.zeros((M + Q, M + Q))
        K[:M, :M] = self.A
        K[:M, M:] = self.P
        K[M:, :M] = self.P.T
        return K

    @cached_property
    def condition(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @cached_property
    def _factor(self):
        cond = self.condition
        sep = separation_distance(self.centers) if self.M > 1 else None
        lu, ipiv, jpiv, info = lapack.dgetc2(self.matrix)
        if info > 0 or not np.isfinite(cond) or cond >= CONDITION_FAIL:
            raise SingularSystemError(
                f"saddle system is numerically singular "
                f"(condition ~{cond:.3g}, separation {sep})",
                condition=cond, separation=sep)
        if cond > CONDITION_WARN:
            warnings.warn(f"saddle matrix condition number {cond:.3g} "
                          f"exceeds {CONDITION_WARN:.0e}",
                          ConditioningWarning, stacklevel=3)
        return lu, ipiv, jpiv

    def solve(self, rhs) -> np.ndarray:
        """Solve with the full-pivoting LU factors; ``rhs`` (N,) or (N, K)."""
        lu, ipiv, jpiv = self._factor
        rhs = np.asarray(rhs, dtype=float)
        cols = rhs.reshape(rhs.shape[0], -1)
        out = np.empty_like(cols)
        for k in range(cols.shape[1]):
            x, scale = lapack.dgesc2(lu, cols[:, k].copy(), ipiv, jpiv)
            out[:, k] = x / scale
        return out.reshape(rhs.shape)

    def residual(self, sol, rhs) -> float:
        """Normwise backward error of a computed solution."""
        K = self.matrix
        r = K @ sol - rhs
        denom = (np.abs(K).sum(axis=1).max() * np.abs(sol).max()
                 + np.abs(rhs).max())
        return float(np.abs(r).max() / denom) if denom > 0 else 0.0


@dataclass(frozen=True, eq=False)
class Interpolant:
    system: SaddleSystem
    a: np.ndarray
    b: np.ndarray

    def __call__(self, x, mu=None):
        return evaluate(self, x, mu)


def assemble(kernel: RadialKernel, centers: CenterSet,
             basis: Optional[PolynomialBasis] = None) -> SaddleSystem:
    """Build ``A`` and ``P``; the basis order defaults to the kernel's CPD order."""
    if basis is None:
        basis = PolynomialBasis(kernel.cpd_order, kernel.dim)
    if centers.dim != kernel.dim or basis.dim != kernel.dim:
        raise ValidationError(
            f"dimension mismatch: kernel n={kernel.dim}, centers "
            f"n={centers.dim}, basis n={basis.dim}")
    if basis.order < kernel.cpd_order:
        raise ValidationError(
            f"basis order {basis.order} below the kernel's CPD order "
            f"{kernel.cpd_order}")
    if not unisolvency_check(centers, basis):
        raise UnisolvencyError(
            f"centers are not unisolvent for polynomials of order "
            f"{basis.order} (a nonzero polynomial vanishes on all centers)")
    pts = centers.points
    A = kernel.phi(cdist(pts, pts))
    A = 0.5 * (A + A.T)
    P = basis.evaluate(pts)
    A.setflags(write=False)
    P.setflags(write=False)
    return SaddleSystem(kernel, centers, basis, A, P)


def _stack(x, dim):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and (dim > 1 or x.shape[0] == 1))
    return x.reshape(-1, dim), single


def kernel_vector(system: SaddleSystem, x, mu=None):
    """``R^(mu)(x)`` rows ``D^mu psi(x - x_j)`` and ``S^(mu)(x)`` rows.

    Returns arrays of shape (K, M) and (K, Q) for K evaluation points.
    """
    n = system.kernel.dim
    mu = (0,) * n if mu is None else as_multi_index(mu, n)
    x, _ = _stack(x, n)
    diff = x[:, None, :] - system.centers.points[None, :, :]
    R = np.asarray(eval_derivative(system.kernel, mu, diff)).reshape(
        len(x), system.M)
    S = system.basis.evaluate(x, mu)
    return R, S


def solve_interpolant(system: SaddleSystem, values) -> Interpolant:
    """Coefficients ``(a, b)`` interpolating ``values`` at the centers."""
    f = np.asarray(values, dtype=float).reshape(-1)
    if f.shape[0] != system.M:
        raise ValidationError(
            f"got {f.shape[0]} values for {system.M} centers")
    rhs = np.concatenate([f, np.zeros(system.Q)])
    sol = system.solve(rhs)
    res = system.residual(sol, rhs)
    if res > RESIDUAL_RTOL:
        raise SingularSystemError(
            f"interpolation solve residual {res:.3g} exceeds "
            f"{RESIDUAL_RTOL}", condition=system.condition)
    return Interpolant(system, sol[:system.M].copy(), sol[system.M:].copy())


def evaluate(interp: Interpolant, x, mu=None):
    """``s^(mu)(x) = sum a_i D^mu psi(x - x_i) + sum b_i p_i^(mu)(x)``."""
    _, single = _stack(x, interp.system.kernel.dim)
    R, S = kernel_vector(interp.system, x, mu)
    out = R @ interp.a + S @ interp.b
    return float(out[0]) if single else out


def lagrange_values(system: SaddleSystem, x, mu=None):
    """Lagrange values ``U^(mu)(x)``: shape (M,) for one point, (K, M) for K."""
    _, single = _stack(x, system.kernel.dim)
    R, S = kernel_vector(system, x, mu)
    rhs = np.hstack([R, S]).T
    sol = system.solve(rhs)
    U = sol[:system.M].T
    return U[0] if single else U
