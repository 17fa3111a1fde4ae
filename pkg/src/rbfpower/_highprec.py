"""Extended-precision saddle solves (gmpy2 mpfr on numpy object arrays).

Needed where the Gram matrix is too ill-conditioned for float64, e.g. the
gaussian on dense center sets, whose Kriging function falls far below
machine epsilon.
"""
from __future__ import annotations

import math

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .exceptions import NumericalError, SingularSystemError
from .kernel import as_multi_index

START_BITS = 256
MAX_BITS = 1 << 15
AGREEMENT_RTOL = 1e-10


def precision(bits):
    return gmpy2.context(precision=int(bits))


def _terms(family, shape, s, order):
    """``F, F', F''`` of ``phi(r) = F(r^2)`` at an mpfr ``s``."""
    if family == "gaussian":
        e = gmpy2.exp(-shape * s)
        return [e, -shape * e, shape * shape * e][:order + 1]
    if family == "multiquadric":
        w = shape * shape + s
        root = gmpy2.sqrt(w)
        return [-root, -0.5 / root, 0.25 / (w * root)][:order + 1]
    if family == "norm":
        root = gmpy2.sqrt(s)
        if order == 0:
            return [-root]
        return [-root, -0.5 / root, 0.25 / (s * root)][:order + 1]
    if s == 0:
        if order:
            raise NumericalError("thin-plate spline derivative at the origin")
        return [mpfr(0)]
    logs = gmpy2.log(s)
    return [0.5 * s * logs, 0.5 * (logs + 1), 0.5 / s][:order + 1]


def derivative(kernel, mu, d):
    """``D^mu psi(d)`` for an mpfr vector ``d`` (same formulas as float64)."""
    shape = mpfr(kernel.shape)
    s = sum((c * c for c in d), mpfr(0))
    order = sum(mu)
    terms = _terms(kernel.family, shape, s, order)
    if order == 0:
        return terms[0]
    if order == 1:
        return 2 * d[mu.index(1)] * terms[1]
    nz = [k for k, m in enumerate(mu) if m]
    if len(nz) == 1:
        xi2 = d[nz[0]] ** 2
        return 2 * terms[1] + (4 * xi2 * terms[2] if xi2 else 0)
    xij = d[nz[0]] * d[nz[1]]
    return 4 * xij * terms[2] if xij else mpfr(0)


def poly_row(basis, mu, x):
    row = []
    for alpha in basis.exponents:
        if any(a < m for a, m in zip(alpha, mu)):
            row.append(mpfr(0))
            continue
        val = mpfr(1)
        for a, m, c in zip(alpha, mu, x):
            val *= math.perm(a, m) * c ** (a - m)
        row.append(val)
    return row


def lu_factor(a):
    """In-place LU with partial pivoting of an object array."""
    n = a.shape[0]
    piv = np.arange(n)
    for k in range(n):
        col = a[k:, k]
        p = k + max(range(n - k), key=lambda i: abs(col[i]))
        if a[p, k] == 0:
            raise SingularSystemError("extended-precision factorization hit "
                                      "an exact zero pivot")
        if p != k:
            a[[k, p]] = a[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        a[k + 1:, k] = a[k + 1:, k] / a[k, k]
        if k + 1 < n:
            a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return a, piv


def lu_solve(lu, piv, b):
    n = lu.shape[0]
    y = np.array(b, dtype=object)[piv]
    for i in range(1, n):
        y[i] = y[i] - np.dot(lu[i, :i], y[:i])
    for i in range(n - 1, -1, -1):
        acc = y[i] - np.dot(lu[i, i + 1:], y[i + 1:]) if i + 1 < n else y[i]
        y[i] = acc / lu[i, i]
    return y


class MPSaddle:
    """Saddle matrix ``[w A, P; P^T, 0]`` factored at a fixed precision.

    ``weight = 1`` gives the interpolation system, ``weight = 2`` the
    stationarity system of the Kriging minimization.  All methods must be
    called inside ``precision(self.bits)``.
    """

    def __init__(self, system, bits, weight=1):
        self.system = system
        self.kernel = system.kernel
        self.basis = system.basis
        self.bits = int(bits)
        self.M, self.Q = system.M, system.Q
        self.zero = (0,) * self.kernel.dim
        self.pts = [[mpfr(float(c)) for c in p] for p in system.centers.points]
        M, Q = self.M, self.Q
        A = np.empty((M, M), dtype=object)
        for i in range(M):
            for j in range(i, M):
                d = [u - v for u, v in zip(self.pts[i], self.pts[j])]
                A[i, j] = A[j, i] = derivative(self.kernel, self.zero, d)
        self.A = A
        P = np.array([poly_row(self.basis, self.zero, p) for p in self.pts],
                     dtype=object).reshape(M, Q)
        K = np.empty((M + Q, M + Q), dtype=object)
        K[:M, :M] = A * weight
        K[:M, M:] = P
        K[M:, :M] = P.T
        K[M:, M:] = mpfr(0)
        self.lu, self.piv = lu_factor(K)

    def rhs(self, x, mu):
        x = [mpfr(float(c)) for c in np.reshape(x, -1)]
        R = [derivative(self.kernel, mu, [u - v for u, v in zip(x, p)])
             for p in self.pts]
        S = poly_row(self.basis, mu, x)
        return np.array(R, dtype=object), np.array(S, dtype=object)

    def solve(self, rhs):
        return lu_solve(self.lu, self.piv, rhs)


def _adaptive(compute, exact_zero=None, start_bits=START_BITS):
    """Double precision until two successive results agree.

    ``compute(bits)`` returns a list of mpfr values; entries flagged in
    ``exact_zero`` are known to vanish and are excluded from the test.
    """
    bits = int(start_bits)
    with precision(bits):
        prev = compute(bits)
    while bits < MAX_BITS:
        bits *= 2
        with precision(bits):
            cur = compute(bits)
            ok = True
            for k, (p, c) in enumerate(zip(prev, cur)):
                if exact_zero is not None and exact_zero[k]:
                    continue
                if c == 0 or abs(p - c) > AGREEMENT_RTOL * abs(c):
                    ok = False
                    break
        if ok:
            return cur, bits
        prev = cur
    raise NumericalError(f"extended-precision results did not settle "
                         f"below {MAX_BITS} bits")


def _at_center(system, points):
    pts = system.centers.points
    return [bool(np.any(np.all(pts == p, axis=1))) for p in points]


def kriging_values(system, points, mu, convention, bits=None):
    """Kriging minimization in extended precision.

    Returns ``(kappa_sq, minimizers, bits)`` with ``kappa_sq`` a list of
    mpfr (valid within the returned precision context only as floats) and
    minimizers a float array (K, M).
    """
    mu = as_multi_index(mu, system.kernel.dim)
    points = np.asarray(points, dtype=float).reshape(-1, system.kernel.dim)
    sign = (-1) ** sum(mu) if convention == "corrected" else 1
    two_mu = tuple(2 * m for m in mu)
    store = {}

    def compute(b):
        sad = MPSaddle(system, b, weight=2)
        const = sign * derivative(system.kernel, two_mu,
                                  [mpfr(0)] * system.kernel.dim)
        vals, mins = [], []
        for x in points:
            R, S = sad.rhs(x, mu)
            sol = sad.solve(np.concatenate([2 * R, S]))
            U = sol[:sad.M]
            AU = sad.A.dot(U)
            vals.append(U.dot(AU) - 2 * U.dot(R) + const)
            mins.append([float(u) for u in U])
        store["mins"] = mins
        store["vals"] = [float(v) for v in vals]
        store["kappa"] = [float(gmpy2.sqrt(v)) if v >= 0 else math.nan
                          for v in vals]
        return vals

    if bits is None:
        zero = _at_center(system, points) if not any(mu) else None
        _, bits = _adaptive(compute, zero)
    else:
        with precision(bits):
            compute(bits)
    return (np.array(store["vals"]), np.array(store["kappa"]),
            np.array(store["mins"]), bits)


def interpolation_errors(system, f_mp, points, f_at_points, bits=None):
    """``s(x) - f(x)`` at ``points`` with coefficients solved in extended precision.

    ``f_mp(y)`` returns f at an mpfr point (list); ``f_at_points`` likewise
    evaluates the target at the sample points.
    """
    points = np.asarray(points, dtype=float).reshape(-1, system.kernel.dim)
    store = {}

    def compute(b):
        sad = MPSaddle(system, b, weight=1)
        vals = np.array([f_mp(p) for p in sad.pts], dtype=object)
        sol = sad.solve(np.concatenate(
            [vals, np.array([mpfr(0)] * sad.Q, dtype=object)]))
        a, coef = sol[:sad.M], sol[sad.M:]
        errs = []
        for x in points:
            R, S = sad.rhs(x, sad.zero)
            xm = [mpfr(float(c)) for c in x]
            errs.append(a.dot(R) + (coef.dot(S) if sad.Q else 0)
                        - f_at_points(xm))
        store["errs"] = [float(e) for e in errs]
        return errs

    if bits is None:
        _, bits = _adaptive(compute, _at_center(system, points))
    else:
        with precision(bits):
            compute(bits)
    return np.array(store["errs"]), bits
