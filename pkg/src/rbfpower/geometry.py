"""Center sets, polynomial bases of ``P_q``, unisolvency and fill distance."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .exceptions import ValidationError
from .kernel import as_multi_index

__all__ = [
    "CenterSet", "PolynomialBasis", "basis_dimension", "poly_moment_vector",
    "unisolvency_check", "fill_distance", "separation_distance",
    "read_centers", "read_values", "uniform_grid",
]

DEFAULT_RHO = 1.0
UNISOLVENCY_RTOL = 1e-10


class CenterSet:
    """Pairwise distinct points ``x_1..x_M`` in ``R^n``, stored as (M, n)."""

    def __init__(self, points, dim=None):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if dim in (None, 1) else pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValidationError("a center set needs at least one point")
        if dim is not None and pts.shape[1] != dim:
            raise ValidationError(
                f"centers have dimension {pts.shape[1]}, expected {dim}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("centers must be finite")
        if len(pts) > 1 and pdist(pts).min() == 0:
            raise ValidationError("centers are not pairwise distinct")
        pts.setflags(write=False)
        self.points = pts

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        return f"CenterSet(M={len(self)}, n={self.dim})"

    def permuted(self, perm) -> "CenterSet":
        return CenterSet(self.points[np.asarray(perm)])

    def with_point(self, y) -> "CenterSet":
        y = np.asarray(y, dtype=float).reshape(1, self.dim)
        return CenterSet(np.vstack([self.points, y]))


def basis_dimension(q: int, n: int) -> int:
    """Dimension ``Q = binom(q + n - 1, n)`` of polynomials of degree < q."""
    if q < 0 or n < 1:
        raise ValidationError("need q >= 0 and n >= 1")
    return math.comb(q + n - 1, n) if q > 0 else 0


def _graded_exponents(q, n):
    exps = []
    for deg in range(q):
        level = [e for e in itertools.product(range(deg + 1), repeat=n)
                 if sum(e) == deg]
        # graded lexicographic: higher power of the leading variable first
        exps.extend(sorted(level, reverse=True))
    return tuple(exps)


@dataclass(frozen=True)
class PolynomialBasis:
    """Monomial basis of ``P_q`` (total degree < q) in graded-lex order."""
    order: int
    dim: int

    def __post_init__(self):
        if self.order < 0 or self.dim < 1:
            raise ValidationError("need order >= 0 and dim >= 1")

    @property
    def exponents(self) -> tuple:
        return _graded_exponents(self.order, self.dim)

    def __len__(self):
        return basis_dimension(self.order, self.dim)

    def evaluate(self, x, mu=None):
        """Matrix of ``p_j^(mu)(x_i)``, shape ``(K, Q)`` for ``x`` (K, n)."""
        x = np.asarray(x, dtype=float)
        if x.ndim <= 1:
            x = x.reshape(-1, self.dim)
        mu = (0,) * self.dim if mu is None else as_multi_index(mu, self.dim)
        cols = []
        for alpha in self.exponents:
            if any(a < m for a, m in zip(alpha, mu)):
                cols.append(np.zeros(len(x)))
                continue
            coef = 1.0
            col = np.ones(len(x))
            for k, (a, m) in enumerate(zip(alpha, mu)):
                coef *= math.perm(a, m)
                col = col * x[:, k] ** (a - m)
            cols.append(coef * col)
        if not cols:
            return np.zeros((len(x), 0))
        return np.column_stack(cols)


def poly_moment_vector(basis: PolynomialBasis, mu, x) -> np.ndarray:
    """``S^(mu)(x) = (p_1^(mu)(x), ..., p_Q^(mu)(x))``."""
    x = np.asarray(x, dtype=float).reshape(1, basis.dim)
    return basis.evaluate(x, mu)[0]


def unisolvency_check(centers: CenterSet, basis: PolynomialBasis) -> bool:
    """True iff no nonzero polynomial of the basis vanishes on the centers."""
    if len(basis) == 0:
        return True
    if centers.dim != basis.dim:
        raise ValidationError("center and basis dimensions differ")
    P = basis.evaluate(centers.points)
    if P.shape[0] < P.shape[1]:
        return False
    sv = np.linalg.svd(P, compute_uv=False)
    return bool(sv[-1] > UNISOLVENCY_RTOL * sv[0])


def fill_distance(centers: CenterSet, x, rho: float = DEFAULT_RHO,
                  resolution: int = 65, workers: int = 1) -> float:
    """Grid estimate of ``h_rho(x) = max_{|y-x|<=rho} min_j |y - x_j|``.

    The ball is sampled on a ``resolution``-per-axis tensor grid spanning
    its bounding box, so the result is a lower bound converging to the
    true value as ``resolution`` grows.  Odd resolutions include ``x``.
    """
    if rho <= 0:
        raise ValidationError("rho must be positive")
    if resolution < 8:
        raise ValidationError("resolution must be at least 8 per axis")
    x = np.asarray(x, dtype=float).reshape(centers.dim)
    axis = np.linspace(-rho, rho, int(resolution))
    offsets = np.stack(np.meshgrid(*([axis] * centers.dim), indexing="ij"),
                       axis=-1).reshape(-1, centers.dim)
    inside = np.sum(offsets ** 2, axis=1) <= rho * rho * (1 + 1e-12)
    samples = x + offsets[inside]
    dist, _ = cKDTree(centers.points).query(samples, workers=workers)
    return float(dist.max())


def separation_distance(centers: CenterSet) -> float:
    """Minimum pairwise distance between centers."""
    if len(centers) < 2:
        raise ValidationError("separation distance needs at least 2 centers")
    return float(pdist(centers.points).min())


def uniform_grid(box, count) -> CenterSet:
    """Tensor grid with ``count`` points per axis over ``box`` ((lo, hi) per axis)."""
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    axes = [np.linspace(lo, hi, int(count)) for lo, hi in box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return CenterSet(pts.reshape(-1, len(box)))


def _read_rows(path, what):
    rows = []
    dim = None
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                row = [float(tok) for tok in stripped.split()]
            except ValueError:
                raise ValidationError(
                    f"{path}:{lineno}: malformed {what} line: "
                    f"{stripped!r}") from None
            if dim is None:
                dim = len(row)
            elif len(row) != dim:
                raise ValidationError(
                    f"{path}:{lineno}: expected {dim} columns, "
                    f"got {len(row)}")
            rows.append(row)
    if not rows:
        raise ValidationError(f"{path}: no data lines")
    return np.array(rows)


def read_centers(path) -> CenterSet:
    """Read a centers file: one point per line, '#' comment lines."""
    return CenterSet(_read_rows(path, "center"))


def read_values(path) -> np.ndarray:
    """Read a values file: one number per line."""
    vals = _read_rows(path, "value")
    if vals.shape[1] != 1:
        raise ValidationError(f"{path}: values file must have one column")
    return vals[:, 0]
