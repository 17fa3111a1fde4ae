import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbfpower.exceptions import ValidationError
from rbfpower.geometry import (CenterSet, PolynomialBasis, basis_dimension,
                               fill_distance, poly_moment_vector, read_centers,
                               read_values, separation_distance,
                               uniform_grid, unisolvency_check)


def test_basis_dimension():
    assert basis_dimension(0, 3) == 0
    assert basis_dimension(1, 2) == 1
    assert basis_dimension(2, 2) == 3
    assert basis_dimension(3, 2) == 6
    assert len(PolynomialBasis(2, 2)) == 3


def test_graded_lex_order():
    assert PolynomialBasis(3, 2).exponents == (
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def test_moment_vector_examples():
    assert poly_moment_vector(PolynomialBasis(1, 1), (0,), 0.3).tolist() == [1]
    assert poly_moment_vector(PolynomialBasis(1, 1), (1,), 0.3).tolist() == [0]
    assert poly_moment_vector(PolynomialBasis(2, 1), (1,), 3.0).tolist() == [0, 1]
    # d^2/dx dy of xy is 1, of x^2 is 0
    row = poly_moment_vector(PolynomialBasis(3, 2), (1, 1), [2.0, 5.0])
    assert row.tolist() == [0, 0, 0, 0, 1, 0]
    row = poly_moment_vector(PolynomialBasis(3, 2), (2, 0), [2.0, 5.0])
    assert row.tolist() == [0, 0, 0, 2, 0, 0]


def test_unisolvency():
    assert unisolvency_check(CenterSet([0.0, 1.0]), PolynomialBasis(2, 1))
    line = CenterSet([[0, 0], [1, 1], [2, 2]])
    assert not unisolvency_check(line, PolynomialBasis(2, 2))
    assert unisolvency_check(line, PolynomialBasis(0, 2))
    assert not unisolvency_check(CenterSet([0.5]), PolynomialBasis(2, 1))


def test_fill_distance_examples():
    assert fill_distance(CenterSet([0.0, 1.0]), 0.5, 0.5) == pytest.approx(0.5)
    assert fill_distance(CenterSet([0, 0.5, 1]), 0.5, 0.5, resolution=65) \
        == pytest.approx(0.25)
    assert fill_distance(CenterSet([0.0]), 0.0, 1.0) == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(count=st.integers(3, 40), x=st.floats(0.3, 0.7))
def test_fill_distance_uniform_grid_is_half_spacing(count, x):
    # oracle: for a ball wider than one cell the largest hole is the
    # midpoint between neighbours, h = spacing / 2, up to grid sampling
    centers = uniform_grid([(0, 1)], count)
    spacing = 1.0 / (count - 1)
    rho = 0.3
    h = fill_distance(centers, x, rho, resolution=int(64 * rho / spacing) + 1)
    assert h <= spacing / 2 + 1e-12
    assert h >= spacing / 2 - 2 * rho / (64 * rho / spacing)


def test_fill_distance_is_lower_bound_converging():
    centers = CenterSet(np.random.default_rng(2).uniform(0, 1, (12, 2)))
    hs = [fill_distance(centers, [0.5, 0.5], 0.3, r) for r in (9, 33, 129)]
    assert hs[0] <= hs[2] + 1e-12 and hs[1] <= hs[2] + 1e-12


def test_separation_distance():
    assert separation_distance(CenterSet([0.0, 1.0])) == 1.0
    assert separation_distance(CenterSet([0, 0.5, 1])) == 0.5
    assert separation_distance(CenterSet([[0, 0], [3, 4]])) == 5.0


def test_center_set_validation():
    with pytest.raises(ValidationError):
        CenterSet([0.0, 1.0, 0.0])
    with pytest.raises(ValidationError):
        CenterSet([0.0, np.nan])
    with pytest.raises(ValidationError):
        CenterSet([[0.0, 1.0]], dim=3)
    c = CenterSet([[0.0, 1.0], [2.0, 3.0]])
    assert (c.dim, len(c)) == (2, 2)
    assert c.permuted([1, 0]).points[0].tolist() == [2.0, 3.0]


def test_read_files(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# header\n0 0\n\n1 0\n0 1\n")
    assert read_centers(p).points.shape == (3, 2)
    bad = tmp_path / "bad.txt"
    bad.write_text("0 0\n1 x\n")
    with pytest.raises(ValidationError, match=r"bad.txt:2"):
        read_centers(bad)
    ragged = tmp_path / "ragged.txt"
    ragged.write_text("0 0\n1\n")
    with pytest.raises(ValidationError, match=r":2"):
        read_centers(ragged)
    v = tmp_path / "v.txt"
    v.write_text("1.5\n-2\n")
    assert read_values(v).tolist() == [1.5, -2.0]
