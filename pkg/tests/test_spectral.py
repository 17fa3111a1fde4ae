import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbfpower.exceptions import (ConvergenceError, ExponentConditionError,
                                 NotDominatedError, ValidationError)
from rbfpower.geometry import CenterSet
from rbfpower.interpolate import assemble, lagrange_values, solve_interpolant
from rbfpower.kernel import RadialKernel
from rbfpower.kriging import kriging_values, quadratic_form
from rbfpower.spectral import (CANDIDATES, Candidate, QuadratureGrid,
                               SpectralFunction, adjudicate_identity,
                               cf_norm, error_representation_check,
                               fourier_form, integrand_g, suggest_grid,
                               verify_transform_pair)

G = RadialKernel("gaussian", 1, 1.0)
G2 = RadialKernel("gaussian", 2, 1.0)
NORM = RadialKernel("norm", 1)


def test_grid_validation():
    with pytest.raises(ValidationError):
        QuadratureGrid(3, 10.0, 64)
    with pytest.raises(ValidationError):
        QuadratureGrid(1, 10.0, 60)
    with pytest.raises(ValidationError):
        QuadratureGrid(1, 10.0, 64, eps=5.0)
    g = QuadratureGrid(1, 10.0, 64)
    assert g.refined().points == 128 and g.width == pytest.approx(20 / 64)


def test_integrand_g_examples():
    c = CenterSet([0.7])
    t = np.linspace(-5, 5, 11)[:, None]
    np.testing.assert_allclose(integrand_g(c, [1.0], 0.7, 0, t), 0, atol=1e-15)
    c = CenterSet([0.0, 0.5, 1.3])
    U = lagrange_values(assemble(NORM, c), 0.9)
    assert abs(integrand_g(c, U, 0.9, 0, [[0.0]])[0]) < 1e-12


@settings(max_examples=30, deadline=None)
@given(t=st.floats(-20, 20), seed=st.integers(0, 1000))
def test_integrand_conjugate_symmetry(t, seed):
    rng = np.random.default_rng(seed)
    c = CenterSet(np.sort(rng.uniform(0, 3, 4)) + np.arange(4))
    U = rng.normal(size=4)
    a = integrand_g(c, U, 1.1, 1, [[t]])
    b = integrand_g(c, U, 1.1, 1, [[-t]])
    assert abs(abs(a[0]) - abs(b[0])) < 1e-12


def test_fourier_form_trivial_zero():
    r = fourier_form(G, CenterSet([0.4]), [1.0], 0.4, 0)
    assert r.value == 0.0


def test_fourier_form_matches_quadratic_form_two_centers():
    system = assemble(G, CenterSet([0.0, 1.0]))
    U = lagrange_values(system, 0.4)
    r = fourier_form(G, system.centers, U, 0.4, 0)
    assert r.value == pytest.approx(quadratic_form(system, U, 0.4, 0),
                                    abs=max(1e-5, 10 * r.delta))
    assert r.value >= 0


@pytest.mark.parametrize("kernel,dim", [(G, 1), (G2, 2)])
def test_master_identity_random_feasible(kernel, dim):
    rng = np.random.default_rng(7)
    centers = CenterSet(rng.uniform(0, 3, (5, dim)))
    system = assemble(kernel, centers)
    for _ in range(20 if dim == 1 else 4):
        U = rng.normal(size=5)
        x = rng.uniform(0, 3, dim)
        r = fourier_form(kernel, centers, U, x, 0)
        for conv in ("original", "corrected"):
            qf = quadratic_form(system, U, x, 0, conv)
            assert abs(r.value - qf) <= 10 * r.delta


def test_fourier_form_minimum_at_kriging_minimizer():
    rng = np.random.default_rng(8)
    system = assemble(NORM, CenterSet([0.0, 0.35, 0.6, 1.0]))
    x = 0.47
    ustar = kriging_values(system, [x], 0)[0].minimizer
    best = fourier_form(NORM, system.centers, ustar, x, 0)
    for _ in range(3):
        d = rng.normal(size=4)
        d -= d.mean()
        other = fourier_form(NORM, system.centers, ustar + 0.1 * d, x, 0)
        assert best.value <= other.value + 10 * best.delta


def test_norm_fourier_form_stable_under_tail_doubling():
    system = assemble(NORM, CenterSet([0.0, 0.35, 0.6, 1.0]))
    U = lagrange_values(system, 0.47)
    base = suggest_grid(NORM, 1.0)
    big = QuadratureGrid(1, 2 * base.T, 2 * base.points, base.eps)
    a = fourier_form(NORM, system.centers, U, 0.47, 0, grid=base)
    b = fourier_form(NORM, system.centers, U, 0.47, 0, grid=big)
    assert a.value > 0 and math.isfinite(a.value)
    assert abs(a.value - b.value) <= 10 * max(a.delta, b.delta)
    assert a.value == pytest.approx(quadratic_form(system, U, 0.47, 0),
                                    abs=10 * a.delta)


def test_fourier_form_preconditions():
    c = CenterSet([0.0, 0.5, 1.0])
    with pytest.raises(ExponentConditionError):
        fourier_form(NORM, c, [0.2, 0.3, 0.5], 0.2, 1)
    with pytest.raises(ValidationError):
        fourier_form(NORM, c, [1.0, 1.0, 1.0], 0.2, 0)  # moments violated
    with pytest.raises(ValidationError):
        fourier_form(NORM, c, [0.2, 0.3, 0.5], 0.2, 0,
                     grid=QuadratureGrid(1, 100.0, 64))  # eps = 0
    with pytest.raises(ValidationError):
        fourier_form(RadialKernel("multiquadric"), c, [0.2, 0.3, 0.5], 0.2, 0)


def test_convergence_error_when_tolerance_unreachable():
    c = CenterSet([0.0, 4.0, 8.0])
    with pytest.raises(ConvergenceError):
        fourier_form(G, c, [1.0, -0.5, 0.3], 2.0, 0,
                     grid=QuadratureGrid(1, 21.0, 64), tol=1e-30,
                     max_refinements=1)


def test_identity_report_mu0_all_candidates_match():
    c = CenterSet([0.0, 1.2, 2.5, 3.1, 4.4])
    U = lagrange_values(assemble(G, c), 1.9)
    rep = adjudicate_identity(G, c, U, 1.9, 0)
    assert sorted(rep.matching) == sorted(CANDIDATES)
    assert rep.verdict in CANDIDATES


def test_identity_report_mu1_structure_and_json():
    c = CenterSet([0.0, 1.2, 2.5, 3.1, 4.4])
    U = lagrange_values(assemble(G, c), 1.9, (1,))
    rep = adjudicate_identity(G, c, U, 1.9, 1)
    doc = json.loads(rep.to_json())
    assert set(doc) >= {"kernel", "mu", "M", "grid", "I", "candidates",
                        "refinement_delta", "verdict"}
    assert set(doc["grid"]) == {"T", "points", "epsilon"}
    assert len(doc["candidates"]) == 3
    assert doc["I"] >= -10 * doc["refinement_delta"]
    for entry in doc["candidates"].values():
        assert set(entry) == {"value", "abs_dev", "rel_dev"}


def test_identity_candidates_are_extensible():
    c = CenterSet([0.0, 1.2, 2.5])
    U = lagrange_values(assemble(G, c), 0.9, (1,))
    extra = dict(CANDIDATES, no_constant=Candidate(const_even=0, const_odd=0))
    rep = adjudicate_identity(G, c, U, 0.9, 1, candidates=extra)
    assert "no_constant" in rep.candidates and len(rep.candidates) == 4
    with pytest.raises(ValidationError):
        Candidate.from_dict({"bogus": 1})


def test_identity_inconclusive_when_nothing_matches():
    c = CenterSet([0.0, 1.2, 2.5])
    U = lagrange_values(assemble(G, c), 0.9, (1,))
    rep = adjudicate_identity(G, c, U, 0.9, 1, candidates={
        "off": Candidate(const_odd=5.0)})
    assert rep.verdict == "inconclusive" and rep.matching == []


def test_transform_pair_examples():
    assert verify_transform_pair(G, [0.0, 1.0]) <= 1e-6
    dev, rec = verify_transform_pair(NORM, [(0.0, 0.5)], details=True)
    assert rec[0]["direct"] == -1.0
    assert dev <= 1e-4


def test_transform_pair_gaussian_2d():
    assert verify_transform_pair(G2, [(0.0, 0.0), (0.5, -0.3)]) <= 1e-6


def test_cf_norm_examples():
    f = SpectralFunction.kernel_span(G, [0.3])
    assert cf_norm(f, G) == pytest.approx(1.0, abs=1e-12)
    f = SpectralFunction.kernel_span(G, [0.0, 1.0], [1.0, 1.0])
    assert cf_norm(f, G) ** 2 == pytest.approx(2 + 2 * math.exp(-1), rel=1e-12)
    assert cf_norm(SpectralFunction.kernel_span(G, [0.0], [0.0]), G) == 0.0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10000), m=st.integers(1, 5))
def test_cf_norm_closed_form_vs_quadrature(seed, m):
    rng = np.random.default_rng(seed)
    f = SpectralFunction.kernel_span(G, rng.uniform(-2, 2, m),
                                     rng.normal(size=m))
    closed, quad = cf_norm(f, G, details=True)
    if closed > 1e-3:
        assert quad.value == pytest.approx(closed ** 2, rel=1e-5)


def test_cf_norm_explicit_gaussian_matches_span():
    f = SpectralFunction.gaussian(1.0, [0.7])
    assert cf_norm(f, G) == pytest.approx(1.0, abs=1e-9)
    # narrower-spectrum target: c_f^2 = (pi/beta_f) / sqrt(pi) * sqrt(pi / a)
    # with a = 1/(2 beta_f) - 1/4
    bf = 0.5
    a = 1 / (2 * bf) - 0.25
    ref = math.sqrt((math.pi / bf) / math.sqrt(math.pi) * math.sqrt(math.pi / a)
                    / (2 * math.pi))
    assert cf_norm(SpectralFunction.gaussian(bf), G) == pytest.approx(ref,
                                                                      rel=1e-8)


def test_cf_norm_rejects_fat_tails():
    with pytest.raises(NotDominatedError):
        cf_norm(SpectralFunction.gaussian(3.0), G)


def test_kernel_span_moment_conditions():
    with pytest.raises(ValidationError):
        SpectralFunction.kernel_span(NORM, [0.0, 1.0], [1.0, 1.0])
    f = SpectralFunction.kernel_span(NORM, [0.0, 1.0], [1.0, -1.0])
    assert cf_norm(f, NORM) == pytest.approx(math.sqrt(2.0), rel=1e-5)


def test_error_representation_at_center_and_refinement():
    centers = CenterSet(np.linspace(0, 6, 7))
    f = SpectralFunction.gaussian(0.5, [2.3])
    interp = solve_interpolant(assemble(G, centers), f(centers.points))
    r = error_representation_check(interp, f, 3.0)
    assert abs(r.direct) < 1e-8 and abs(r.via_integral) < 1e-8
    grid = suggest_grid(RadialKernel("gaussian", 1, 0.5), 8.0)
    coarse = error_representation_check(interp, f, 2.71, grid)
    fine = error_representation_check(interp, f, 2.71, grid.refined())
    assert fine.deviation <= coarse.deviation + 1e-15
    assert coarse.deviation <= 1e-5
