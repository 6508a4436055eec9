from fractions import Fraction as F

import numpy as np
import pytest

from conevol import catalog
from conevol.cxone import SussFamilyParams, general_fiber, suss_family
from conevol.errors import NotFano, ReebConeViolation
from conevol.reebopt import (
    GaugeSlice,
    certify_rational,
    minimize_volume,
    quasiregular_detect,
    slice_gradient_norm,
    start_points,
    volume_gradient_hessian,
)
from conevol.toric import a0, normalized_volume

TORIC = sorted(n for n in catalog.TORIC_RAYS)


def suss_fiber(k, m=0, mp=0):
    return general_fiber(suss_family(SussFamilyParams(k, m, mp)))


def targets():
    out = [(n, catalog.toric(n)) for n in TORIC]
    out += [(f"suss k={k}", suss_fiber(k)) for k in (1, 2, 3)]
    return out


TARGETS = targets()
IDS = [n for n, _ in TARGETS]


def random_slice_points(target, count, seed, power=3):
    """Random slice points; a larger ``power`` pushes samples towards the boundary."""
    rng = np.random.default_rng(seed)
    sl = GaugeSlice.of(target)
    rays = np.array(target.sigma.rays, dtype=float)
    w = rng.uniform(0.0, 1.0, size=(count, len(rays))) ** power + 1e-3
    return np.array([sl.project(v) for v in w @ rays])


def test_gradient_c2():
    g, h = volume_gradient_hessian(catalog.toric("C2"), (1.0, 1.0))
    np.testing.assert_allclose(g, [-1, -1])
    np.testing.assert_allclose(h, [[2, 1], [1, 2]])


def test_gradient_outside_reeb_cone():
    with pytest.raises(ReebConeViolation):
        volume_gradient_hessian(catalog.toric("C2"), (1.0, -1.0))


@pytest.mark.parametrize("name, X", TARGETS, ids=IDS)
def test_gradient_hessian_finite_differences(name, X):
    h = 1e-6
    for xi in random_slice_points(X, 5, 7, power=1):
        g, H = volume_gradient_hessian(X, xi)
        fd = np.empty_like(g)
        fdh = np.empty_like(H)
        for i in range(len(xi)):
            e = np.zeros(len(xi))
            e[i] = h * max(1.0, abs(xi[i]))
            fd[i] = (X.character.a0(xi + e) - X.character.a0(xi - e)) / (2 * e[i])
            gp, _ = volume_gradient_hessian(X, xi + e)
            gm, _ = volume_gradient_hessian(X, xi - e)
            fdh[:, i] = (gp - gm) / (2 * e[i])
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-6 * np.abs(g).max())
        np.testing.assert_allclose(H, fdh, rtol=1e-6, atol=1e-6 * np.abs(H).max())


def test_exact_gradient_matches_float():
    X = catalog.toric("Y21")
    xi = (F(3), F(5, 2), F(13, 5))
    g, _ = volume_gradient_hessian(X, tuple(float(x) for x in xi))
    np.testing.assert_allclose([float(x) for x in X.character.grad_exact(xi)], g, rtol=1e-12)


@pytest.mark.parametrize(
    "name, xi, vhat",
    [("C3", (1, 1, 1), 27), ("conifold", (1.5, 1.5, 3), 16), ("A1", (2, 2), 2), ("C3/Z3", (0, 0, 3), 9), ("C2", (1, 1), 4)],
)
def test_known_minimizers(name, xi, vhat):
    rep = minimize_volume(catalog.toric(name))
    np.testing.assert_allclose(rep.xi_star, xi, atol=1e-9)
    assert rep.vhat == pytest.approx(vhat, rel=1e-10)
    assert rep.grad_residual <= 1e-10


@pytest.mark.parametrize("name, X", TARGETS, ids=IDS)
def test_first_order_condition_and_convexity_at_minimizer(name, X):
    rep = minimize_volume(X)
    assert slice_gradient_norm(X, rep.xi_star) <= 1e-8
    assert rep.hessian_min_eigen > 0
    assert float(np.dot(rep.xi_star, [float(x) for x in X.gorenstein_u])) == pytest.approx(X.n)


@pytest.mark.parametrize("name, X", TARGETS, ids=IDS)
def test_multistart_agreement(name, X):
    rep = minimize_volume(X, starts=8, seed=3)
    assert rep.starts == 8
    assert rep.start_spread <= 10 * 1e-10 * max(1.0, float(np.max(np.abs(rep.xi_star))))


@pytest.mark.parametrize("name, X", TARGETS, ids=IDS)
def test_convexity_audit(name, X):
    sl = GaugeSlice.of(X)
    z = sl.basis
    for xi in random_slice_points(X, 100, 11):
        _, H = volume_gradient_hessian(X, xi)
        if z.shape[1]:
            assert np.linalg.eigvalsh(z.T @ H @ z)[0] > 0


@pytest.mark.parametrize("name, X", TARGETS, ids=IDS)
def test_global_minimality_spot_check(name, X):
    rep = minimize_volume(X)
    n = X.n
    vals = [n**n * X.character.a0(xi) for xi in random_slice_points(X, 1000, 5)]
    assert min(vals) >= rep.vhat * (1 - 1e-12)


def test_start_points_inside_slice():
    X = catalog.toric("Y21")
    sl = GaugeSlice.of(X)
    for p in start_points(X, 8, seed=1):
        assert sl.inside(p)
        assert float(p @ sl.covector) == pytest.approx(X.n)


def test_quasiregular_detection():
    for name, expected in [("C3", (1, 1, 1)), ("conifold", (F(3, 2), F(3, 2), 3)), ("A1", (2, 2))]:
        X = catalog.toric(name)
        assert quasiregular_detect(X, minimize_volume(X)) == expected
    assert normalized_volume(catalog.toric("conifold"), (F(3, 2), F(3, 2), 3)) == 16


def test_irregular_minimizer_is_rejected():
    X = catalog.toric("Y21")
    rep = minimize_volume(X, starts=4)
    assert quasiregular_detect(X, rep) is None
    assert quasiregular_detect(X, rep, max_denominator=10**6) is None
    # on this presentation the minimizer is (3, sqrt(13) - 1, sqrt(13) - 1)
    np.testing.assert_allclose(rep.xi_star, [3, 13**0.5 - 1, 13**0.5 - 1], rtol=1e-10)


def test_suss_k3_is_quasiregular():
    X = suss_fiber(3)
    assert quasiregular_detect(X, minimize_volume(X)) == (F(34, 5), 3)


def test_suss_k2_is_irregular():
    X = suss_fiber(2)
    rep = minimize_volume(X)
    assert rep.xi_star[1] == pytest.approx(3.0)
    assert quasiregular_detect(X, rep) is None


def test_certify_rejects_off_slice_and_outside():
    X = catalog.toric("C3")
    assert certify_rational(X, (1, 1, 1))
    assert not certify_rational(X, (2, 2, 2))
    assert not certify_rational(X, (1, 2, 0))
    assert not certify_rational(X, (F(1, 2), F(1, 2), 2))


def test_not_fano():
    class Flat:
        gorenstein_u = None

    with pytest.raises(NotFano):
        minimize_volume(Flat())


def test_a0_at_minimizer_matches_report():
    X = catalog.toric("conifold")
    rep = minimize_volume(X)
    assert rep.a0 == pytest.approx(float(a0(X, (F(3, 2), F(3, 2), 3))), rel=1e-12)
