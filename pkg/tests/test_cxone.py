from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conevol import catalog
from conevol.cxone import (
    INFINITY,
    ZERO,
    MarkedPoint,
    PolyhedralDivisor,
    SussFamilyParams,
    admissible_degenerations,
    candidate_points,
    central_counts,
    degenerate_at,
    general_fiber,
    general_fiber_a0,
    hilbert_constancy_check,
    hilbert_dim,
    hilbert_dims,
    suss_family,
    suss_tail,
)
from conevol.errors import (
    ImproperDegeneration,
    ImproperDivisor,
    InvalidParams,
    NoFlatDegeneration,
    OutsideMomentCone,
    ParseError,
)
from conevol.ratgeom import RationalCone, RationalPolyhedron, lattice_points_under_level, unimodular_matrices
from conevol.reebopt import minimize_volume
from conevol.toric import a0, truncated_index_character


def suss(k, m=0, mp=0):
    return suss_family(SussFamilyParams(k, m, mp))


def test_marked_point_parsing_and_order():
    assert MarkedPoint.parse("inf") == INFINITY == MarkedPoint.parse("∞")
    assert MarkedPoint.parse("0") == ZERO
    assert MarkedPoint.parse("3/4").value == F(3, 4)
    assert sorted([INFINITY, MarkedPoint.parse("2"), ZERO]) == [ZERO, MarkedPoint.parse("2"), INFINITY]
    assert str(INFINITY) == "inf"
    with pytest.raises(ParseError):
        MarkedPoint.parse("0.5")


def test_suss_family_shapes():
    D = suss(2)
    assert [str(y) for y in D.support] == ["0", "1", "2", "inf"]
    assert D.term("0").vertices == ((F(2, 5), F(1, 5)),)
    assert suss_tail(2).rays == ((-1, 1), (13, 4))

    D = suss(2, 1, 0)
    assert D.term("0").vertices == ((F(2, 5), F(1, 5)), (F(7, 5), F(1, 5)))
    assert [str(y) for y in D.support] == ["0", "1", "inf"]

    D = suss(2, 0, 2)
    assert D.term("inf").vertices == ((F(-2, 3), F(1, 3)), (F(4, 3), F(1, 3)))


def test_suss_params_validation():
    with pytest.raises(InvalidParams):
        SussFamilyParams(0)
    with pytest.raises(InvalidParams):
        SussFamilyParams(2, 2, 1)
    with pytest.raises(InvalidParams):
        SussFamilyParams(2, 0, 0, (1, 1))
    assert SussFamilyParams(3, 1, 0, ("1/2", 5)).generic_positions == (F(1, 2), F(5))


def test_explicit_generic_positions():
    D = suss_family(SussFamilyParams(2, 0, 0, (F(1, 3), 7)))
    assert [str(y) for y in D.support] == ["0", "1/3", "7", "inf"]


def test_improper_divisor():
    orthant = RationalCone.from_rays([(1, 0), (0, 1)])
    with pytest.raises(ImproperDivisor):
        PolyhedralDivisor(orthant, [("0", RationalPolyhedron.point((-1, 0), orthant))])


def test_hilbert_dim_examples():
    D = suss(1)
    assert hilbert_dim(D, (0, 0)) == 1
    assert hilbert_dim(D, (0, 1)) == 1
    with pytest.raises(OutsideMomentCone):
        hilbert_dim(D, (1, 0))


def test_hilbert_dim_negative_degree_gives_zero():
    orthant = RationalCone.from_rays([(1, 0), (0, 1)])
    D = PolyhedralDivisor(
        orthant,
        [("0", RationalPolyhedron.point((F(1, 2), 0), orthant)), ("inf", RationalPolyhedron.point((F(-1, 3), 1), orthant))],
    )
    # floor(1/2) + floor(-1/3) = -1
    assert hilbert_dim(D, (1, 0)) == 0


def test_vectorized_hilbert_matches_scalar():
    for k in (1, 2, 3):
        D = suss(k, 1, 1) if k > 1 else suss(k)
        pts = lattice_points_under_level(D.dual, D.tail.ray_sum(), 30)
        assert list(hilbert_dims(D, pts)) == [hilbert_dim(D, m) for m in pts]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_collision_is_quasi_additive(k):
    """Colliding integral segments into 0 or inf does not change any dim R_m."""
    base = suss(k)
    pts = lattice_points_under_level(base.dual, base.tail.ray_sum(), 60)
    ref = hilbert_dims(base, pts)
    for m in range(k + 1):
        for mp in range(k + 1 - m):
            assert np.array_equal(hilbert_dims(suss(k, m, mp), pts), ref)


def test_degeneration_cone_two_point():
    D = catalog.two_point_divisor()
    tc = degenerate_at(D, "0")
    assert tc.product
    assert set(tc.central.sigma.rays) == {(1, 0, 1), (1, 0, -1), (1, 0, 0), (0, 1, 0)} - {(1, 0, 0)}
    assert hilbert_constancy_check(D, tc, (1, 1), 30)


def test_degeneration_cone_suss_y0():
    D = suss(2)
    tc = degenerate_at(D, "0")
    assert not tc.product
    rays = set(tc.central.sigma.rays)
    # (13, 4, 0) is redundant once the height -1 vertices are in
    assert {(2, 1, 5), (-1, 1, 0)} <= rays
    assert tc.eta == (0, 0, 1)
    assert tc.central.gorenstein_u == (0, 1, 0)


def test_generic_point_is_improper_for_suss():
    D = suss(2)
    assert str(D.generic_point()) == "3"
    with pytest.raises(ImproperDegeneration):
        degenerate_at(D, D.generic_point())


@pytest.mark.parametrize("k", [1, 2, 3])
def test_constancy_on_suss_support(k):
    """Constancy at 0 and inf; the generic y_i do not give Q-Gorenstein central fibers."""
    for m in range(k + 1):
        for mp in range(k + 1 - m):
            D = suss(k, m, mp)
            xi = D.tail.ray_sum()
            for y, tc, rep in admissible_degenerations(D, xi, 50):
                if y in (ZERO, INFINITY):
                    assert tc is not None and rep.ok and rep.checked > 0
                    assert tc.central.gorenstein_u is not None
                else:
                    assert tc is None


def test_constancy_failure_reports_mismatches():
    D = catalog.fractional_pair_divisor()
    y = D.generic_point()
    tc = degenerate_at(D, y)
    rep = hilbert_constancy_check(D, tc, (1, 1), 12)
    assert not rep
    assert rep.mismatches
    for m, general, central in rep.mismatches:
        assert m[0] % 2 == 1 and general != central
    with pytest.raises(NoFlatDegeneration):
        general_fiber(D)


def test_central_counts_match_direct_enumeration():
    D = suss(2, 1, 0)
    tc = degenerate_at(D, "0")
    pts = lattice_points_under_level(D.dual, (4, 3), 25)
    counts = central_counts(tc, pts)
    cone = tc.central.dual
    for m, c in zip(pts, counts):
        direct = sum(cone.contains(tuple(m) + (lam,)) for lam in range(-40, 41))
        assert direct == c


def test_candidate_points_order():
    D = suss(3, 1, 0)
    assert [str(y) for y in candidate_points(D)] == ["0", "1", "2", "inf", "3"]


def test_general_fiber_two_point_is_toric():
    D = catalog.two_point_divisor()
    X = general_fiber(D)
    # the two-point divisor is the toric variety whose cone is the degeneration cone
    T = degenerate_at(D, "0").central
    xi = (F(2), F(3))
    assert general_fiber_a0(D, xi) == a0(T, xi + (0,))
    assert X.n == 3


def test_general_fiber_a0_independent_of_point():
    D = suss(2)
    xi = (F(4), F(3))
    vals = []
    for y in ("0", "inf"):
        tc = degenerate_at(D, y)
        vals.append(tc.central.character.restrict(2).a0(xi))
    assert vals[0] == vals[1]
    assert general_fiber_a0(D, xi) == vals[0]


def test_general_fiber_a0_homogeneous():
    D = suss(2)
    xi = (F(4), F(3))
    assert general_fiber_a0(D, tuple(5 * x for x in xi)) == general_fiber_a0(D, xi) / 125


def test_general_fiber_a0_against_truncated_sum():
    D = suss(2)
    X = general_fiber(D)
    xi = tuple(minimize_volume(X).xi_star)
    ts = np.array([0.1, 0.05, 0.025])
    g = ts ** 3 * truncated_index_character(X, xi, ts, 1200)
    extrapolated = g[0] / 3 - 2 * g[1] + 8 * g[2] / 3
    assert abs(extrapolated / general_fiber_a0(D, xi) - 1) < 0.01


@given(st.integers(0, 2**16), st.integers(0, 2))
def test_unimodular_transform_preserves_hilbert(seed, m):
    rng = np.random.default_rng(seed)
    g = unimodular_matrices(2, rng)
    D = suss(2, m, 0)
    Dg = D.transform(g)
    ginv_t = np.round(np.linalg.inv(g).T).astype(np.int64)
    pts = lattice_points_under_level(D.dual, D.tail.ray_sum(), 20)
    assert np.array_equal(hilbert_dims(D, pts), hilbert_dims(Dg, pts @ ginv_t.T))
