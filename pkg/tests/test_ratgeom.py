from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conevol.errors import DegenerateGenerators, NonPositiveDirection, TailMismatch
from conevol.ratgeom import (
    NEG_INF,
    HalfOpenSimplicialCone,
    RationalCone,
    RationalPolyhedron,
    dual_cone,
    fundamental_parallelepiped,
    hilbert_basis,
    is_strictly_convex,
    lattice_points_under_level,
    minkowski_sum,
    support_eval,
    triangulate_halfopen,
    unimodular_matrices,
)

CONIFOLD = [(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]


def cone(*rays):
    return RationalCone.from_rays(rays)


def test_dual_of_orthant_is_orthant():
    o = cone((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert dual_cone(o) == o


def test_dual_of_conifold():
    assert dual_cone(cone(*CONIFOLD)).rays == ((-1, 0, 1), (0, -1, 1), (0, 1, 0), (1, 0, 0))


def test_dual_of_suss_tail():
    assert set(dual_cone(cone((-1, 1), (13, 4))).rays) == {(-4, 13), (1, 1)}


def test_rays_are_primitive_and_irredundant():
    c = cone((2, 0), (0, 3), (1, 1))
    assert c.rays == ((0, 1), (1, 0))


def test_strict_convexity():
    assert not is_strictly_convex(cone((1, 0), (-1, 0), (0, 1)))
    assert is_strictly_convex(cone((-1, 1), (13, 4)))


def test_conifold_dual_triangulation():
    pieces = triangulate_halfopen(dual_cone(cone(*CONIFOLD)))
    assert len(pieces) == 2
    assert all(abs(p.det) == 1 for p in pieces)
    assert sorted(len(p.excluded_facets) for p in pieces) == [0, 1]


def test_parallelepiped_count_equals_det():
    s = HalfOpenSimplicialCone(((1, 0), (1, 5)))
    pts = fundamental_parallelepiped(s)
    assert len(pts) == 5 == abs(s.det)


def test_halfopen_parallelepiped_shifts():
    gens = ((1, 0), (1, 2))
    assert set(fundamental_parallelepiped(HalfOpenSimplicialCone(gens))) == {(0, 0), (1, 1)}
    assert set(fundamental_parallelepiped(HalfOpenSimplicialCone(gens, frozenset({1})))) == {(1, 1), (1, 2)}
    assert set(fundamental_parallelepiped(HalfOpenSimplicialCone(gens, frozenset({0})))) == {(1, 0), (1, 1)}


def test_degenerate_generators():
    with pytest.raises(DegenerateGenerators):
        fundamental_parallelepiped(HalfOpenSimplicialCone(((1, 0), (2, 0))))


def test_support_eval():
    sigma = cone((-1, 1), (13, 4))
    d0 = RationalPolyhedron.point((F(2, 5), F(1, 5)), sigma)
    assert support_eval(d0, (0, 1)) == F(1, 5)
    assert support_eval(RationalPolyhedron.point((0, 0), sigma), (1, 1)) == 0
    assert support_eval(d0, (-1, 0)) == NEG_INF


def test_minkowski_sum():
    sigma = cone((-1, 1), (13, 4))
    d0 = RationalPolyhedron.point((F(2, 5), F(1, 5)), sigma)
    seg = RationalPolyhedron(((0, 0), (1, 0)), sigma)
    assert minkowski_sum(d0, seg).vertices == ((F(2, 5), F(1, 5)), (F(7, 5), F(1, 5)))
    assert minkowski_sum(seg, seg).vertices == ((0, 0), (2, 0))
    with pytest.raises(TailMismatch):
        minkowski_sum(seg, RationalPolyhedron.point((0, 0), cone((1, 0), (0, 1))))


def test_hilbert_basis():
    assert hilbert_basis(cone((1, 0), (1, 5))) == [(1, i) for i in range(6)]


def test_lattice_points_under_level():
    pts = lattice_points_under_level(cone((1, 0), (0, 1)), (1, 2), 3)
    assert {tuple(p) for p in pts} == {(0, 0), (0, 1), (1, 0), (2, 0)}
    with pytest.raises(NonPositiveDirection):
        lattice_points_under_level(cone((1, 0), (0, 1)), (1, -1), 3)


def _halfopen_partition_ok(c, xi, level):
    """Every lattice point below ``level`` lies in exactly one half-open piece."""
    pieces = triangulate_halfopen(c)
    pts = lattice_points_under_level(c, xi, level)
    for p in pts:
        hits = 0
        for piece in pieces:
            g = np.array(piece.generators, dtype=float).T
            lam = np.linalg.solve(g, p.astype(float))
            ok = True
            for i, l in enumerate(lam):
                if i in piece.excluded_facets:
                    ok &= l > 1e-12
                else:
                    ok &= l > -1e-12
            hits += ok
        if hits != 1:
            return False
    return True


@pytest.mark.parametrize(
    "rays",
    [CONIFOLD, [(1, 0, 0), (1, 1, 0), (1, 2, 2), (1, 0, 1)], [(1, 0), (1, 2)], [(1, 0, 0), (0, 1, 0), (-1, -1, 3)]],
)
def test_triangulation_partitions_lattice_points(rays):
    sigma = cone(*rays)
    assert _halfopen_partition_ok(dual_cone(sigma), sigma.ray_sum(), 12)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_unimodular_matrices(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        assert abs(round(np.linalg.det(unimodular_matrices(d, rng)))) == 1


@given(st.integers(0, 10_000))
def test_dual_of_dual_is_identity(seed):
    rng = np.random.default_rng(seed)
    g = unimodular_matrices(3, rng)
    c = cone(*CONIFOLD).transform(g.tolist())
    assert dual_cone(dual_cone(c)) == c


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(1, 4)), min_size=3, max_size=6))
def test_dual_contains_exactly_nonnegative_pairings(rays):
    c = cone(*rays)
    if not c.is_full_dimensional:
        return
    d = dual_cone(c)
    for m in product(range(-2, 3), repeat=3):
        assert d.contains(m) == all(sum(a * b for a, b in zip(m, r)) >= 0 for r in c.rays)
