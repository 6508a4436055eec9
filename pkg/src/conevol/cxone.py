"""Complexity-one T-varieties from polyhedral divisors on the projective line.

A divisor ``D = sum_y D_y ⊗ y`` with common tail ``sigma`` defines the graded
ring with ``dim R_m = max(0, 1 + sum_y floor(h_y(m)))`` where ``h_y`` is the
support function of ``D_y``.  Degenerating at a point ``y`` moves ``D_y`` to
height +1 and the Minkowski sum of all other terms to height -1 inside
``N ⊕ Z``; the result is a toric cone that is the central fiber of a test
configuration whenever the multigraded Hilbert function is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DomainError,
    ImproperDegeneration,
    ImproperDivisor,
    InvalidParams,
    NoFlatDegeneration,
    NotFullDimensional,
    OutsideMomentCone,
    ParseError,
    TailMismatch,
)
from .ratgeom import (
    RationalCone,
    RationalPolyhedron,
    as_fraction,
    dual_cone,
    hilbert_basis,
    is_strictly_convex,
    lattice_points_under_level,
    minkowski_sum,
    primitive,
    support_eval,
)
from .testconfig import SpecialTestConfig
from .toric import IndexCharacter, ToricConeVariety, check_reeb


@dataclass(frozen=True)
class MarkedPoint:
    """A point of the projective line; ``value=None`` is the point at infinity."""

    value: Fraction | None

    def __post_init__(self):
        if self.value is not None:
            object.__setattr__(self, "value", as_fraction(self.value))

    @classmethod
    def parse(cls, text) -> MarkedPoint:
        if isinstance(text, MarkedPoint):
            return text
        if isinstance(text, (int, Fraction)):
            return cls(Fraction(text))
        s = str(text).strip()
        if s in ("inf", "∞"):
            return cls(None)
        if "." in s or "e" in s.lower():
            raise ParseError(f"marked point must be 'inf' or an exact rational, got {s!r}")
        try:
            return cls(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad marked point {s!r}") from exc

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    def sort_key(self):
        return (self.value is None, self.value if self.value is not None else 0)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


ZERO = MarkedPoint(Fraction(0))
INFINITY = MarkedPoint(None)


def trivial_polyhedron(tail: RationalCone) -> RationalPolyhedron:
    return RationalPolyhedron.point((0,) * tail.ambient_dim, tail)


def _is_trivial(p: RationalPolyhedron) -> bool:
    return p.vertices == ((Fraction(0),) * p.ambient_dim,)


class PolyhedralDivisor:
    """A proper polyhedral divisor on the projective line.

    ``terms`` may list a point more than once; repeated points collide and
    their polyhedra are added.  Points that are not listed carry the tail
    cone itself.
    """

    def __init__(self, tail: RationalCone, terms: Iterable[tuple] | Mapping, check: bool = True):
        if not tail.is_full_dimensional or not is_strictly_convex(tail):
            raise NotFullDimensional(f"tail cone {tail} must be full-dimensional and pointed")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[MarkedPoint, RationalPolyhedron] = {}
        for y, poly in items:
            y = MarkedPoint.parse(y)
            if poly.tail != tail:
                raise TailMismatch(f"term at {y} has tail {poly.tail}, expected {tail}")
            merged[y] = minkowski_sum(merged[y], poly) if y in merged else poly
        self.tail = tail
        self.terms: tuple[tuple[MarkedPoint, RationalPolyhedron], ...] = tuple(sorted(merged.items()))
        if check:
            self.check_proper()

    @property
    def rank(self) -> int:
        return self.tail.ambient_dim

    @cached_property
    def dual(self) -> RationalCone:
        return dual_cone(self.tail)

    @property
    def points(self) -> list[MarkedPoint]:
        return [y for y, _ in self.terms]

    @property
    def support(self) -> list[MarkedPoint]:
        """Points whose polyhedron differs from the tail cone."""
        return [y for y, p in self.terms if not _is_trivial(p)]

    def term(self, y) -> RationalPolyhedron:
        y = MarkedPoint.parse(y)
        for z, p in self.terms:
            if z == y:
                return p
        return trivial_polyhedron(self.tail)

    def degree(self, m) -> Fraction:
        return sum((support_eval(p, m) for _, p in self.terms), Fraction(0))

    def check_proper(self) -> None:
        """Operational properness: ``deg D(m) >= 0`` on the Hilbert basis, ``> 0`` inside."""
        for m in hilbert_basis(self.dual):
            if self.degree(m) < 0:
                raise ImproperDivisor(f"deg D({m}) = {self.degree(m)} < 0")
        interior = self.dual.ray_sum()
        if not self.degree(interior) > 0:
            raise ImproperDivisor(f"deg D vanishes at the interior character {interior}")

    def transform(self, g) -> PolyhedralDivisor:
        """Apply the integer matrix ``g`` to ``N``."""
        g = [[int(x) for x in row] for row in np.asarray(g)]
        return PolyhedralDivisor(self.tail.transform(g), [(y, p.transform(g)) for y, p in self.terms])

    def generic_point(self) -> MarkedPoint:
        """Smallest positive integer position not used by the divisor."""
        used = {y.value for y in self.points if not y.is_infinity}
        k = 1
        while Fraction(k) in used:
            k += 1
        return MarkedPoint(Fraction(k))

    def __eq__(self, other):
        return isinstance(other, PolyhedralDivisor) and (self.tail, self.terms) == (other.tail, other.terms)

    def __hash__(self):
        return hash((self.tail, self.terms))

    def __repr__(self) -> str:
        body = ", ".join(f"{y}: {p!r}" for y, p in self.terms)
        return f"PolyhedralDivisor({body})"


# ---------------------------------------------------------------------------
# the family of Süß


@dataclass(frozen=True)
class SussFamilyParams:
    k: int
    m: int = 0
    mp: int = 0
    generic_positions: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise InvalidParams("k must be a positive integer")
        if self.m < 0 or self.mp < 0 or self.m + self.mp > self.k:
            raise InvalidParams("need 0 <= m, mp and m + mp <= k")
        free = self.k - self.m - self.mp
        pos = tuple(as_fraction(x) for x in self.generic_positions) or tuple(
            Fraction(i) for i in range(1, free + 1)
        )
        if len(pos) != free:
            raise InvalidParams(f"expected {free} generic positions, got {len(pos)}")
        if len(set(pos)) != len(pos) or Fraction(0) in pos:
            raise InvalidParams("generic positions must be distinct and nonzero")
        object.__setattr__(self, "generic_positions", pos)


def suss_tail(k: int) -> RationalCone:
    return RationalCone.from_rays([(-1, 1), (15 * k - 4, 8)])


def suss_family(p: SussFamilyParams) -> PolyhedralDivisor:
    sigma = suss_tail(p.k)
    seg = RationalPolyhedron(((0, 0), (1, 0)), sigma)
    d0 = RationalPolyhedron.point((Fraction(2, 5), Fraction(1, 5)), sigma)
    dinf = RationalPolyhedron.point((Fraction(-2, 3), Fraction(1, 3)), sigma)
    terms = [(ZERO, d0), (INFINITY, dinf)]
    terms += [(ZERO, seg)] * p.m + [(INFINITY, seg)] * p.mp
    terms += [(MarkedPoint(y), seg) for y in p.generic_positions]
    return PolyhedralDivisor(sigma, terms)


# ---------------------------------------------------------------------------
# Hilbert function


def _integer_vertices(p: RationalPolyhedron) -> tuple[np.ndarray, int]:
    den = 1
    for v in p.vertices:
        for x in v:
            den = den * x.denominator // np.gcd(den, x.denominator)
    return np.array([[int(x * den) for x in v] for v in p.vertices], dtype=np.int64), int(den)


def _floor_support(p: RationalPolyhedron, pts: np.ndarray) -> np.ndarray:
    verts, den = _integer_vertices(p)
    return np.min(pts @ verts.T, axis=1) // den


def hilbert_dims(D: PolyhedralDivisor, pts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`hilbert_dim` for characters already known to lie in the moment cone."""
    pts = np.asarray(pts, dtype=np.int64).reshape(-1, D.rank)
    total = np.ones(len(pts), dtype=np.int64)
    for _, p in D.terms:
        total += _floor_support(p, pts)
    return np.maximum(total, 0)


def hilbert_dim(D: PolyhedralDivisor, m) -> int:
    m = tuple(int(x) for x in m)
    if len(m) != D.rank or not D.dual.contains(m):
        raise OutsideMomentCone(f"{m} is not in the moment cone {D.dual}")
    return max(0, 1 + sum(int(np.floor(support_eval(p, m))) for _, p in D.terms))


def characters(D: PolyhedralDivisor, xi, cutoff) -> tuple[np.ndarray, np.ndarray]:
    """Characters with ``<m, xi> < cutoff`` and ``dim R_m > 0``, with their dimensions."""
    pts = lattice_points_under_level(D.dual, xi, cutoff)
    dims = hilbert_dims(D, pts)
    keep = dims > 0
    return pts[keep], dims[keep]


# ---------------------------------------------------------------------------
# degenerations


@dataclass(frozen=True)
class DegenerationSource:
    point: MarkedPoint
    divisor: PolyhedralDivisor


def degeneration_cone(D: PolyhedralDivisor, y) -> RationalCone:
    y = MarkedPoint.parse(y)
    here = D.term(y)
    rest = trivial_polyhedron(D.tail)
    for z, p in D.terms:
        if z != y:
            rest = minkowski_sum(rest, p)
    rays = [tuple(v) + (Fraction(1),) for v in here.vertices]
    rays += [tuple(w) + (Fraction(-1),) for w in rest.vertices]
    rays += [tuple(r) + (0,) for r in D.tail.rays]
    return RationalCone.from_rays([primitive(r) for r in rays])


def degenerate_at(D: PolyhedralDivisor, y, xi=None) -> SpecialTestConfig:
    """Toric degeneration of ``D`` at the point ``y``, with ``eta = (0_N, 1)``."""
    y = MarkedPoint.parse(y)
    cone = degeneration_cone(D, y)
    if not cone.is_full_dimensional or not is_strictly_convex(cone):
        raise ImproperDegeneration(f"degeneration cone at {y} is not pointed: {cone}")
    try:
        central = ToricConeVariety(cone)
    except DomainError as exc:
        raise ImproperDegeneration(f"central fiber at {y} is not Q-Gorenstein: {exc}") from exc
    eta = (0,) * D.rank + (1,)
    # with at most two nontrivial points the variety is already toric, and the
    # central fiber is again that toric variety: the configuration is a product
    product = len(D.support) <= 2
    tc = SpecialTestConfig(central, eta, base_rank=D.rank, source=DegenerationSource(y, D), product=product)
    return tc.with_xi(xi) if xi is not None else tc


def lambda_ranges(tc: SpecialTestConfig, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bounds ``lo <= lambda <= hi`` with ``(m, lambda)`` in the central moment cone.

    Read directly off the rays of the central cone, so it is independent of the
    support-function route used by :func:`hilbert_dims`.  Characters outside
    the projected cone get an empty range.
    """
    r = tc.base_rank
    pts = np.asarray(pts, dtype=np.int64).reshape(-1, r)
    lo = np.full(len(pts), np.iinfo(np.int64).min // 4, dtype=np.int64)
    hi = np.full(len(pts), np.iinfo(np.int64).max // 4, dtype=np.int64)
    for ray in tc.central.sigma.rays:
        base = pts @ np.array(ray[:r], dtype=np.int64)
        h = ray[r]
        if h > 0:
            lo = np.maximum(lo, -(base // h))  # ceil(-base / h)
        elif h < 0:
            hi = np.minimum(hi, base // (-h))
        else:
            hi = np.where(base >= 0, hi, lo - 1)
    return lo, hi


def central_counts(tc: SpecialTestConfig, pts: np.ndarray) -> np.ndarray:
    """Number of lattice ``lambda`` with ``(m, lambda)`` in the central moment cone."""
    lo, hi = lambda_ranges(tc, pts)
    return np.maximum(hi - lo + 1, 0)


@dataclass(frozen=True)
class ConstancyReport:
    ok: bool
    checked: int
    mismatches: tuple  # of (m, general dim, central count)

    def __bool__(self):
        return self.ok


def hilbert_constancy_check(D: PolyhedralDivisor, tc: SpecialTestConfig, xi, cutoff) -> ConstancyReport:
    pts = lattice_points_under_level(D.dual, xi, cutoff)
    gen = hilbert_dims(D, pts)
    cen = central_counts(tc, pts)
    bad = np.nonzero(gen != cen)[0]
    mism = tuple((tuple(int(x) for x in pts[i]), int(gen[i]), int(cen[i])) for i in bad)
    return ConstancyReport(not mism, len(pts), mism)


def candidate_points(D: PolyhedralDivisor) -> list[MarkedPoint]:
    """Support points plus one generic point, in a fixed order."""
    return sorted(set(D.support)) + [D.generic_point()]


def admissible_degenerations(D: PolyhedralDivisor, xi, cutoff=50):
    """Yield ``(point, tc, report)`` for each candidate point; ``tc`` is None if improper."""
    for y in candidate_points(D):
        try:
            tc = degenerate_at(D, y, xi)
        except ImproperDegeneration:
            yield y, None, None
            continue
        yield y, tc, hilbert_constancy_check(D, tc, xi, cutoff)


@dataclass(frozen=True)
class GeneralFiber:
    """The complexity-one variety seen through a flat toric degeneration.

    Exposes the same interface as :class:`ToricConeVariety` where the
    optimizer needs it: ``sigma`` (Reeb cone), ``gorenstein_u``, ``n`` and
    ``character``.
    """

    divisor: PolyhedralDivisor
    via: SpecialTestConfig

    @property
    def sigma(self) -> RationalCone:
        return self.divisor.tail

    @property
    def n(self) -> int:
        return self.divisor.rank + 1

    @cached_property
    def gorenstein_u(self) -> tuple[Fraction, ...]:
        return tuple(self.via.central.gorenstein_u[: self.divisor.rank])

    @cached_property
    def character(self) -> IndexCharacter:
        return self.via.central.character.restrict(self.divisor.rank)

    @cached_property
    def dual(self) -> RationalCone:
        return self.divisor.dual

    def characters(self, xi, cutoff):
        return characters(self.divisor, xi, cutoff)


def general_fiber(D: PolyhedralDivisor, xi=None, cutoff=50) -> GeneralFiber:
    """Pick the first candidate point whose degeneration passes the constancy check.

    ``xi`` defaults to the ray sum of the tail; only the set of characters
    checked depends on it.
    """
    if xi is None:
        xi = D.tail.ray_sum()
    for y, tc, rep in admissible_degenerations(D, xi, cutoff):
        if tc is not None and rep.ok:
            return GeneralFiber(D, tc)
    raise NoFlatDegeneration("no candidate point gives a flat toric degeneration")


def general_fiber_a0(D: PolyhedralDivisor, xi):
    X = general_fiber(D)
    check_reeb(X, xi)
    return X.character.a0(xi)


__all__ = [
    "INFINITY",
    "ZERO",
    "ConstancyReport",
    "DegenerationSource",
    "GeneralFiber",
    "MarkedPoint",
    "PolyhedralDivisor",
    "SussFamilyParams",
    "admissible_degenerations",
    "candidate_points",
    "central_counts",
    "characters",
    "degenerate_at",
    "degeneration_cone",
    "general_fiber",
    "general_fiber_a0",
    "hilbert_constancy_check",
    "hilbert_dim",
    "hilbert_dims",
    "lambda_ranges",
    "suss_family",
    "suss_tail",
]
