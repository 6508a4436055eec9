"""Exact rational polyhedral geometry for small ambient dimension.

Cones are stored by primitive integer generators, polyhedra by rational
vertices plus a tail cone.  Everything here is exact (``int`` /
``Fraction``); floating point only enters :func:`lattice_points_under_level`
when the caller passes a float direction.

The dual cone is computed by a double-description pass over halfspaces,
which is plenty at ambient dimension <= 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateGenerators,
    NonPositiveDirection,
    NotFullDimensional,
    TailMismatch,
)

NEG_INF = -math.inf

IntVec = tuple[int, ...]
RatVec = tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# small exact linear algebra


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"expected an exact rational, got {x!r}")


def rational_vector(coords: Iterable) -> RatVec:
    return tuple(as_fraction(c) for c in coords)


def is_exact(v: Iterable) -> bool:
    return all(isinstance(c, (int, Fraction, np.integer)) for c in v)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def primitive(v: Sequence) -> IntVec:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    fr = [as_fraction(x) for x in v]
    den = math.lcm(*(f.denominator for f in fr))
    ints = [int(f * den) for f in fr]
    g = math.gcd(*ints)
    if g == 0:
        raise ValueError("zero vector has no primitive generator")
    return tuple(x // g for x in ints)


def rank(rows: Sequence[Sequence]) -> int:
    m = [[as_fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve(a: Sequence[Sequence], b: Sequence) -> RatVec | None:
    """Exact solution of ``a x = b`` for a consistent system with a unique solution.

    Returns None when the system is inconsistent or underdetermined.
    """
    nrows, ncols = len(a), len(a[0])
    m = [[as_fraction(x) for x in row] + [as_fraction(y)] for row, y in zip(a, b)]
    r = 0
    pivots = []
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    if any(m[i][-1] != 0 for i in range(r, nrows)):
        return None
    if len(pivots) < ncols:
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][-1]
    return tuple(x)


def int_det(mat: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    m = [list(map(int, row)) for row in mat]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def int_adjugate(mat: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(mat)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(map(list, mat)) if k != i]
            adj[j][i] = (-1) ** (i + j) * int_det(minor)
    return adj


# ---------------------------------------------------------------------------
# double description


def _double_description(halfspaces: Sequence[IntVec], d: int) -> tuple[list[IntVec], list[IntVec]]:
    """Generators of ``{x : <a, x> >= 0 for all a}``.

    Returns ``(lineality_basis, rays)``; the cone is span(lineality) + cone(rays),
    with the rays extreme modulo the lineality space.
    """
    lin: list[IntVec] = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    rays: list[IntVec] = []
    seen: list[IntVec] = []

    for a in halfspaces:
        if not any(a):
            continue
        vals = [dot(a, v) for v in lin]
        idx = next((i for i, v in enumerate(vals) if v != 0), None)
        if idx is not None:
            l0 = lin[idx]
            s = vals[idx]
            if s < 0:
                l0, s = tuple(-x for x in l0), -s
            new_lin = [
                primitive([s * x - dot(a, v) * y for x, y in zip(v, l0)])
                for i, v in enumerate(lin)
                if i != idx
            ]
            new_rays = []
            for r in rays:
                w = [s * x - dot(a, r) * y for x, y in zip(r, l0)]
                new_rays.append(primitive(w))
            lin = new_lin
            rays = _unique(new_rays + [primitive(l0)])
        else:
            pos = [r for r in rays if dot(a, r) > 0]
            zer = [r for r in rays if dot(a, r) == 0]
            neg = [r for r in rays if dot(a, r) < 0]
            target = d - len(lin) - 2
            combos = []
            for p in pos:
                zp = {i for i, h in enumerate(seen) if dot(h, p) == 0}
                for n in neg:
                    common = [seen[i] for i in zp if dot(seen[i], n) == 0]
                    if (rank(common) if common else 0) != target:
                        continue
                    w = [dot(a, p) * x - dot(a, n) * y for x, y in zip(n, p)]
                    combos.append(primitive(w))
            rays = _unique(pos + zer + combos)
        seen.append(tuple(a))
    return lin, rays


def _unique(vs: Iterable[IntVec]) -> list[IntVec]:
    out, got = [], set()
    for v in vs:
        if v not in got:
            got.add(v)
            out.append(v)
    return out


def _in_generated_cone(v: Sequence, gens: Sequence[IntVec], d: int) -> bool:
    if not any(v):
        return True
    if not gens:
        return False
    lin, rays = _double_description(gens, d)
    return all(dot(h, v) == 0 for h in lin) and all(dot(h, v) >= 0 for h in rays)


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class RationalCone:
    """Cone generated by primitive integer rays (irredundant, sorted).

    Cones containing a line are allowed; their line directions appear as
    pairs ``r, -r`` among the rays.
    """

    ambient_dim: int
    rays: tuple[IntVec, ...]

    def __post_init__(self):
        d = int(self.ambient_dim)
        if d <= 0:
            raise ValueError("ambient_dim must be positive")
        prims = []
        for r in self.rays:
            if len(r) != d:
                raise ValueError(f"ray {r} has wrong length for ambient dimension {d}")
            if any(as_fraction(x) != 0 for x in r):
                prims.append(primitive(r))
        prims = sorted(set(prims))
        kept = list(prims)
        for r in prims:
            others = [q for q in kept if q != r]
            if _in_generated_cone(r, others, d):
                kept = others
        object.__setattr__(self, "ambient_dim", d)
        object.__setattr__(self, "rays", tuple(sorted(kept)))

    @classmethod
    def from_rays(cls, rays: Iterable[Sequence], ambient_dim: int | None = None) -> RationalCone:
        rays = [tuple(r) for r in rays]
        if ambient_dim is None:
            if not rays:
                raise ValueError("ambient_dim needed for the zero cone")
            ambient_dim = len(rays[0])
        return cls(ambient_dim, tuple(rays))

    @cached_property
    def _halfspaces(self) -> tuple[list[IntVec], list[IntVec]]:
        return _double_description(self.rays, self.ambient_dim)

    @property
    def dim(self) -> int:
        return rank(self.rays) if self.rays else 0

    @property
    def is_full_dimensional(self) -> bool:
        return self.dim == self.ambient_dim

    @cached_property
    def facet_normals(self) -> tuple[IntVec, ...]:
        """Inward normals of the facets (the rays of the dual, for pointed full-dim cones)."""
        lin, rays = self._halfspaces
        return tuple(sorted(rays))

    def contains(self, v: Sequence) -> bool:
        lin, rays = self._halfspaces
        return all(dot(h, v) == 0 for h in lin) and all(dot(h, v) >= 0 for h in rays)

    def contains_interior(self, v: Sequence) -> bool:
        """Strict membership for full-dimensional cones."""
        lin, rays = self._halfspaces
        return not lin and all(dot(h, v) > 0 for h in rays)

    def faces_of_ray(self, i: int) -> list[int]:
        return [j for j, h in enumerate(self.facet_normals) if dot(h, self.rays[i]) == 0]

    def ray_sum(self) -> IntVec:
        return tuple(sum(c) for c in zip(*self.rays)) if self.rays else (0,) * self.ambient_dim

    def transform(self, g: Sequence[Sequence[int]]) -> RationalCone:
        """Image under the integer matrix ``g`` acting on column vectors."""
        return RationalCone(self.ambient_dim, tuple(tuple(dot(row, r) for row in g) for r in self.rays))

    def __repr__(self) -> str:
        return f"RationalCone({', '.join(map(str, self.rays))})"


def dual_cone(c: RationalCone) -> RationalCone:
    """``{x : <x, r> >= 0 for every ray r of c}`` with irredundant primitive rays."""
    lin, rays = _double_description(c.rays, c.ambient_dim)
    gens = list(rays) + list(lin) + [tuple(-x for x in v) for v in lin]
    return RationalCone(c.ambient_dim, tuple(gens))


def is_strictly_convex(c: RationalCone) -> bool:
    """True iff ``c`` contains no line."""
    return dual_cone(c).is_full_dimensional


# ---------------------------------------------------------------------------
# half-open triangulation


@dataclass(frozen=True)
class HalfOpenSimplicialCone:
    """Simplicial cone with some facets removed.

    ``excluded_facets`` holds the indices ``i`` whose opposite facet
    (coefficient of generator ``i`` equal to zero) is left out.
    """

    generators: tuple[IntVec, ...]
    excluded_facets: frozenset[int] = frozenset()
    parallelepiped_points: tuple[IntVec, ...] = field(default=(), compare=False)

    @property
    def det(self) -> int:
        return abs(int_det(self.generators))


def fundamental_parallelepiped(s: HalfOpenSimplicialCone) -> list[IntVec]:
    """Lattice points ``sum t_i g_i`` with ``t_i in [0,1)``, or ``(0,1]`` for excluded facets."""
    gens = [list(map(int, g)) for g in s.generators]
    d = len(gens)
    if d == 0 or any(len(g) != d for g in gens):
        raise DegenerateGenerators("need n generators in dimension n")
    cols = [[gens[j][i] for j in range(d)] for i in range(d)]
    det = int_det(cols)
    if det == 0:
        raise DegenerateGenerators(f"generators {s.generators} are linearly dependent")
    adj = np.array(int_adjugate(cols), dtype=object if abs(det) > 2**40 else np.int64)
    sgn = 1 if det > 0 else -1
    D = abs(det)
    if D == 1:
        base = np.zeros(d, dtype=np.int64)
        if s.excluded_facets:
            base = np.sum([gens[i] for i in s.excluded_facets], axis=0)
        return [tuple(int(x) for x in base)]
    lo = [sum(min(0, g[i]) for g in gens) for i in range(d)]
    hi = [sum(max(0, g[i]) for g in gens) for i in range(d)]
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    w = sgn * (grid @ adj.T)
    ok = np.ones(len(grid), dtype=bool)
    for i in range(d):
        if i in s.excluded_facets:
            ok &= (w[:, i] > 0) & (w[:, i] <= D)
        else:
            ok &= (w[:, i] >= 0) & (w[:, i] < D)
    pts = sorted(tuple(int(x) for x in p) for p in grid[ok])
    if len(pts) != D:
        raise AssertionError(f"parallelepiped enumeration found {len(pts)} points, expected {D}")
    return pts


def _face_facets(c: RationalCone, face: frozenset[int], k: int) -> set[frozenset[int]]:
    out = set()
    for h in c.facet_normals:
        sub = frozenset(i for i in face if dot(h, c.rays[i]) == 0)
        if len(sub) >= k - 1 and sub != face and rank([c.rays[i] for i in sub]) == k - 1:
            out.add(sub)
    return out


def _pulling(c: RationalCone, face: frozenset[int], k: int, order: Sequence[int]) -> list[tuple[int, ...]]:
    if len(face) == k:
        return [tuple(sorted(face))]
    apex = next(i for i in order if i in face)
    simplices = []
    for f in _face_facets(c, face, k):
        if apex in f:
            continue
        for s in _pulling(c, f, k - 1, order):
            simplices.append(tuple(sorted(s + (apex,))))
    return simplices


_PERTURBATIONS = (7, 97, 997, 9973, 99991)


def triangulate_halfopen(
    c: RationalCone,
    order: Sequence[int] | None = None,
    reference: Sequence | None = None,
) -> list[HalfOpenSimplicialCone]:
    """Half-open pulling triangulation of a full-dimensional pointed cone.

    Every lattice point of ``c`` lies in exactly one returned piece.  ``order``
    chooses the pulling sequence of ray indices and ``reference`` an interior
    point deciding which shared facets are dropped; the defaults give a
    deterministic result.
    """
    d = c.ambient_dim
    if not c.is_full_dimensional:
        raise NotFullDimensional(f"{c} has empty interior")
    if not is_strictly_convex(c):
        raise NotFullDimensional(f"{c} is not strictly convex")
    order = list(range(len(c.rays))) if order is None else list(order)
    simplices = sorted(set(_pulling(c, frozenset(range(len(c.rays))), d, order)))

    if reference is not None:
        candidates = [rational_vector(reference)]
    else:
        s = c.ray_sum()
        candidates = []
        for p in _PERTURBATIONS:
            eps = Fraction(1, p)
            candidates.append(tuple(Fraction(x) + eps ** (i + 1) for i, x in enumerate(s)))
    for q in candidates:
        if not c.contains_interior(q):
            continue
        pieces = []
        for simplex in simplices:
            gens = [c.rays[i] for i in simplex]
            lam = solve([[g[r] for g in gens] for r in range(d)], q)
            if lam is None or any(x == 0 for x in lam):
                break
            excluded = frozenset(i for i, x in enumerate(lam) if x < 0)
            piece = HalfOpenSimplicialCone(tuple(gens), excluded)
            pts = fundamental_parallelepiped(piece)
            pieces.append(HalfOpenSimplicialCone(tuple(gens), excluded, tuple(pts)))
        else:
            return pieces
    raise ValueError("reference point is not generic for this triangulation")


# ---------------------------------------------------------------------------
# polyhedra


@dataclass(frozen=True)
class RationalPolyhedron:
    """``conv(vertices) + tail`` with an irredundant vertex list."""

    vertices: tuple[RatVec, ...]
    tail: RationalCone

    def __post_init__(self):
        verts = sorted(set(rational_vector(v) for v in self.vertices))
        if not verts:
            raise ValueError("a polyhedron needs at least one vertex")
        d = self.tail.ambient_dim
        if any(len(v) != d for v in verts):
            raise ValueError("vertex dimension does not match the tail cone")
        kept = list(verts)
        if len(verts) > 1:
            tail_gens = [tuple(r) + (0,) for r in self.tail.rays]
            for v in verts:
                others = [primitive(tuple(w) + (1,)) for w in kept if w != v]
                if _in_generated_cone(tuple(v) + (Fraction(1),), others + tail_gens, d + 1):
                    kept.remove(v)
        object.__setattr__(self, "vertices", tuple(kept))

    @classmethod
    def point(cls, v: Sequence, tail: RationalCone) -> RationalPolyhedron:
        return cls((rational_vector(v),), tail)

    @property
    def ambient_dim(self) -> int:
        return self.tail.ambient_dim

    @property
    def is_lattice(self) -> bool:
        return all(x.denominator == 1 for v in self.vertices for x in v)

    def transform(self, g: Sequence[Sequence[int]]) -> RationalPolyhedron:
        verts = tuple(tuple(dot(row, v) for row in g) for v in self.vertices)
        return RationalPolyhedron(verts, self.tail.transform(g))

    def __repr__(self) -> str:
        vs = ", ".join("(" + ",".join(str(x) for x in v) + ")" for v in self.vertices)
        return f"conv({vs}) + {self.tail!r}"


def support_eval(p: RationalPolyhedron, m: Sequence):
    """``min_{v in p} <m, v>``; ``-inf`` when ``m`` is negative on a tail ray."""
    if len(m) != p.ambient_dim:
        raise ValueError("dimension mismatch")
    if any(dot(m, r) < 0 for r in p.tail.rays):
        return NEG_INF
    return min(dot(m, v) for v in p.vertices)


def minkowski_sum(p: RationalPolyhedron, q: RationalPolyhedron) -> RationalPolyhedron:
    if p.tail != q.tail:
        raise TailMismatch(f"tails differ: {p.tail} vs {q.tail}")
    verts = {tuple(a + b for a, b in zip(v, w)) for v in p.vertices for w in q.vertices}
    return RationalPolyhedron(tuple(verts), p.tail)


# ---------------------------------------------------------------------------
# lattice points


def hilbert_basis(c: RationalCone) -> list[IntVec]:
    """Minimal generating set of the monoid ``c ∩ Z^n`` (pointed, full-dimensional)."""
    cands = set()
    for piece in triangulate_halfopen(c):
        closed = HalfOpenSimplicialCone(piece.generators)
        cands.update(fundamental_parallelepiped(closed))
        cands.update(piece.generators)
    zero = (0,) * c.ambient_dim
    cands.discard(zero)
    basis = []
    for x in sorted(cands):
        reducible = any(
            y != x and c.contains(tuple(a - b for a, b in zip(x, y))) for y in cands
        )
        if not reducible:
            basis.append(x)
    return basis


def lattice_points_under_level(c: RationalCone, xi: Sequence, cutoff) -> np.ndarray:
    """All lattice points ``m`` of ``c`` with ``<m, xi> < cutoff``, as an int array.

    With exact ``xi`` and ``cutoff`` the level test is exact integer arithmetic.
    The enumeration scans a bounding box and filters by the facet inequalities,
    so it is independent of any triangulation.
    """
    d = c.ambient_dim
    if len(xi) != d:
        raise ValueError("dimension mismatch")
    if not c.rays or not is_strictly_convex(c):
        raise NonPositiveDirection("cone must be pointed and nonzero")
    exact = is_exact(xi) and isinstance(cutoff, (int, Fraction))
    levels = [dot(r, xi) for r in c.rays]
    if any(v <= 0 for v in levels):
        raise NonPositiveDirection(f"direction {tuple(xi)} is not positive on {c}")
    if cutoff <= 0:
        return np.zeros((0, d), dtype=np.int64)
    # polytope vertices: 0 and r * cutoff / <r, xi>
    ext = [[float(x) * float(cutoff) / float(lv) for x in r] for r, lv in zip(c.rays, levels)]
    lo = [math.floor(min(0.0, *(e[i] for e in ext))) for i in range(d)]
    hi = [math.ceil(max(0.0, *(e[i] for e in ext))) for i in range(d)]
    normals = np.array(c.facet_normals, dtype=np.int64)
    if exact:
        xf = [as_fraction(x) for x in xi]
        den = math.lcm(*(f.denominator for f in xf), as_fraction(cutoff).denominator)
        xi_int = np.array([int(f * den) for f in xf], dtype=np.int64)
        cut_int = int(as_fraction(cutoff) * den)
    else:
        xi_f = np.array([float(x) for x in xi])
        cut_f = float(cutoff)
    rest = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo[1:], hi[1:])]
    tail = (
        np.stack(np.meshgrid(*rest, indexing="ij"), axis=-1).reshape(-1, d - 1)
        if d > 1
        else np.zeros((1, 0), dtype=np.int64)
    )
    chunks = []
    for x0 in range(lo[0], hi[0] + 1):
        pts = np.empty((len(tail), d), dtype=np.int64)
        pts[:, 0] = x0
        pts[:, 1:] = tail
        ok = np.all(pts @ normals.T >= 0, axis=1)
        if exact:
            ok &= pts @ xi_int < cut_int
        else:
            ok &= pts @ xi_f < cut_f
        if ok.any():
            chunks.append(pts[ok])
    if not chunks:
        return np.zeros((0, d), dtype=np.int64)
    return np.concatenate(chunks)


def unimodular_matrices(d: int, rng: np.random.Generator, steps: int = 6) -> np.ndarray:
    """Random element of GL(d, Z) as a product of elementary matrices."""
    if d == 1:
        return np.array([[rng.choice([-1, 1])]], dtype=np.int64)
    g = np.eye(d, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(d, size=2, replace=False)
        e = np.eye(d, dtype=np.int64)
        e[i, j] = rng.integers(-2, 3)
        g = e @ g
    if rng.integers(2):
        g[[0, 1]] = g[[1, 0]]
    return g


__all__ = [
    "NEG_INF",
    "HalfOpenSimplicialCone",
    "RationalCone",
    "RationalPolyhedron",
    "dual_cone",
    "fundamental_parallelepiped",
    "hilbert_basis",
    "is_strictly_convex",
    "lattice_points_under_level",
    "minkowski_sum",
    "primitive",
    "support_eval",
    "triangulate_halfopen",
]
