"""Toric Fano cones and their index characters.

The index character ``F(xi, t) = sum_m exp(-t <m, xi>)`` over the lattice
points of the moment cone has the Laurent expansion

    F(xi, t) = a0(xi) / t^n - a1(xi) / (2 t^(n-1)) + O(t^(2-n)).

Both coefficients are read off a half-open triangulation of the moment cone:
a piece with generators ``u_j`` and parallelepiped points ``P`` contributes
``|P| / prod <u_j, xi>`` to ``a0`` and
``(2 sum_P <p, xi> - |P| sum_j <u_j, xi>) / prod <u_j, xi>`` to ``a1``.

Rational ``xi`` gives exact ``Fraction`` results; anything else goes
through numpy in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import EmptySupport, NotFullDimensional, NotQGorenstein, ReebConeViolation
from .ratgeom import (
    HalfOpenSimplicialCone,
    RationalCone,
    as_fraction,
    dot,
    dual_cone,
    is_exact,
    is_strictly_convex,
    lattice_points_under_level,
    solve,
    triangulate_halfopen,
)


@dataclass(frozen=True)
class CharacterCoefficients:
    a0: float | Fraction
    a1: float | Fraction


class IndexCharacter:
    """Closed-form leading Laurent coefficients of an index character.

    ``gens`` has shape (pieces, n, d) and ``psum`` (pieces, d): the generator
    rows and the summed parallelepiped points of each half-open piece.
    """

    def __init__(self, gens: np.ndarray, counts: np.ndarray, psum: np.ndarray):
        self.gens = np.asarray(gens, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.psum = np.asarray(psum, dtype=np.int64)
        self._exact = [
            ([tuple(int(x) for x in u) for u in g], int(c), tuple(int(x) for x in p))
            for g, c, p in zip(self.gens, self.counts, self.psum)
        ]

    @classmethod
    def from_pieces(cls, pieces: Sequence[HalfOpenSimplicialCone]) -> IndexCharacter:
        gens = np.array([p.generators for p in pieces], dtype=np.int64)
        counts = np.array([len(p.parallelepiped_points) for p in pieces], dtype=np.int64)
        psum = np.array([np.sum(p.parallelepiped_points, axis=0) for p in pieces], dtype=np.int64)
        return cls(gens, counts, psum)

    @property
    def dim(self) -> int:
        return self.gens.shape[2]

    def restrict(self, r: int) -> IndexCharacter:
        """Character seen by ``xi`` in the first ``r`` coordinates (other coordinates zero)."""
        return IndexCharacter(self.gens[:, :, :r], self.counts, self.psum[:, :r])

    # -- exact path --------------------------------------------------------

    def _exact_terms(self, xi):
        for gens, count, psum in self._exact:
            lv = [dot(u, xi) for u in gens]
            yield gens, count, psum, lv

    def a0(self, xi):
        if is_exact(xi):
            xi = [as_fraction(x) for x in xi]
            return sum((Fraction(c) / math.prod(lv) for _, c, _, lv in self._exact_terms(xi)), Fraction(0))
        a = self.gens @ np.asarray(xi, dtype=float)
        return float(np.sum(self.counts / np.prod(a, axis=1)))

    def a1(self, xi):
        if is_exact(xi):
            xi = [as_fraction(x) for x in xi]
            total = Fraction(0)
            for _, c, psum, lv in self._exact_terms(xi):
                total += (2 * dot(psum, xi) - c * sum(lv)) / math.prod(lv)
            return total
        x = np.asarray(xi, dtype=float)
        a = self.gens @ x
        return float(np.sum((2 * (self.psum @ x) - self.counts * a.sum(axis=1)) / np.prod(a, axis=1)))

    def da0(self, xi, eta):
        """Directional derivative of ``a0`` at ``xi`` along ``eta``."""
        if is_exact(xi) and is_exact(eta):
            xi = [as_fraction(x) for x in xi]
            total = Fraction(0)
            for gens, c, _, lv in self._exact_terms(xi):
                term = Fraction(c) / math.prod(lv)
                total -= term * sum(Fraction(dot(u, eta)) / l for u, l in zip(gens, lv))
            return total
        x, e = np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)
        a = self.gens @ x
        b = self.gens @ e
        term = self.counts / np.prod(a, axis=1)
        return float(-np.sum(term * np.sum(b / a, axis=1)))

    def da1(self, xi, eta):
        """Directional derivative of ``a1`` at ``xi`` along ``eta``."""
        if is_exact(xi) and is_exact(eta):
            xi = [as_fraction(x) for x in xi]
            eta = [as_fraction(x) for x in eta]
            total = Fraction(0)
            for gens, c, psum, lv in self._exact_terms(xi):
                prod = math.prod(lv)
                numer = 2 * dot(psum, xi) - c * sum(lv)
                dnumer = 2 * dot(psum, eta) - c * sum(dot(u, eta) for u in gens)
                log_d = sum(Fraction(dot(u, eta)) / l for u, l in zip(gens, lv))
                total += dnumer / prod - numer / prod * log_d
            return total
        x, e = np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)
        a = self.gens @ x
        b = self.gens @ e
        prod = np.prod(a, axis=1)
        numer = 2 * (self.psum @ x) - self.counts * a.sum(axis=1)
        dnumer = 2 * (self.psum @ e) - self.counts * b.sum(axis=1)
        return float(np.sum(dnumer / prod - numer / prod * np.sum(b / a, axis=1)))

    def grad_exact(self, xi) -> tuple[Fraction, ...]:
        d = self.dim
        return tuple(self.da0(xi, tuple(int(i == j) for j in range(d))) for i in range(d))

    def grad_hess(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """Float gradient and Hessian of ``a0``.

        Each term ``N / prod a_j`` has gradient ``-term * s`` with
        ``s = sum_j u_j / a_j`` and Hessian ``term * (s s^T + sum_j u_j u_j^T / a_j^2)``.
        """
        x = np.asarray(xi, dtype=float)
        a = self.gens @ x
        term = self.counts / np.prod(a, axis=1)
        w = self.gens / a[:, :, None]
        s = w.sum(axis=1)
        grad = -(term[:, None] * s).sum(axis=0)
        hess = np.einsum("p,pi,pj->ij", term, s, s) + np.einsum("p,pki,pkj->ij", term, w, w)
        return grad, hess

    def min_level(self, xi) -> float:
        return float(np.min(self.gens @ np.asarray(xi, dtype=float)))


def gorenstein_covector(sigma: RationalCone) -> tuple[Fraction, ...]:
    """The rational ``u`` with ``<v, u> = 1`` on every primitive ray of ``sigma``."""
    if not sigma.is_full_dimensional or not is_strictly_convex(sigma):
        raise NotFullDimensional(f"{sigma} must be full-dimensional and strictly convex")
    u = solve(sigma.rays, [1] * len(sigma.rays))
    if u is None:
        raise NotQGorenstein(f"no covector takes value 1 on all rays of {sigma}")
    return u


@dataclass(frozen=True)
class ToricConeVariety:
    """Affine toric variety ``Spec k[sigma^vee ∩ M]`` with its Gorenstein covector."""

    sigma: RationalCone

    def __post_init__(self):
        object.__setattr__(self, "gorenstein_u", gorenstein_covector(self.sigma))

    @classmethod
    def from_rays(cls, rays) -> ToricConeVariety:
        return cls(RationalCone.from_rays(rays))

    @property
    def n(self) -> int:
        return self.sigma.ambient_dim

    @cached_property
    def dual(self) -> RationalCone:
        return dual_cone(self.sigma)

    def pieces(self, order=None, reference=None) -> list[HalfOpenSimplicialCone]:
        return triangulate_halfopen(self.dual, order=order, reference=reference)

    @cached_property
    def character(self) -> IndexCharacter:
        return IndexCharacter.from_pieces(self.pieces())

    def characters(self, xi, cutoff) -> tuple[np.ndarray, np.ndarray]:
        """Characters below ``cutoff`` with their multiplicities (all 1 for toric)."""
        pts = lattice_points_under_level(self.dual, xi, cutoff)
        return pts, np.ones(len(pts), dtype=np.int64)

    def transform(self, g) -> ToricConeVariety:
        g = [[int(x) for x in row] for row in np.asarray(g)]
        return ToricConeVariety(self.sigma.transform(g))


def check_reeb_cone(sigma: RationalCone, xi) -> None:
    """Raise unless ``xi`` lies in the interior of ``sigma``."""
    if len(xi) != sigma.ambient_dim:
        raise ReebConeViolation("Reeb field has wrong dimension")
    for w in sigma.facet_normals:
        if not dot(w, xi) > 0:
            raise ReebConeViolation(f"{tuple(xi)} is not in the Reeb cone (fails on {w})")


def check_reeb(X, xi) -> None:
    """Raise unless ``xi`` pairs positively with every ray of the moment cone of ``X``."""
    check_reeb_cone(X.sigma, xi)


def log_discrepancy(X, xi):
    check_reeb(X, xi)
    return dot(xi, X.gorenstein_u) if is_exact(xi) else float(np.dot(np.asarray(xi, float), np.asarray(X.gorenstein_u, float)))


def a0(X, xi):
    check_reeb(X, xi)
    return X.character.a0(xi)


def a1(X, xi):
    check_reeb(X, xi)
    return X.character.a1(xi)


def coefficients(X, xi) -> CharacterCoefficients:
    return CharacterCoefficients(a0(X, xi), a1(X, xi))


def normalized_volume(X, xi):
    """``A(xi)^n * a0(xi)``, invariant under positive rescaling of ``xi``."""
    return log_discrepancy(X, xi) ** X.n * a0(X, xi)


def truncated_index_character(X, xi, t, cutoff):
    """Partial sum of the index character over characters with ``<m, xi> < cutoff``.

    ``t`` may be a scalar or an array; the lattice points are enumerated once.
    """
    check_reeb(X, xi)
    pts, mult = X.characters(xi, cutoff)
    levels = pts @ np.asarray([float(x) for x in xi])
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("t must be positive")
    vals = np.array([math.fsum(mult * np.exp(-tt * levels)) for tt in ts])
    return vals if np.ndim(t) else float(vals[0])


def local_volume_truncated(X, xi, c):
    """``n! * #{m : <m, xi> < c} / c^n``, which tends to ``a0`` as ``c`` grows."""
    check_reeb(X, xi)
    pts, mult = X.characters(xi, c)
    return math.factorial(X.n) * int(mult.sum()) / float(c) ** X.n


def monomial_valuation(X, xi, support):
    """Value of the monomial valuation on a function with the given support."""
    support = list(support)
    if not support:
        raise EmptySupport("a function with empty support has infinite valuation")
    check_reeb(X, xi)
    return min(dot(m, xi) for m in support)
