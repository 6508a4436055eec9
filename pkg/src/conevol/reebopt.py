"""Volume minimization over the gauge slice ``{<xi, u> = n}`` of the Reeb cone.

The objective is the normalized volume ``A(xi)^n a0(xi)``, which equals
``n^n a0(xi)`` on the slice.  ``a0`` is a sum of reciprocals of products of
positive linear forms, hence strictly convex on the Reeb cone, so a damped
Newton iteration restricted to the slice converges to the unique minimizer.

The ``target`` argument of the functions below is anything exposing
``sigma``, ``gorenstein_u``, ``n`` and ``character``: a
:class:`~conevol.toric.ToricConeVariety` or a
:class:`~conevol.cxone.GeneralFiber`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

from .errors import NonConvergence, NotFano, ReebConeViolation
from .ratgeom import dot
from .toric import check_reeb

DEFAULT_TOL = 1e-10
MAX_ITER = 200
ARMIJO = 1e-4
BACKTRACK = 0.5


@dataclass(frozen=True)
class GaugeSlice:
    """Affine slice ``<xi, u> = level`` intersected with the open Reeb cone."""

    normals: np.ndarray  # inward facet normals of the Reeb cone
    covector: np.ndarray
    level: float

    @classmethod
    def of(cls, target) -> GaugeSlice:
        u = getattr(target, "gorenstein_u", None)
        if u is None:
            raise NotFano("target has no Gorenstein covector")
        return cls(
            np.array(target.sigma.facet_normals, dtype=float),
            np.array([float(x) for x in u]),
            float(target.n),
        )

    @property
    def basis(self) -> np.ndarray:
        """Orthonormal basis of the directions tangent to the slice."""
        return null_space(self.covector[None, :])

    def project(self, v: np.ndarray) -> np.ndarray:
        """Rescale a Reeb-cone point onto the slice."""
        return v * (self.level / float(v @ self.covector))

    def inside(self, xi: np.ndarray) -> bool:
        return bool(np.all(self.normals @ xi > 0))


@dataclass(frozen=True)
class MinimizerReport:
    xi_star: np.ndarray
    vhat: float
    a0: float
    grad_residual: float
    iterations: int
    hessian_min_eigen: float
    starts: int
    start_spread: float
    quasiregular: tuple | None = None


def volume_gradient_hessian(target, xi) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of ``a0`` at ``xi`` in floating point."""
    check_reeb(target, xi)
    return target.character.grad_hess(xi)


def _slice_terms(target, sl: GaugeSlice, xi: np.ndarray):
    scale = sl.level**target.n
    g, h = target.character.grad_hess(xi)
    z = sl.basis
    return scale * (z.T @ g), scale * (z.T @ h @ z), z


def slice_gradient_norm(target, xi) -> float:
    """Norm of the slice-projected gradient of the normalized volume."""
    sl = GaugeSlice.of(target)
    g, _, _ = _slice_terms(target, sl, np.asarray(xi, dtype=float))
    return float(np.linalg.norm(g))


def _newton(target, sl: GaugeSlice, xi0: np.ndarray, tol: float):
    scale = sl.level**target.n
    z = sl.basis
    xi = xi0.copy()
    f = scale * target.character.a0(xi)
    for it in range(MAX_ITER + 1):
        g, h = target.character.grad_hess(xi)
        gs = scale * (z.T @ g)
        hs = scale * (z.T @ h @ z)
        gnorm = float(np.linalg.norm(gs))
        if gnorm <= tol:
            return _polish(target, sl, xi, f, gnorm, hs, it)
        try:
            step = -np.linalg.solve(hs, gs)
        except np.linalg.LinAlgError:
            step = -gs
        if float(step @ gs) >= 0:
            step = -gs
        d = z @ step
        t = 1.0
        slope = float(step @ gs)
        # near the minimum the predicted decrease drops below the rounding of f
        slack = 16 * np.finfo(float).eps * abs(f)
        while True:
            cand = xi + t * d
            if sl.inside(cand) and target.character.min_level(cand) > 0:
                fc = scale * target.character.a0(cand)
                if fc <= f + ARMIJO * t * slope + slack:
                    break
            t *= BACKTRACK
            if t < 1e-20:
                # no further decrease representable: accept if already tiny
                if gnorm <= 100 * tol:
                    return xi, f, gnorm, hs, it
                raise NonConvergence(f"line search stalled at |grad| = {gnorm:.3e}")
        xi, f = cand, fc
    raise NonConvergence(f"no convergence in {MAX_ITER} Newton steps (|grad| = {gnorm:.3e})")


def _polish(target, sl: GaugeSlice, xi, f, gnorm, hs, it, steps: int = 2):
    """Extra undamped Newton steps once the tolerance is met.

    A small gradient only bounds the distance to the minimizer by
    ``|grad| / lambda_min``; two quadratic steps bring that to rounding level,
    which is what makes independent starts agree.
    """
    scale = sl.level**target.n
    z = sl.basis
    for _ in range(steps):
        cand = xi - z @ np.linalg.solve(hs, z.T @ (scale * target.character.grad_hess(xi)[0]))
        if not (sl.inside(cand) and target.character.min_level(cand) > 0):
            break
        g, h = target.character.grad_hess(cand)
        gs = scale * (z.T @ g)
        gn = float(np.linalg.norm(gs))
        if gn > gnorm:
            break
        xi, f, gnorm, hs = cand, scale * target.character.a0(cand), gn, scale * (z.T @ h @ z)
    return xi, f, gnorm, hs, it


def start_points(target, starts: int, seed: int = 0) -> list[np.ndarray]:
    """The normalized ray sum followed by random positive ray combinations."""
    sl = GaugeSlice.of(target)
    rays = np.array(target.sigma.rays, dtype=float)
    pts = [sl.project(rays.sum(axis=0))]
    rng = np.random.default_rng(seed)
    while len(pts) < starts:
        w = rng.uniform(0.05, 1.0, size=len(rays))
        pts.append(sl.project(w @ rays))
    return pts


def minimize_volume(target, tol: float = DEFAULT_TOL, starts: int = 1, seed: int = 0) -> MinimizerReport:
    sl = GaugeSlice.of(target)
    if not np.any(sl.covector):
        raise NotFano("zero Gorenstein covector")
    results = []
    for xi0 in start_points(target, max(1, starts), seed):
        if not sl.inside(xi0):
            raise ReebConeViolation("start point outside the Reeb cone")
        results.append(_newton(target, sl, xi0, tol))
    xi, f, gnorm, hs, it = results[0]
    spread = max(float(np.max(np.abs(r[0] - xi))) for r in results)
    if spread > 10 * tol * max(1.0, float(np.max(np.abs(xi)))):
        raise NonConvergence(f"starts disagree by {spread:.3e}")
    return MinimizerReport(
        xi_star=xi,
        vhat=f,
        a0=f / sl.level**target.n,
        grad_residual=gnorm,
        iterations=max(r[4] for r in results),
        hessian_min_eigen=float(np.linalg.eigvalsh(hs)[0]) if hs.size else math.inf,
        starts=len(results),
        start_spread=spread,
    )


def certify_rational(target, xi) -> bool:
    """Exact first-order condition: ``<xi, u> = n``, inside, gradient parallel to ``u``."""
    u = target.gorenstein_u
    if dot(xi, u) != target.n:
        return False
    try:
        check_reeb(target, xi)
    except ReebConeViolation:
        return False
    g = target.character.grad_exact(xi)
    d = len(u)
    return all(g[i] * u[j] == g[j] * u[i] for i in range(d) for j in range(i + 1, d))


def quasiregular_detect(target, report: MinimizerReport, max_denominator: int = 1000):
    """Exact rational minimizer, or None when reconstruction fails certification."""
    cand = tuple(Fraction(float(x)).limit_denominator(max_denominator) for x in report.xi_star)
    return cand if certify_rational(target, cand) else None


__all__ = [
    "GaugeSlice",
    "MinimizerReport",
    "certify_rational",
    "minimize_volume",
    "quasiregular_detect",
    "slice_gradient_norm",
    "start_points",
    "volume_gradient_hessian",
]
