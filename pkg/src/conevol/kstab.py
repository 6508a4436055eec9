"""Donaldson-Futaki invariants, Duistermaat-Heckman measures and volume bounds.

Sign conventions
----------------
A point degeneration carries ``eta = (0_N, 1)``, the degenerating point's
polyhedron sitting at height +1.  Both DF routes differentiate along the
gauge-fixed direction ``T_xi(eta) = (A(xi) eta - A(eta) xi) / n``:

* ``df_volume_route`` is ``D_{T_xi(eta)} a0`` of the central fiber;
* ``df_ab_route`` is ``(n+1) A1 B0 - n A0 B1`` with ``B_i = -D_{T_xi(eta)} A_i``.

Because ``A1 = -A(xi) A0`` on a Q-Gorenstein toric cone and
``A(T_xi(eta)) = 0``, the ab route equals ``A(xi) A0`` times the volume
route, so their signs agree.  Only signs and zero tests are
meaningful; no dimensional constant is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cxone import (
    GeneralFiber,
    PolyhedralDivisor,
    admissible_degenerations,
    characters as divisor_characters,
    general_fiber,
    lambda_ranges,
)
from .errors import EmptyMeasure, InvalidParams
from .ratgeom import as_fraction, dot, is_exact
from .reebopt import MinimizerReport, minimize_volume
from .testconfig import SpecialTestConfig
from .toric import ToricConeVariety, check_reeb

ZERO_BAND = 1e-9


def classify(value: float, band: float = ZERO_BAND) -> int:
    return 0 if abs(value) <= band else (1 if value > 0 else -1)


def _vec(v):
    return tuple(as_fraction(x) for x in v) if is_exact(v) else tuple(float(x) for x in v)


def gauge_fixed_eta(central: ToricConeVariety, xi, eta):
    """``(A(xi) eta - A(eta) xi) / n``, tangent to the level sets of ``A``."""
    xi, eta = _vec(xi), _vec(eta)
    u = central.gorenstein_u
    if not (is_exact(xi) and is_exact(eta)):
        u = tuple(float(x) for x in u)
    a_xi, a_eta, n = dot(xi, u), dot(eta, u), central.n
    return tuple((a_xi * e - a_eta * x) / n for e, x in zip(eta, xi))


# ---------------------------------------------------------------------------
# test configurations


def product_test_configuration(X, eta, xi=None) -> SpecialTestConfig:
    """Product configuration induced by a one-parameter subgroup ``eta`` of the torus.

    For a complexity-one :class:`GeneralFiber` the central fiber of its flat
    degeneration is used, with ``eta`` embedded at height 0; the index
    characters agree there, so DF values are those of the product.
    """
    if isinstance(X, GeneralFiber):
        central = X.via.central
        eta = tuple(eta) + (0,)
    else:
        central = X
    if len(eta) != central.n:
        raise InvalidParams("eta has the wrong dimension")
    tc = SpecialTestConfig(central, tuple(eta), base_rank=None, source=X, product=True)
    return tc.with_xi(xi) if xi is not None else tc


def _require_xi(tc: SpecialTestConfig):
    if tc.xi_lift is None:
        raise ValueError("test configuration has no Reeb field attached (use with_xi)")
    check_reeb(tc.central, tc.xi_lift)
    return tc.xi_lift


def df_volume_route(tc: SpecialTestConfig) -> float:
    xi = _require_xi(tc)
    t = gauge_fixed_eta(tc.central, xi, tc.eta)
    return float(tc.central.character.da0(xi, t))


def df_ab_route(tc: SpecialTestConfig) -> float:
    xi = _require_xi(tc)
    ch = tc.central.character
    t = gauge_fixed_eta(tc.central, xi, tc.eta)
    n = tc.central.n
    a0, a1 = ch.a0(xi), ch.a1(xi)
    b0, b1 = -ch.da0(xi, t), -ch.da1(xi, t)
    return float((n + 1) * a1 * b0 - n * a0 * b1)


@dataclass(frozen=True)
class DFReport:
    label: str
    df_volume_route: float
    df_ab_route: float
    gauge_eta: tuple
    sign: int
    sign_ab: int
    product: bool = False

    @property
    def routes_agree(self) -> bool:
        return self.sign == self.sign_ab


def df_report(tc: SpecialTestConfig, band: float = ZERO_BAND) -> DFReport:
    vol, ab = df_volume_route(tc), df_ab_route(tc)
    t = gauge_fixed_eta(tc.central, tc.xi_lift, tc.eta)
    return DFReport(
        tc.label, vol, ab, tuple(float(x) for x in t), classify(vol, band), classify(ab, band), tc.product
    )


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class StabilityVerdict:
    status: str  # unstable | semistable_not_polystable | polystable_relative | product_only
    witnesses: tuple  # (point label, DF sign)
    minimizer: MinimizerReport | None = None
    table: tuple = ()  # DFReport per evaluated configuration
    skipped: tuple = ()  # (point label, reason)


def point_df_table(D: PolyhedralDivisor, xi, cutoff=50, band: float = ZERO_BAND):
    """DF reports for the admissible candidate points, and ``(point, reason)`` for the rest."""
    table, skipped = [], []
    for y, tc, check in admissible_degenerations(D, xi, cutoff):
        if tc is None:
            skipped.append((str(y), "central fiber not strictly convex or not Q-Gorenstein"))
        elif not check.ok:
            skipped.append((str(y), f"Hilbert function jumps at {len(check.mismatches)} characters"))
        else:
            table.append(df_report(tc, band))
    return table, skipped


def _status(reports: Sequence[DFReport]) -> str:
    """Combine DF signs; a product with nonzero DF destabilizes through its inverse."""
    nonproduct = [r.sign for r in reports if not r.product]
    if any(s < 0 for s in nonproduct) or any(r.sign != 0 for r in reports if r.product):
        return "unstable"
    if not nonproduct:
        return "product_only"
    if any(s == 0 for s in nonproduct):
        return "semistable_not_polystable"
    return "polystable_relative"


def verdict(obj, minimizer: MinimizerReport | None = None, cutoff=50, band: float = ZERO_BAND,
            tol: float = 1e-10, starts: int = 1) -> StabilityVerdict:
    """Stability verdict at the volume minimizer.

    Toric input only admits product configurations, whose DF vanishes at the
    minimizer; the status is then ``product_only``.  Complexity-one input is
    tested against every candidate point degeneration that passes the flatness
    proxy.  When the divisor has at most two nontrivial points the variety is
    toric and its point degenerations are products; a nonzero DF on one of
    them still destabilizes, because the inverse subgroup gives the opposite
    sign.
    """
    if isinstance(obj, PolyhedralDivisor):
        G = general_fiber(obj)
        rep = minimizer or minimize_volume(G, tol=tol, starts=starts)
        xi = tuple(float(x) for x in rep.xi_star)
        table, skipped = point_df_table(obj, xi, cutoff, band)
        wit = tuple((r.label.removeprefix("y="), r.sign) for r in table)
        return StabilityVerdict(_status(table), wit, rep, tuple(table), tuple(skipped))
    X = obj
    rep = minimizer or minimize_volume(X, tol=tol, starts=starts)
    table = []
    for i in range(X.n):
        e = tuple(int(i == j) for j in range(X.n))
        tc = product_test_configuration(X, e, rep.xi_star)
        r = df_report(tc, band)
        table.append(replace(r, label=f"product e{i + 1}"))
    wit = tuple((r.label, r.sign) for r in table)
    return StabilityVerdict(_status(table), wit, rep, tuple(table))


# ---------------------------------------------------------------------------
# Duistermaat-Heckman measure


@dataclass(frozen=True)
class DHMeasure:
    atoms: tuple  # sorted (location, mass) pairs
    cutoff: float
    characters: int = 0

    @property
    def total_mass(self) -> float:
        return math.fsum(m for _, m in self.atoms)


def dh_measure(tc: SpecialTestConfig, cutoff) -> DHMeasure:
    """Atoms ``lambda / <m, xi>`` over characters ``m != 0`` below ``cutoff``.

    Each character contributes total mass ``1 / (number of characters)``,
    spread evenly over its weights ``lambda`` (the weight-space dimensions of
    a toric central fiber are all 1).
    """
    xi = _require_xi(tc)
    if cutoff <= 0:
        raise InvalidParams("cutoff must be positive")
    xf = np.array([float(x) for x in xi])
    locs: list[np.ndarray] = []
    masses: list[np.ndarray] = []
    if tc.base_rank is None:
        pts, _ = tc.central.characters(xi, cutoff)
        pts = pts[np.any(pts != 0, axis=1)]
        if len(pts) == 0:
            raise EmptyMeasure("no nonzero characters below the cutoff")
        lv = pts @ xf
        locs.append((pts @ np.array([float(x) for x in tc.eta])) / lv)
        masses.append(np.full(len(pts), 1.0 / len(pts)))
        count = len(pts)
    else:
        D = tc.source.divisor
        r = tc.base_rank
        pts, _ = divisor_characters(D, xi[:r], cutoff)
        pts = pts[np.any(pts != 0, axis=1)]
        lo, hi = lambda_ranges(tc, pts)
        keep = hi >= lo
        pts, lo, hi = pts[keep], lo[keep], hi[keep]
        if len(pts) == 0:
            raise EmptyMeasure("no nonzero characters below the cutoff")
        count = len(pts)
        lv = pts @ xf[:r]
        for i in range(count):
            lam = np.arange(lo[i], hi[i] + 1)
            locs.append(lam / lv[i])
            masses.append(np.full(len(lam), 1.0 / (len(lam) * count)))
    loc = np.concatenate(locs)
    mass = np.concatenate(masses)
    keys = np.round(loc, 12)
    uniq, inv = np.unique(keys, return_inverse=True)
    agg = [math.fsum(mass[inv == j]) for j in range(len(uniq))]
    return DHMeasure(tuple((float(u), a) for u, a in zip(uniq, agg)), float(cutoff), count)


def jna_norm(mu: DHMeasure) -> float:
    """``sup supp - mean``; exactly 0 for a single atom."""
    if not mu.atoms:
        raise EmptyMeasure("empty measure")
    if len(mu.atoms) == 1:
        return 0.0
    total = mu.total_mass
    mean = math.fsum(x * m for x, m in mu.atoms) / total
    return max(0.0, max(x for x, _ in mu.atoms) - mean)


# ---------------------------------------------------------------------------
# bounds


def liu_bound(n: int, vhat):
    """``(1 + 1/n)^n vhat``, an upper bound for ``(-K_X)^n`` of a K-semistable Fano."""
    if n < 1:
        raise InvalidParams("n must be at least 1")
    if not vhat > 0:
        raise InvalidParams("vhat must be positive")
    factor = Fraction(n + 1, n) ** n
    return factor * as_fraction(vhat) if is_exact([vhat]) else float(factor) * float(vhat)


def bishop_gromov_bound(n: int, gamma_order: int) -> Fraction:
    """``2 (2n-1)^n n! / ((2n-1)!! |Gamma|)`` for a quotient singularity ``C^n / Gamma``."""
    if n < 1 or gamma_order < 1:
        raise InvalidParams("n and gamma_order must be positive integers")
    double_fact = math.prod(range(2 * n - 1, 0, -2))
    return Fraction(2 * (2 * n - 1) ** n * math.factorial(n), double_fact * int(gamma_order))


__all__ = [
    "ZERO_BAND",
    "DFReport",
    "DHMeasure",
    "SpecialTestConfig",
    "StabilityVerdict",
    "bishop_gromov_bound",
    "classify",
    "df_ab_route",
    "df_report",
    "df_volume_route",
    "dh_measure",
    "gauge_fixed_eta",
    "jna_norm",
    "liu_bound",
    "point_df_table",
    "product_test_configuration",
    "verdict",
]
