"""Shipped examples: toric cones, small divisors and a test-configuration zoo."""

from __future__ import annotations

from fractions import Fraction

from .cxone import PolyhedralDivisor, SussFamilyParams, degenerate_at, general_fiber, suss_family
from .ratgeom import RationalCone, RationalPolyhedron
from .reebopt import minimize_volume
from .toric import ToricConeVariety

TORIC_RAYS = {
    "C1": [(1,)],
    "C2": [(1, 0), (0, 1)],
    "C3": [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
    "conifold": [(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)],
    "A1": [(1, 0), (1, 2)],  # C^2 / Z_2
    "C3/Z3": [(1, 0, 0), (0, 1, 0), (-1, -1, 3)],
    "Y21": [(1, 0, 0), (1, 1, 0), (1, 2, 2), (1, 0, 1)],  # irregular minimizer
}

# the five cones used by the series-oracle acceptance check
SERIES_CONES = ("C2", "C3", "conifold", "A1", "C3/Z3")


def toric(name: str) -> ToricConeVariety:
    return ToricConeVariety.from_rays(TORIC_RAYS[name])


def two_point_divisor() -> PolyhedralDivisor:
    """``D_0 = D_inf = (1,0) + orthant``: a toric variety written with complexity one."""
    orthant = RationalCone.from_rays([(1, 0), (0, 1)])
    p = RationalPolyhedron.point((1, 0), orthant)
    return PolyhedralDivisor(orthant, [("0", p), ("inf", p)])


def fractional_pair_divisor() -> PolyhedralDivisor:
    """Two terms with coefficient 1/2 on ``m = (1, 0)``.

    Degenerating at a generic point adds them before rounding, so the Hilbert
    function jumps at odd ``m_1`` even though the central fiber is a perfectly
    good Q-Gorenstein toric cone.
    """
    orthant = RationalCone.from_rays([(1, 0), (0, 1)])
    half = RationalPolyhedron.point((Fraction(1, 2), 0), orthant)
    neg = RationalPolyhedron.point((Fraction(-1, 2), 0), orthant)
    return PolyhedralDivisor(orthant, [("0", half), ("1", half), ("inf", neg)])


SUSS_GRID = [(m, mp) for m in range(3) for mp in range(3) if m + mp <= 2]


def shipped_test_configurations():
    """``(name, tc)`` pairs with Reeb fields attached.

    Toric product configurations are evaluated both at the minimizer (where DF
    vanishes) and at a fixed off-minimum field; the Süß family contributes its
    admissible point degenerations at the minimizer for every ``m + mp <= 2``.
    """
    from .kstab import product_test_configuration

    out = []
    off_minimum = {"C2": (1, 2), "C3": (1, 2, 3), "conifold": (1, 1, 3), "A1": (3, 1), "C3/Z3": (1, 2, 3)}
    for name, xi in off_minimum.items():
        X = toric(name)
        xi_star = minimize_volume(X).xi_star
        e1 = (1,) + (0,) * (X.n - 1)
        out.append((f"{name} product e1 at xi={xi}", product_test_configuration(X, e1, xi)))
        out.append((f"{name} product e1 at minimizer", product_test_configuration(X, e1, xi_star)))
    for m, mp in SUSS_GRID:
        D = suss_family(SussFamilyParams(2, m, mp))
        xi_star = tuple(minimize_volume(general_fiber(D)).xi_star)
        for y in ("0", "inf"):
            out.append((f"suss k=2 m={m} mp={mp} y={y}", degenerate_at(D, y, xi_star)))
    return out
