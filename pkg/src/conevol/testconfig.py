"""The special test configuration record shared by :mod:`cxone` and :mod:`kstab`."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

from .ratgeom import as_fraction, is_exact
from .toric import ToricConeVariety


@dataclass(frozen=True)
class SpecialTestConfig:
    """A degeneration with toric central fiber.

    ``central`` lives in ``N ⊕ Z`` for point degenerations (``base_rank`` is
    then ``dim N``) and in ``N`` itself for product configurations.
    ``eta`` generates the degenerating one-parameter subgroup.
    """

    central: ToricConeVariety
    eta: tuple
    xi_lift: tuple | None = None
    base_rank: int | None = None
    source: Any = None
    product: bool = False

    def with_xi(self, xi) -> SpecialTestConfig:
        """Attach a Reeb field of the general fiber (padded with zeros to the central rank)."""
        xi = tuple(as_fraction(x) for x in xi) if is_exact(xi) else tuple(float(x) for x in xi)
        pad = self.central.n - len(xi)
        if pad < 0:
            raise ValueError("Reeb field longer than the central fiber lattice")
        return replace(self, xi_lift=xi + (0,) * pad)

    @property
    def label(self) -> str:
        point = getattr(self.source, "point", None)
        if point is not None:
            return f"y={point}"
        return "product" if self.product else "degeneration"
