"""Volume minimization and K-stability computations for Fano cones.

Toric cones are handled directly; complexity-one T-varieties are described by
polyhedral divisors on the projective line and studied through their toric
point degenerations.
"""

__version__ = "0.1.0"
