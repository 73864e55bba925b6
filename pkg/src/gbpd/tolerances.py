"""Numerical tolerance configuration.

All tolerances are stored as dimensionless factors; absolute thresholds are
derived at the point of use by multiplying with a problem scale (coefficient
magnitude, scene diagonal, or distance value). Defaults are chosen for double
precision at window scales around 1e3.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ToleranceSet:
    # relative residual allowed when testing a point against an implicit conic
    res_rel: float = 1e-8
    # eigenvalue ratio below which the homogeneous conic matrix counts as rank-deficient
    rank_rel: float = 1e-10
    # relative denominator magnitude treated as a singular parameter
    den_rel: float = 1e-12
    # equidistance / global-minimality slack for vertex membership, scaled by (1 + |dist|)
    vert_rel: float = 1e-8
    # vertex deduplication radius as a fraction of the scene diagonal
    dedup_rel: float = 1e-6
    # parameter values closer than this (scaled) are merged
    param_merge: float = 1e-9
    # absolute quadrature target for arc-length and area integrals
    quad_abs: float = 1e-10
    # ratio of denominator-form eigenvalues below which a conic counts as a parabola
    class_rel: float = 1e-9

    def with_overrides(self, **kwargs: float) -> "ToleranceSet":
        """Copy with selected fields replaced; unknown names raise TypeError."""
        return replace(self, **kwargs)


DEFAULT_TOLERANCES = ToleranceSet()
