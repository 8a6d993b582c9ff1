"""
This module contains the shape checks of a demand specification.
"""

from dataclasses import dataclass, field

import numpy as np

from demand.families import DemandSpec, closed_form

POSITIVE_PRICE = "phi>0"
NEGATIVE_SLOPE = "phi_A<0"
POSITIVE_SENSITIVITY = "phi_b>0"


@dataclass(frozen=True)
class Violation:
    """
    One failed shape assumption at one grid point.
    """

    assumption: str
    a: float
    value: float


@dataclass(frozen=True)
class ValidationReport:
    """
    Outcome of ``validate``: the violated assumptions, in grid order.
    """

    grid_n: int
    b: float
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def first_violation(self, assumption: str) -> Violation | None:
        """
        Smallest offending quantity for one assumption, if any.
        """
        for violation in self.violations:
            if violation.assumption == assumption:
                return violation
        return None


def validate(spec: DemandSpec, grid_n: int, b: float = 0.0) -> ValidationReport:
    """
    Check φ > 0, φ_A < 0 and φ_b > 0 on a uniform grid over the domain.

    Args:
        spec (DemandSpec): Demand specification.
        grid_n (int): Number of grid points (at least 2).
        b (float, optional): Demand parameter. Defaults to 0.

    Returns:
        ValidationReport: Every violation with the offending quantity.

    Example:
        >>> spec = make_demand("quad_concave", c=1, m=1, kappa=1, a_max=5)
        >>> validate(spec, 100).first_violation("phi>0").a  # doctest: +ELLIPSIS
        0.65...
    """
    if grid_n < 2:
        raise ValueError(f"grid_n must be at least 2, got {grid_n}")
    lo, hi = spec.domain_hint
    grid = np.linspace(lo, hi, grid_n)
    price = np.broadcast_to(closed_form(spec, grid, b, 0), grid.shape)
    slope = np.broadcast_to(closed_form(spec, grid, b, 1), grid.shape)
    # b is additive in every family
    sensitivity = np.ones_like(grid)

    violations = []
    for a, p, s, sb in zip(grid, price, slope, sensitivity):
        if not p > 0:
            violations.append(Violation(POSITIVE_PRICE, float(a), float(p)))
        if not s < 0:
            violations.append(Violation(NEGATIVE_SLOPE, float(a), float(s)))
        if not sb > 0:
            violations.append(Violation(POSITIVE_SENSITIVITY, float(a), float(sb)))
    return ValidationReport(grid_n=grid_n, b=b, violations=violations)
