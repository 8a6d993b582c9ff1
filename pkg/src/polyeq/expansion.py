"""
This module contains the expansion point of the static polynomial equilibria:
the REE quantity and the demand derivatives the agents know there.
"""

import math
from dataclasses import dataclass

from demand.families import DemandSpec, d2_da2, d_da, d_db, evaluate


@dataclass(frozen=True)
class Expansion:
    """
    First- and second-order information about demand at the REE.

    Attributes:
        a0 (float): Expansion quantity A0.
        phi0 (float): φ(A0;b0), equal to A0 at an REE.
        phi_a (float): φ_A(A0;b0).
        phi_aa (float): φ_AA(A0;b0).
        phi_b (float): φ_b(A0;b0).
        b0 (float): Demand parameter at the expansion point.
        spec (DemandSpec | None): Demand function used for true prices, None
            for coefficient-only studies.
    """

    a0: float
    phi0: float
    phi_a: float
    phi_aa: float
    phi_b: float
    b0: float = 0.0
    spec: DemandSpec | None = None

    @property
    def gap(self) -> float:
        """
        1 − φ_A, the slope gap that appears in every static closed form.
        """
        return 1.0 - self.phi_a

    def context(self, **extra: float) -> dict[str, float]:
        """
        Residual context with the expansion coefficients and ``extra`` terms.
        """
        return {
            "a0": self.a0,
            "phi0": self.phi0,
            "phi_a": self.phi_a,
            "phi_aa": self.phi_aa,
            "phi_b": self.phi_b,
            **extra,
        }

    def true_price(self, a: float, delta_b: float = 0.0) -> tuple[float | None, bool]:
        """
        Actual price φ(a; b0 + Δb).

        Args:
            a (float): Quantity.
            delta_b (float, optional): Parameter change. Defaults to 0.

        Returns:
            tuple[float | None, bool]: The price (None without a demand
            function) and whether it had to be extrapolated outside the domain.
        """
        if self.spec is None:
            return None, False
        lo, hi = self.spec.domain_hint
        extrapolated = not lo <= a <= hi
        price = evaluate(self.spec, a, self.b0 + delta_b, extrapolate=True)
        return (price if math.isfinite(price) else None), extrapolated


def expansion_point(spec: DemandSpec, a0: float, b0: float) -> Expansion:
    """
    Evaluate the demand derivatives at ``(a0, b0)``.

    Args:
        spec (DemandSpec): Demand specification.
        a0 (float): Expansion quantity, normally ``solve_ree(spec, b0).A0``.
        b0 (float): Demand parameter.

    Returns:
        Expansion: The expansion point.
    """
    return Expansion(
        a0=a0,
        phi0=evaluate(spec, a0, b0),
        phi_a=d_da(spec, a0, b0),
        phi_aa=d2_da2(spec, a0, b0),
        phi_b=d_db(spec, a0, b0),
        b0=b0,
        spec=spec,
    )


def from_coefficients(
    phi_a: float, phi_b: float = 1.0, phi_aa: float = 0.0, a0: float = 1.0
) -> Expansion:
    """
    Expansion point given by its coefficients alone, at an REE with
    φ(A0) = A0.

    Example:
        >>> from_coefficients(-0.5, phi_aa=8.0).gap
        1.5
    """
    return Expansion(a0=a0, phi0=a0, phi_a=phi_a, phi_aa=phi_aa, phi_b=phi_b)
