"""
This module contains the equilibria after a change Δb of the demand parameter,
with the three discount coefficients τ₁ (on ΔA²), τ₂ (on Δb²) and τ₃ (on
|ΔA||Δb|), and the marginal multiplier of the elevated equilibrium.
"""

import logging
import math
from dataclasses import dataclass
from utils.compat import StrEnum

from scipy.optimize import brentq

from oracle.residuals import EquationId
from polyeq.expansion import Expansion
from polyeq.records import (
    Branch,
    Equilibrium,
    Variant,
    deduplicate,
    make_record,
    sign_check,
)
from utils.algebra import solve_quadratic
from utils.errors import ArgError, ExistenceError

logger = logging.getLogger(__name__)

_SIGN_XTOL = 1e-15


@dataclass(frozen=True)
class Discounts:
    """
    Discount coefficients of the parameter-change variant.
    """

    tau1: float
    tau2: float = 0.0
    tau3: float = 0.0

    def __post_init__(self):
        if self.tau1 == 0:
            raise ArgError("tau1 = 0: the parameter-change roots divide by tau1")
        if min(self.tau1, self.tau2, self.tau3) < 0:
            raise ArgError(f"discount coefficients must be non-negative, got {self}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.tau1, self.tau2, self.tau3)

    def existence_bound(self, phi_b: float) -> float:
        """
        φ_b/τ₂, the parameter change beyond which no elevated equilibrium
        exists (infinite without a Δb² discount).
        """
        return phi_b / self.tau2 if self.tau2 > 0 else math.inf


class PolicyRegime(StrEnum):
    FRICTIONLESS = "Frictionless"
    DIMINISHING_RETURNS = "DiminishingReturns"
    UNCHARTED_TERRITORY = "UnchartedTerritory"
    NO_ELEVATED = "NoElevated"


@dataclass(frozen=True)
class PolicyBounds:
    """
    Parameter changes at which the policy regime switches.

    Attributes:
        sign_change (float | None): Δb at which the marginal multiplier turns
            negative, None without a Δb² discount.
        existence (float | None): φ_b/τ₂, None without a Δb² discount.
    """

    sign_change: float | None
    existence: float | None


def _check_delta_b(delta_b: float) -> None:
    if delta_b < 0:
        raise ArgError(f"parameter change must be non-negative, got {delta_b}")


def _branch_coefficients(
    point: Expansion, delta_b: float, taus: Discounts, positive: bool
) -> tuple[float, float, float]:
    cross = taus.tau3 * delta_b
    linear = point.gap + cross if positive else point.gap - cross
    constant = -(point.phi_b - taus.tau2 * delta_b) * delta_b
    return taus.tau1, linear, constant


def parameter_change_equilibria(
    point: Expansion, delta_b: float, taus: Discounts
) -> list[Equilibrium]:
    """
    Equilibria after the parameter moves from b0 to b0 + Δb.

    The profit criterion contains |ΔA|, so each sign of ΔA gets its own
    quadratic:

    - ΔA ≥ 0: τ₁ΔA² + (1 − φ_A + τ₃Δb)ΔA − (φ_b − τ₂Δb)Δb = 0,
    - ΔA ≤ 0: τ₁ΔA² + (1 − φ_A − τ₃Δb)ΔA − (φ_b − τ₂Δb)Δb = 0.

    Roots contradicting the sign they were derived under are dropped, as are
    complex roots. The elevated equilibrium exists iff Δb < φ_b/τ₂.

    Args:
        point (Expansion): Expansion point at (A0, b0).
        delta_b (float): Parameter change, non-negative.
        taus (Discounts): Discount coefficients.

    Returns:
        list[Equilibrium]: Records sorted by ΔA.
    """
    _check_delta_b(delta_b)
    context = point.context(
        delta_b=delta_b, tau1=taus.tau1, tau2=taus.tau2, tau3=taus.tau3
    )
    records = []
    for positive, equation in (
        (True, EquationId.PARAM_CHANGE_UP),
        (False, EquationId.PARAM_CHANGE_DOWN),
    ):
        roots = solve_quadratic(*_branch_coefficients(point, delta_b, taus, positive))
        if roots is None:
            logger.debug("complex candidates on the ΔA%s0 branch dropped", ">=" if positive else "<=")
            continue
        for d_a, branch in zip(roots, (Branch.PLUS, Branch.MINUS)):
            check = sign_check(d_a, positive)
            if check is None:
                continue
            notes = (check,) if check and delta_b > 0 else ()
            records.append(
                make_record(
                    point,
                    variant=Variant.PARAM_CHANGE,
                    equation=equation,
                    delta_a=d_a,
                    branch=branch,
                    forecast_price=point.phi0 + point.phi_a * d_a + point.phi_b * delta_b,
                    context=context,
                    delta_b=delta_b,
                    taus=taus.as_tuple(),
                    notes=notes,
                )
            )
    return deduplicate(records)


def elevated_root(point: Expansion, delta_b: float, taus: Discounts) -> float:
    """
    ΔA₁(Δb), the plus root of the ΔA ≥ 0 quadratic.

    Raises:
        ExistenceError: If Δb ≥ φ_b/τ₂.
    """
    _check_delta_b(delta_b)
    bound = taus.existence_bound(point.phi_b)
    if delta_b >= bound:
        raise ExistenceError(
            f"no elevated equilibrium for Δb={delta_b} >= φ_b/τ₂={bound}"
        )
    plus, _ = solve_quadratic(*_branch_coefficients(point, delta_b, taus, True))
    return plus


def marginal_multiplier(point: Expansion, delta_b: float, taus: Discounts) -> float:
    """
    dΔA₁/dΔb of the elevated equilibrium.

    With B = 1 − φ_A + τ₃Δb and D = (φ_b − τ₂Δb)Δb/τ₁ + (B/2τ₁)², the elevated
    root is ΔA₁ = −B/2τ₁ + √D and

        dΔA₁/dΔb = −τ₃/2τ₁ + [(φ_b − 2τ₂Δb)/τ₁ + τ₃B/2τ₁²] / 2√D,

    which equals φ_b/(1 − φ_A) at Δb = 0.

    Args:
        point (Expansion): Expansion point at (A0, b0).
        delta_b (float): Parameter change.
        taus (Discounts): Discount coefficients.

    Returns:
        float: The marginal multiplier.
    """
    elevated_root(point, delta_b, taus)
    tau1, tau2, tau3 = taus.as_tuple()
    slope = point.gap + tau3 * delta_b
    disc = (point.phi_b - tau2 * delta_b) * delta_b / tau1 + (slope / (2.0 * tau1)) ** 2
    numerator = (point.phi_b - 2.0 * tau2 * delta_b) / tau1 + tau3 * slope / (2.0 * tau1**2)
    return -tau3 / (2.0 * tau1) + numerator / (2.0 * math.sqrt(disc))


def policy_regime(point: Expansion, delta_b: float, taus: Discounts) -> PolicyRegime:
    """
    Classify a parameter change by its effect on output.

    Example:
        >>> policy_regime(from_coefficients(-0.5), 0.009, Discounts(1.0, 100.0))
        <PolicyRegime.UNCHARTED_TERRITORY: 'UnchartedTerritory'>
    """
    _check_delta_b(delta_b)
    if delta_b == 0:
        return PolicyRegime.FRICTIONLESS
    if delta_b >= taus.existence_bound(point.phi_b):
        return PolicyRegime.NO_ELEVATED
    if marginal_multiplier(point, delta_b, taus) > 0:
        return PolicyRegime.DIMINISHING_RETURNS
    return PolicyRegime.UNCHARTED_TERRITORY


def marginal_regime_bounds(point: Expansion, taus: Discounts) -> PolicyBounds:
    """
    Locate the regime switches on the Δb axis.

    The marginal multiplier is φ_b/(1 − φ_A) > 0 at Δb = 0 and
    −φ_b/(1 − φ_A) < 0 at Δb = φ_b/τ₂, so its sign change is bracketed.

    Args:
        point (Expansion): Expansion point at (A0, b0).
        taus (Discounts): Discount coefficients.

    Returns:
        PolicyBounds: The two switch points.
    """
    if taus.tau2 == 0:
        return PolicyBounds(sign_change=None, existence=None)
    bound = taus.existence_bound(point.phi_b)
    upper = math.nextafter(bound, 0.0)
    sign_change = brentq(
        lambda db: marginal_multiplier(point, db, taus), 0.0, upper, xtol=_SIGN_XTOL
    )
    logger.info("marginal multiplier changes sign at Δb=%.17g", sign_change)
    return PolicyBounds(sign_change=sign_change, existence=bound)
