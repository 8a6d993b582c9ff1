"""
This module contains the equilibria under the max-error discount, where agents
discount their estimate by max(ΔA², Δb²), and the parameter changes that bound
its regimes.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

from scipy.optimize import bisect

from constants.tolerances import BISECTION_XTOL, SIGN_BAND
from oracle.residuals import EquationId
from polyeq.expansion import Expansion
from polyeq.records import (
    BOUNDARY,
    Branch,
    Equilibrium,
    Variant,
    deduplicate,
    make_record,
)
from utils.algebra import solve_quadratic
from utils.errors import ArgError, ConvergenceError, ExistenceError

logger = logging.getLogger(__name__)

BOUND_XTOL = BISECTION_XTOL
_MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class RegimeBounds:
    """
    Upper bounds on Δb for the two large-ΔA equilibria.

    Attributes:
        delta_b1 (float): Largest Δb keeping the minus root in its regime.
        delta_b2 (float): Largest Δb keeping the plus root in its regime.
    """

    delta_b1: float
    delta_b2: float


def _regime_check(smaller: float, larger: float) -> str | None:
    """
    Test |smaller| < |larger| with the sign tolerance band.
    """
    slack = abs(larger) - abs(smaller)
    if abs(slack) <= SIGN_BAND:
        return BOUNDARY
    return "" if slack > 0 else None


def alt_discount_equilibria(point: Expansion, delta_b: float) -> list[Equilibrium]:
    """
    Equilibria of A = P̂ − max(ΔA², Δb²).

    - Small-ΔA regime (|ΔA| < |Δb|): ΔA = ((φ_b − Δb)/(1 − φ_A))·Δb.
    - Large-ΔA regime (|ΔA| > |Δb|):
      ΔA = −(1 − φ_A)/2 ± √(φ_bΔb + ((1 − φ_A)/2)²).

    Each candidate is kept only if it satisfies the regime it was derived
    under. The list may be empty.

    Args:
        point (Expansion): Expansion point at (A0, b0).
        delta_b (float): Parameter change, non-negative.

    Returns:
        list[Equilibrium]: Records sorted by ΔA.

    Example:
        >>> point = from_coefficients(-0.5)
        >>> [round(r.delta_A, 4) for r in alt_discount_equilibria(point, 0.1)]
        [-1.5639, 0.06]
    """
    if delta_b < 0:
        raise ArgError(f"parameter change must be non-negative, got {delta_b}")
    context = point.context(delta_b=delta_b)
    small = (point.phi_b - delta_b) / point.gap * delta_b
    candidates = [
        (small, Branch.PLUS if small >= 0 else Branch.MINUS, EquationId.ALT_REGIME1)
    ]
    roots = solve_quadratic(1.0, point.gap, -point.phi_b * delta_b)
    if roots is None:
        logger.debug("complex large-ΔA candidates dropped at Δb=%g", delta_b)
    else:
        candidates += [
            (roots[0], Branch.PLUS, EquationId.ALT_REGIME2),
            (roots[1], Branch.MINUS, EquationId.ALT_REGIME2),
        ]

    records = []
    for d_a, branch, equation in candidates:
        if equation == EquationId.ALT_REGIME1:
            check = _regime_check(d_a, delta_b)
        else:
            check = _regime_check(delta_b, d_a)
        if check is None:
            logger.debug("%s candidate ΔA=%g fails its regime", equation, d_a)
            continue
        records.append(
            make_record(
                point,
                variant=Variant.ALT_DISCOUNT,
                equation=equation,
                delta_a=d_a,
                branch=branch,
                forecast_price=point.phi0 + point.phi_a * d_a + point.phi_b * delta_b,
                context=context,
                delta_b=delta_b,
                notes=(check,) if check else (),
            )
        )
    return deduplicate(records)


#######################################################################
## Regime bounds ######################################################
#######################################################################


def _last_positive(f: Callable[[float], float], lo: float = 0.0) -> float:
    """
    Crossing of a function positive on (lo, x*) and negative beyond x*.
    """
    hi = max(1.0, 2.0 * lo)
    for _ in range(_MAX_DOUBLINGS):
        if f(hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("no regime crossing found while doubling Δb")
    return bisect(f, lo, hi, xtol=BOUND_XTOL)


def _plus_root_ratio(point: Expansion) -> float:
    return point.phi_b / point.gap


def minus_root_bound(point: Expansion) -> float:
    """
    Δb₁: the crossing |ΔA₋(Δb)| = Δb of the large-ΔA minus root, found by
    bisection.
    """
    half = 0.5 * point.gap

    def slack(delta_b: float) -> float:
        return half + math.sqrt(point.phi_b * delta_b + half * half) - delta_b

    return _last_positive(slack)


def plus_root_bound(point: Expansion) -> float:
    """
    Δb₂: the crossing ΔA₊(Δb) = Δb of the large-ΔA plus root, found by
    bisection. It exists only when φ_b/(1 − φ_A) > 1.
    """
    ratio = _plus_root_ratio(point)
    if ratio <= 1:
        raise ExistenceError(
            f"φ_b/(1 − φ_A) = {ratio:g} <= 1: the plus root never exceeds Δb"
        )
    half = 0.5 * point.gap

    def slack(delta_b: float) -> float:
        return -half + math.sqrt(point.phi_b * delta_b + half * half) - delta_b

    # slack is concave, zero at Δb = 0 and positive just to its right
    lo = 1.0
    while slack(lo) <= 0:
        lo *= 0.5
    return _last_positive(slack, lo)


def regime_bounds(point: Expansion) -> RegimeBounds:
    """
    Both regime bounds of the large-ΔA equilibria.

    Args:
        point (Expansion): Expansion point at (A0, b0).

    Returns:
        RegimeBounds: Δb₁ and Δb₂.

    Raises:
        ExistenceError: If φ_b/(1 − φ_A) <= 1, where Δb₂ is undefined.
    """
    return RegimeBounds(delta_b1=minus_root_bound(point), delta_b2=plus_root_bound(point))


def regime_bounds_closed_form(point: Expansion) -> RegimeBounds:
    """
    Exact regime bounds, Δb₁ = 1 − φ_A + φ_b and Δb₂ = φ_b − (1 − φ_A).
    """
    if _plus_root_ratio(point) <= 1:
        raise ExistenceError("φ_b/(1 − φ_A) <= 1: Δb₂ is undefined")
    return RegimeBounds(
        delta_b1=point.gap + point.phi_b, delta_b2=point.phi_b - point.gap
    )
