"""
This module contains the equilibrium record shared by every static variant and
the helpers that label and deduplicate candidate roots.
"""

import logging
from dataclasses import asdict, dataclass
from utils.compat import StrEnum

from constants.tolerances import RESIDUAL_BOUND, SIGN_BAND
from oracle.residuals import EquationId, residual
from polyeq.expansion import Expansion

logger = logging.getLogger(__name__)

BOUNDARY = "boundary"
EXTRAPOLATED = "true price extrapolated"
DEGENERATE = "degenerate"


class Variant(StrEnum):
    FIRST_ORDER = "first_order"
    PARAM_CHANGE = "param_change"
    SECOND_ORDER = "second_order"
    ALT_DISCOUNT = "alt_discount"


class Branch(StrEnum):
    PLUS = "PlusRoot"
    MINUS = "MinusRoot"
    ZERO = "Zero"


class Regime(StrEnum):
    REE = "REE"
    DEPRESSED = "Depressed"
    ELEVATED = "Elevated"


def classify(delta_a: float) -> Regime:
    """
    Output regime of a deviation from the REE.
    """
    if abs(delta_a) <= SIGN_BAND:
        return Regime.REE
    return Regime.ELEVATED if delta_a > 0 else Regime.DEPRESSED


@dataclass(frozen=True)
class Equilibrium:
    """
    One solution of a static variant.

    Attributes:
        variant (Variant): Which defining equation was solved.
        delta_b (float): Parameter change.
        tau1 (float): Discount on ΔA² (the only discount of the one-τ variants).
        tau2 (float): Discount on Δb².
        tau3 (float): Discount on |ΔA||Δb|.
        branch (Branch): Closed-form root that produced the record.
        delta_A (float): Deviation from A0.
        A (float): Supply level A0 + ΔA.
        forecast_price (float): Agents' polynomial price estimate P̂.
        true_price (float | None): φ(A; b0 + Δb), None without a demand function.
        residual (float): Direct residual of the defining equation.
        regime (Regime): REE, Depressed or Elevated.
        valid (bool): Whether the record satisfies its equation and branch.
        reason (str): Remarks, ``;``-separated (boundary, extrapolation, ...).
        equation (EquationId): Residual equation identifier.
    """

    variant: Variant
    delta_b: float
    tau1: float
    tau2: float
    tau3: float
    branch: Branch
    delta_A: float
    A: float
    forecast_price: float
    true_price: float | None
    residual: float
    regime: Regime
    valid: bool
    reason: str
    equation: EquationId

    def as_row(self) -> dict:
        return {k: (str(v) if isinstance(v, StrEnum) else v) for k, v in asdict(self).items()}


def make_record(
    point: Expansion,
    *,
    variant: Variant,
    equation: EquationId,
    delta_a: float,
    branch: Branch,
    forecast_price: float,
    context: dict[str, float],
    delta_b: float = 0.0,
    taus: tuple[float, float, float] = (0.0, 0.0, 0.0),
    notes: tuple[str, ...] = (),
) -> Equilibrium:
    """
    Build an equilibrium record, computing its residual and true price.

    Args:
        point (Expansion): Expansion point.
        variant (Variant): Static variant.
        equation (EquationId): Defining equation of the candidate.
        delta_a (float): Candidate deviation.
        branch (Branch): Root label.
        forecast_price (float): Polynomial price estimate at the candidate.
        context (dict[str, float]): Residual context.
        delta_b (float, optional): Parameter change. Defaults to 0.
        taus (tuple[float, float, float], optional): Discount coefficients.
        notes (tuple[str, ...], optional): Extra remarks for ``reason``.

    Returns:
        Equilibrium: The record.
    """
    regime = classify(delta_a)
    if regime == Regime.REE:
        branch = Branch.ZERO
    a = point.a0 + delta_a
    true_price, extrapolated = point.true_price(a, delta_b)
    reasons = list(notes)
    if extrapolated:
        reasons.append(EXTRAPOLATED)
    res = residual(equation, delta_a, context)
    valid = res <= RESIDUAL_BOUND
    if not valid:
        logger.warning("%s root ΔA=%g has residual %g", variant, delta_a, res)
        reasons.append("residual above bound")
    return Equilibrium(
        variant=variant,
        delta_b=delta_b,
        tau1=taus[0],
        tau2=taus[1],
        tau3=taus[2],
        branch=branch,
        delta_A=delta_a,
        A=a,
        forecast_price=forecast_price,
        true_price=true_price,
        residual=res,
        regime=regime,
        valid=valid,
        reason="; ".join(reasons),
        equation=equation,
    )


def sign_check(value: float, positive: bool) -> str | None:
    """
    Check a root against the sign assumption of its branch.

    Returns:
        str | None: ``""`` if strictly consistent, ``BOUNDARY`` inside the
        tolerance band, None if the root contradicts the branch.
    """
    if abs(value) <= SIGN_BAND:
        return BOUNDARY
    if (value > 0) == positive:
        return ""
    return None


def deduplicate(records: list[Equilibrium]) -> list[Equilibrium]:
    """
    Keep a single REE record and sort the rest by ΔA.
    """
    seen_ree = False
    kept = []
    for record in records:
        if record.regime == Regime.REE:
            if seen_ree:
                continue
            seen_ree = True
        kept.append(record)
    return sorted(kept, key=lambda r: r.delta_A)
