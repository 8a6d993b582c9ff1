"""
This module contains the equilibria of the one-τ static variants: the
first-order expansion with quadratic discounting and the second-order
expansion with cubic discounting.
"""

import logging

from constants.tolerances import ROOT_MERGE
from oracle.residuals import EquationId
from polyeq.expansion import Expansion
from polyeq.records import (
    DEGENERATE,
    Branch,
    Equilibrium,
    Variant,
    deduplicate,
    make_record,
    sign_check,
)
from utils.algebra import solve_quadratic
from utils.errors import ArgError, DegenerateError

logger = logging.getLogger(__name__)


def _check_tau(tau: float) -> None:
    if tau < 0:
        raise ArgError(f"discount coefficient must be non-negative, got {tau}")


def first_order_equilibria(point: Expansion, tau: float) -> list[Equilibrium]:
    """
    Solutions of τΔA² + (1 − φ_A)ΔA = 0.

    With τ > 0 there are exactly two equilibria, the REE and the depressed
    ΔA₁ = −(1 − φ_A)/τ; with τ = 0 only the REE remains.

    Args:
        point (Expansion): Expansion point at the REE.
        tau (float): Discount coefficient, non-negative.

    Returns:
        list[Equilibrium]: Records sorted by ΔA.

    Example:
        >>> [r.delta_A for r in first_order_equilibria(from_coefficients(-0.5), 1.0)]
        [-1.5, 0.0]
    """
    _check_tau(tau)
    context = point.context(tau=tau)
    candidates = [(0.0, Branch.ZERO)]
    if tau > 0:
        plus, minus = solve_quadratic(tau, point.gap, 0.0)
        candidates += [(plus, Branch.PLUS), (minus, Branch.MINUS)]

    records = [
        make_record(
            point,
            variant=Variant.FIRST_ORDER,
            equation=EquationId.FIRST_ORDER,
            delta_a=d_a,
            branch=branch,
            forecast_price=point.phi0 + point.phi_a * d_a,
            context=context,
            taus=(tau, 0.0, 0.0),
        )
        for d_a, branch in candidates
    ]
    return deduplicate(records)


def _second_order_record(
    point: Expansion, d_a: float, branch: Branch, tau: float, notes: tuple[str, ...] = ()
) -> Equilibrium:
    return make_record(
        point,
        variant=Variant.SECOND_ORDER,
        equation=EquationId.SECOND_ORDER,
        delta_a=d_a,
        branch=branch,
        forecast_price=point.phi0 + point.phi_a * d_a + 0.5 * point.phi_aa * d_a**2,
        context=point.context(tau=tau),
        taus=(tau, 0.0, 0.0),
        notes=notes,
    )


def second_order_equilibria(
    point: Expansion, tau: float, *, strict: bool = False
) -> list[Equilibrium]:
    """
    Solutions of τ|ΔA|³ − ½φ_AA ΔA² + (1 − φ_A)ΔA = 0.

    Dividing by ΔA leaves one quadratic per sign of ΔA:

    - ΔA < 0: τΔA² + ½φ_AA ΔA − (1 − φ_A) = 0, whose minus root is always
      negative;
    - ΔA > 0: τΔA² − ½φ_AA ΔA + (1 − φ_A) = 0, which has two positive roots
      when φ_AA > 0 and (φ_AA/4τ)² > (1 − φ_A)/τ.

    Every root is re-checked against the sign it was derived under. With
    τ = 0 the second root is (1 − φ_A)/(½φ_AA); if φ_AA is zero as well only
    the REE remains and it is returned flagged ``degenerate``, or rejected
    when ``strict``.

    Args:
        point (Expansion): Expansion point at the REE.
        tau (float): Cubic discount coefficient, non-negative.
        strict (bool, optional): Raise on the degenerate case instead of
            returning the flagged REE. Defaults to False.

    Returns:
        list[Equilibrium]: Records sorted by ΔA.

    Raises:
        DegenerateError: If ``strict`` and τ = φ_AA = 0.
    """
    _check_tau(tau)
    if tau == 0:
        if point.phi_aa == 0:
            if strict:
                raise DegenerateError("τ = 0 and φ_AA = 0: only the REE remains")
            logger.info("second-order equation is linear with τ=0 and φ_AA=0")
            return [_second_order_record(point, 0.0, Branch.ZERO, tau, (DEGENERATE,))]
        d_a = point.gap / (0.5 * point.phi_aa)
        branch = Branch.PLUS if d_a > 0 else Branch.MINUS
        return deduplicate(
            [
                _second_order_record(point, 0.0, Branch.ZERO, tau),
                _second_order_record(point, d_a, branch, tau),
            ]
        )

    records = [_second_order_record(point, 0.0, Branch.ZERO, tau)]
    half = 0.5 * point.phi_aa
    for positive, linear, constant in ((False, half, -point.gap), (True, -half, point.gap)):
        roots = solve_quadratic(tau, linear, constant)
        if roots is None:
            logger.debug("no real root on the ΔA%s0 branch", ">" if positive else "<")
            continue
        plus, minus = roots
        notes: tuple[str, ...] = ()
        if abs(plus - minus) <= ROOT_MERGE:
            notes = (DEGENERATE,)
            labelled = [(0.5 * (plus + minus), Branch.PLUS)]
        else:
            labelled = [(plus, Branch.PLUS), (minus, Branch.MINUS)]
        for d_a, branch in labelled:
            check = sign_check(d_a, positive)
            if check is None:
                logger.debug("dropping %s root ΔA=%g against its sign branch", branch, d_a)
                continue
            extra = notes + ((check,) if check else ())
            records.append(_second_order_record(point, d_a, branch, tau, extra))
    return deduplicate(records)
