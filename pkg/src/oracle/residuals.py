"""
This module contains the direct residuals |LHS − RHS| of every defining
equation used by the solvers.

The residuals are evaluated from the raw coefficients in ``context`` and never
from a closed-form root, so they serve as the ground truth for the solvers and
for ``verify``.
"""

from collections.abc import Callable, Mapping
from utils.compat import StrEnum

from utils.errors import ArgError, UnknownEquationError


class EquationId(StrEnum):
    """
    Identifiers of the defining equations.
    """

    FIRST_ORDER = "first_order"
    PARAM_CHANGE_UP = "param_change_up"
    PARAM_CHANGE_DOWN = "param_change_down"
    SECOND_ORDER = "second_order"
    ALT_REGIME1 = "alt_regime1"
    ALT_REGIME2 = "alt_regime2"
    LEARNING_STEP = "learning_step"
    AGENT_SUPPLY = "agent_supply"
    MIXTURE = "mixture"


# Short identifiers accepted in place of the enum values.
EQUATION_ALIASES: dict[str, EquationId] = {
    "e5": EquationId.FIRST_ORDER,
    "ne26_src": EquationId.PARAM_CHANGE_UP,
    "ne27_src": EquationId.PARAM_CHANGE_DOWN,
    "a1001": EquationId.SECOND_ORDER,
    "b_regime1": EquationId.ALT_REGIME1,
    "b_regime2": EquationId.ALT_REGIME2,
    "l2": EquationId.LEARNING_STEP,
    "ha_agent": EquationId.AGENT_SUPPLY,
    "hd_mixture": EquationId.MIXTURE,
}


def equation_from_id(equation_id: EquationId | str) -> EquationId:
    """
    Resolve an enum value or one of its short aliases.

    Raises:
        UnknownEquationError: If the identifier names no equation.
    """
    if isinstance(equation_id, str) and equation_id in EQUATION_ALIASES:
        return EQUATION_ALIASES[equation_id]
    try:
        return EquationId(equation_id)
    except ValueError as exc:
        raise UnknownEquationError(f"unknown equation {equation_id!r}") from exc


def _get(context: Mapping[str, float], key: str) -> float:
    try:
        return float(context[key])
    except KeyError as exc:
        raise ArgError(f"residual context is missing {key!r}") from exc


def _first_order(d_a: float, ctx: Mapping[str, float]) -> float:
    a0, phi0, phi_a, tau = (_get(ctx, k) for k in ("a0", "phi0", "phi_a", "tau"))
    supply = a0 + d_a
    return abs(supply - (phi0 + phi_a * d_a - tau * d_a**2))


def _param_change(d_a: float, ctx: Mapping[str, float]) -> float:
    a0, phi0, phi_a, phi_b = (_get(ctx, k) for k in ("a0", "phi0", "phi_a", "phi_b"))
    tau1, tau2, tau3 = (_get(ctx, k) for k in ("tau1", "tau2", "tau3"))
    d_b = _get(ctx, "delta_b")
    estimate = phi0 + phi_a * d_a + phi_b * d_b
    penalty = tau1 * d_a**2 + tau2 * d_b**2 + tau3 * abs(d_a) * abs(d_b)
    return abs(a0 + d_a - (estimate - penalty))


def _second_order(d_a: float, ctx: Mapping[str, float]) -> float:
    a0, phi0, phi_a = (_get(ctx, k) for k in ("a0", "phi0", "phi_a"))
    phi_aa, tau = _get(ctx, "phi_aa"), _get(ctx, "tau")
    estimate = phi0 + phi_a * d_a + 0.5 * phi_aa * d_a**2
    return abs(a0 + d_a + tau * abs(d_a) ** 3 - estimate)


def _alt_discount(d_a: float, ctx: Mapping[str, float]) -> float:
    a0, phi0, phi_a, phi_b = (_get(ctx, k) for k in ("a0", "phi0", "phi_a", "phi_b"))
    d_b = _get(ctx, "delta_b")
    estimate = phi0 + phi_a * d_a + phi_b * d_b
    return abs(a0 + d_a - (estimate - max(d_a**2, d_b**2)))


def _learning_step(a_next: float, ctx: Mapping[str, float]) -> float:
    a_star, phi_star, phi_a_star = (
        _get(ctx, k) for k in ("a_star", "phi_star", "phi_a_star")
    )
    eps = a_next - a_star
    return abs((a_next - phi_star) - (phi_a_star * eps - eps**2))


def _agent_supply(forecast: float, ctx: Mapping[str, float]) -> float:
    a_i, phi_i, phi_a_i = (_get(ctx, k) for k in ("a_i", "phi_i", "phi_a_i"))
    gap = forecast - a_i
    return abs(forecast - (phi_i + phi_a_i * gap - gap**2))


def _group_supply(a: float, point: float, phi: float, phi_a: float) -> float:
    return phi + phi_a * (a - point) - (a - point) ** 2


def _mixture(a: float, ctx: Mapping[str, float]) -> float:
    psi = _get(ctx, "psi")
    first = _group_supply(
        a, _get(ctx, "a_star"), _get(ctx, "phi_star"), _get(ctx, "phi_a_star")
    )
    second = _group_supply(
        a, _get(ctx, "a_star2"), _get(ctx, "phi_star2"), _get(ctx, "phi_a_star2")
    )
    return abs(a - (psi * first + (1.0 - psi) * second))


_EQUATIONS: dict[EquationId, Callable[[float, Mapping[str, float]], float]] = {
    EquationId.FIRST_ORDER: _first_order,
    EquationId.PARAM_CHANGE_UP: _param_change,
    EquationId.PARAM_CHANGE_DOWN: _param_change,
    EquationId.SECOND_ORDER: _second_order,
    EquationId.ALT_REGIME1: _alt_discount,
    EquationId.ALT_REGIME2: _alt_discount,
    EquationId.LEARNING_STEP: _learning_step,
    EquationId.AGENT_SUPPLY: _agent_supply,
    EquationId.MIXTURE: _mixture,
}


def residual(
    equation_id: EquationId | str, candidate: float, context: Mapping[str, float]
) -> float:
    """
    Absolute residual of a defining equation at a candidate solution.

    Args:
        equation_id (EquationId | str): Which equation, by value or short
            alias.
        candidate (float): Candidate solution (a deviation ΔA for the static
            variants, a supply level otherwise).
        context (Mapping[str, float]): Evaluated coefficients.

    Returns:
        float: |LHS − RHS|.

    Example:
        >>> ctx = {"a0": 1.0, "phi0": 1.0, "phi_a": -0.5, "tau": 1.0}
        >>> residual("first_order", -1.5, ctx)
        0.0
    """
    equation = _EQUATIONS[equation_from_id(equation_id)]
    return equation(float(candidate), context)


def signed_equation(
    equation_id: EquationId | str, context: Mapping[str, float]
) -> Callable[[float], float]:
    """
    Signed version of a static defining equation, LHS − RHS as a function of
    ΔA, for sign-change scans.

    Args:
        equation_id (EquationId | str): One of the static variants.
        context (Mapping[str, float]): Evaluated coefficients.

    Returns:
        Callable[[float], float]: g(ΔA).
    """
    equation_id = equation_from_id(equation_id)
    a0, phi0, phi_a = (_get(context, k) for k in ("a0", "phi0", "phi_a"))

    if equation_id == EquationId.FIRST_ORDER:
        tau = _get(context, "tau")
        return lambda d: a0 + d - (phi0 + phi_a * d - tau * d * d)
    if equation_id in (EquationId.PARAM_CHANGE_UP, EquationId.PARAM_CHANGE_DOWN):
        phi_b, d_b = _get(context, "phi_b"), _get(context, "delta_b")
        tau1, tau2, tau3 = (_get(context, k) for k in ("tau1", "tau2", "tau3"))
        return lambda d: a0 + d - (
            phi0
            + phi_a * d
            + phi_b * d_b
            - tau1 * d * d
            - tau2 * d_b * d_b
            - tau3 * abs(d) * abs(d_b)
        )
    if equation_id == EquationId.SECOND_ORDER:
        phi_aa, tau = _get(context, "phi_aa"), _get(context, "tau")
        return lambda d: a0 + d + tau * abs(d) ** 3 - (
            phi0 + phi_a * d + 0.5 * phi_aa * d * d
        )
    if equation_id in (EquationId.ALT_REGIME1, EquationId.ALT_REGIME2):
        phi_b, d_b = _get(context, "phi_b"), _get(context, "delta_b")
        return lambda d: a0 + d - (
            phi0 + phi_a * d + phi_b * d_b - max(d * d, d_b * d_b)
        )
    raise UnknownEquationError(f"{equation_id} has no signed scan form")
