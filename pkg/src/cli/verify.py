"""
This module contains the re-verification of result files: the scenario is
rebuilt from the file's trailer and every row's residual is recomputed from
the demand function, independently of the solver that produced it.
"""

import logging
import math
from collections.abc import Callable
from pathlib import Path

from cli.scenario import Scenario, Variant, scenario_from_text
from cli.tables import number, read_output
from constants.tolerances import RESIDUAL_BOUND
from demand.families import DemandSpec
from learning.supply import point_info
from oracle.residuals import EquationId, residual
from polyeq.expansion import Expansion, expansion_point
from polyeq.policy import Discounts, marginal_multiplier
from ree.solver import solve_ree
from utils.errors import InvariantViolation

logger = logging.getLogger(__name__)


def _ree(row: dict, spec: DemandSpec, _: Expansion | None, __: Scenario) -> float:
    a0, b = number(row["A0"]), number(row["b"])
    return abs(a0 - point_info(spec, b, a0)[0])


def _polyeq(row: dict, _: DemandSpec, point: Expansion, __: Scenario) -> float:
    tau1, tau2, tau3 = (number(row[k]) for k in ("tau1", "tau2", "tau3"))
    context = point.context(
        tau=tau1, tau1=tau1, tau2=tau2, tau3=tau3, delta_b=number(row["delta_b"])
    )
    return residual(row["equation"], number(row["delta_A"]), context)


def _bounds(row: dict, _: DemandSpec, point: Expansion, scenario: Scenario) -> float:
    quantity, value = row["quantity"], number(row["value"])
    half = 0.5 * point.gap
    if quantity == "alt_delta_b1":
        return abs(half + math.sqrt(point.phi_b * value + half * half) - value)
    if quantity == "alt_delta_b2":
        return abs(-half + math.sqrt(point.phi_b * value + half * half) - value)
    taus = Discounts(*(scenario.number(k) for k in ("tau1", "tau2", "tau3")))
    if quantity == "policy_sign_change":
        return abs(marginal_multiplier(point, value, taus))
    return abs(value - point.phi_b / taus.tau2)


def _learn(row: dict, spec: DemandSpec, _: Expansion | None, scenario: Scenario) -> float:
    b, a_star, a_next = scenario.b, number(row["a_star"]), number(row["a_next"])
    phi, phi_a = point_info(spec, b, a_star)
    if row["root_used"] != "Mixture":
        context = {"a_star": a_star, "phi_star": phi, "phi_a_star": phi_a}
        return residual(EquationId.LEARNING_STEP, a_next, context)
    a_star2 = number(row["a_star2"])
    phi2, phi_a2 = point_info(spec, b, a_star2)
    context = {
        "psi": number(row["psi"]),
        "a_star": a_star,
        "a_star2": a_star2,
        "phi_star": phi,
        "phi_star2": phi2,
        "phi_a_star": phi_a,
        "phi_a_star2": phi_a2,
    }
    return residual(EquationId.MIXTURE, a_next, context)


def _asyminfo(row: dict, spec: DemandSpec, _: Expansion | None, scenario: Scenario) -> float:
    a_i = number(row["a_i"])
    phi, phi_a = point_info(spec, scenario.b, a_i)
    context = {"a_i": a_i, "phi_i": phi, "phi_a_i": phi_a}
    return residual(EquationId.AGENT_SUPPLY, number(row["forecast"]), context)


def _checked(variant: Variant, row: dict) -> bool:
    if row.get("valid") == "false" and not row.get("residual"):
        return False
    if variant == Variant.LEARN:
        return row["kind"] == "step" and row["root_used"] != "Prior"
    if variant == Variant.ASYMINFO:
        return row["kind"] == "node"
    return True


_CHECKS: dict[Variant, Callable[..., float]] = {
    Variant.REE: _ree,
    Variant.FIRST_ORDER: _polyeq,
    Variant.SECOND_ORDER: _polyeq,
    Variant.PARAM_CHANGE: _polyeq,
    Variant.ALT_DISCOUNT: _polyeq,
    Variant.BOUNDS: _bounds,
    Variant.LEARN: _learn,
    Variant.ASYMINFO: _asyminfo,
}


def verify_file(path: Path | str) -> int:
    """
    Recompute the residual of every row of a result file.

    Args:
        path (Path | str): CSV written by the CLI.

    Returns:
        int: Number of rows verified.

    Raises:
        InvariantViolation: On the first row whose recomputed residual exceeds
            the residual bound.
    """
    df, trailer = read_output(path)
    scenario = scenario_from_text(trailer)
    spec = scenario.demand()
    point = None
    if scenario.variant not in (Variant.LEARN, Variant.ASYMINFO, Variant.REE):
        point = expansion_point(spec, solve_ree(spec, scenario.b, scenario.tol).A0, scenario.b)
    check = _CHECKS[scenario.variant]

    verified = 0
    for row in df.iter_rows(named=True):
        if not _checked(scenario.variant, row):
            continue
        value = check(row, spec, point, scenario)
        if not value <= RESIDUAL_BOUND:
            raise InvariantViolation(f"recomputed residual {value:g} in {path}", row)
        verified += 1
    logger.info("verified %d rows of %s", verified, path)
    return verified
