"""
This module contains the dispersed-information equilibrium: every agent knows
demand at one point A_i, guesses that the others reason alike, and supplies
according to a first-order expansion around A_i with a quadratic penalty.
Aggregate supply integrates the agents over the information density.
"""

import logging
from dataclasses import dataclass
from utils.compat import StrEnum

import numpy as np
from scipy.integrate import simpson

from asyminfo.population import DensityKind, PopulationSpec, point_mass
from constants.tolerances import QUAD_MAX_ERROR, RESIDUAL_BOUND
from demand.families import DemandFamily, DemandSpec
from learning.supply import point_info, supply_map
from oracle.residuals import EquationId, residual
from ree.solver import solve_ree
from utils.errors import (
    ComplexForecastError,
    ComplexRootError,
    DomainError,
    HypothesisError,
    QuadratureError,
)

logger = logging.getLogger(__name__)


class AgentBranch(StrEnum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self == AgentBranch.PLUS else -1


@dataclass(frozen=True)
class AgentNode:
    """
    One agent type: known point, forecast, supply and density weight.
    """

    a_i: float
    forecast: float
    supply: float
    weight: float
    residual: float


@dataclass(frozen=True)
class AsymEquilibrium:
    """
    Aggregate equilibrium under dispersed information.

    Attributes:
        branch (AgentBranch): Root played by every agent.
        aggregate_a (float): Aggregate supply.
        agent_curve (list[AgentNode]): Agents at the quadrature nodes.
        below_ree (bool): aggregate_a <= A0 (with the residual bound).
        quad_error_est (float): Difference to the refined quadrature.
        a0 (float): REE quantity.
    """

    branch: AgentBranch
    aggregate_a: float
    agent_curve: list[AgentNode]
    below_ree: bool
    quad_error_est: float
    a0: float


#######################################################################
## Agents #############################################################
#######################################################################


def agent_forecast(spec: DemandSpec, b: float, a_i: float, branch: AgentBranch) -> float:
    """
    Aggregate forecast Â of an agent who knows demand at ``a_i``.

    Â = A_i − h ± √(φ(A_i) − A_i + h²), h = (1 − φ_A(A_i))/2.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        a_i (float): Known point.
        branch (AgentBranch): Root of the forecast quadratic.

    Returns:
        float: The forecast.

    Raises:
        ComplexForecastError: If the forecast quadratic has no real root.
    """
    try:
        return supply_map(spec, b, a_i, AgentBranch(branch).sign)
    except ComplexRootError as exc:
        raise ComplexForecastError(f"agent at A_i={a_i}: {exc}") from exc


def agent_supply(spec: DemandSpec, b: float, a_i: float, branch: AgentBranch) -> float:
    """
    Supply φ(A_i) + φ_A(A_i)(Â − A_i) − (Â − A_i)² of an agent at ``a_i``;
    equal to the forecast, which is what confirms the agents' guess.
    """
    return _node(spec, b, a_i, branch, 1.0).supply


def _node(
    spec: DemandSpec, b: float, a_i: float, branch: AgentBranch, weight: float
) -> AgentNode:
    forecast = agent_forecast(spec, b, a_i, branch)
    phi, phi_a = point_info(spec, b, a_i)
    gap = forecast - a_i
    supply = phi + phi_a * gap - gap * gap
    context = {"a_i": a_i, "phi_i": phi, "phi_a_i": phi_a}
    return AgentNode(
        a_i=a_i,
        forecast=forecast,
        supply=supply,
        weight=weight,
        residual=residual(EquationId.AGENT_SUPPLY, forecast, context),
    )


def _simpson_aggregate(
    spec: DemandSpec, b: float, pop: PopulationSpec, branch: AgentBranch, n: int
) -> tuple[float, list[AgentNode]]:
    nodes = np.linspace(pop.lo, pop.hi, n)
    weights = pop.pdf(nodes)
    curve = [
        _node(spec, b, float(x), branch, float(w)) for x, w in zip(nodes, weights)
    ]
    supplies = np.array([node.supply for node in curve])
    return float(simpson(supplies * weights, x=nodes)), curve


def aggregate(
    spec: DemandSpec, b: float, pop: PopulationSpec, branch: AgentBranch
) -> AsymEquilibrium:
    """
    Aggregate supply ∫ a(x) f(x) dx with composite Simpson quadrature.

    The error estimate compares ``quad_n`` nodes against ``2·quad_n − 1``.
    Any agent without a real forecast aborts the aggregate.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        pop (PopulationSpec): Information density.
        branch (AgentBranch): Root played by every agent.

    Returns:
        AsymEquilibrium: The aggregate equilibrium.
    """
    branch = AgentBranch(branch)
    lo, hi = spec.domain_hint
    if pop.lo < lo or pop.hi > hi:
        raise DomainError(f"density support {pop.support} outside demand domain")
    a0 = solve_ree(spec, b).A0

    if pop.kind == DensityKind.POINT_MASS:
        curve = [_node(spec, b, pop.lo, branch, 1.0)]
        total, error = curve[0].supply, 0.0
    else:
        total, curve = _simpson_aggregate(spec, b, pop, branch, pop.quad_n)
        refined, _ = _simpson_aggregate(spec, b, pop, branch, 2 * pop.quad_n - 1)
        error = abs(refined - total)
        if error > QUAD_MAX_ERROR:
            raise QuadratureError(
                f"quadrature error estimate {error:g} > {QUAD_MAX_ERROR:g}, raise quad_n"
            )
    worst = max(node.residual for node in curve)
    if worst > RESIDUAL_BOUND:
        logger.warning("agent forecast residual %g above bound", worst)
    logger.info("%s aggregate supply %.17g (A0=%.17g)", branch, total, a0)
    return AsymEquilibrium(
        branch=branch,
        aggregate_a=total,
        agent_curve=curve,
        below_ree=total <= a0 + RESIDUAL_BOUND,
        quad_error_est=error,
        a0=a0,
    )


#######################################################################
## Inefficiency ########################################################
#######################################################################


@dataclass(frozen=True)
class BranchCheck:
    """
    Shortfall of one branch against the REE.

    Attributes:
        branch (AgentBranch): Root played.
        aggregate_a (float): Aggregate supply.
        slacks (list[float]): A0 − a_i at every node.
        cost_spread (float): Range of marginal costs, max a_i − min a_i.
        holds (bool): Every slack and the aggregate slack are non-negative.
    """

    branch: AgentBranch
    aggregate_a: float
    slacks: list[float]
    cost_spread: float
    holds: bool

    @property
    def min_slack(self) -> float:
        return min(self.slacks)


@dataclass(frozen=True)
class ConvexityReport:
    """
    Outcome of ``convexity_check`` for both branches.
    """

    family: DemandFamily
    weakly_convex: bool
    a0: float
    checks: list[BranchCheck]

    @property
    def holds(self) -> bool:
        return all(check.holds for check in self.checks)


def convexity_check(spec: DemandSpec, b: float, pop: PopulationSpec) -> ConvexityReport:
    """
    Check that dispersed information never pushes output above the REE when
    demand is convex: a_i <= A0 at every node and in the aggregate.

    Marginal cost equals a_i under the quadratic cost, so the spread of the
    node supplies measures how unequal marginal costs are across producers.

    Args:
        spec (DemandSpec): Demand specification, convex.
        b (float): Demand parameter.
        pop (PopulationSpec): Information density.

    Returns:
        ConvexityReport: Slacks for the plus and minus branches.

    Raises:
        HypothesisError: If the demand family is not convex.
    """
    weakly = spec.family == DemandFamily.LINEAR
    if spec.family not in (DemandFamily.EXP_CONVEX, DemandFamily.LINEAR):
        raise HypothesisError(f"{spec.family} demand is not convex")
    if weakly:
        logger.warning("linear demand is only weakly convex, the check is untested there")

    checks = []
    a0 = None
    for branch in AgentBranch:
        equilibrium = aggregate(spec, b, pop, branch)
        a0 = equilibrium.a0
        supplies = [node.supply for node in equilibrium.agent_curve]
        slacks = [a0 - s for s in supplies]
        holds = min(slacks) >= -RESIDUAL_BOUND and equilibrium.below_ree
        if not holds:
            logger.warning("%s branch exceeds A0: min slack %g", branch, min(slacks))
        checks.append(
            BranchCheck(
                branch=branch,
                aggregate_a=equilibrium.aggregate_a,
                slacks=slacks,
                cost_spread=max(supplies) - min(supplies),
                holds=holds,
            )
        )
    return ConvexityReport(family=spec.family, weakly_convex=weakly, a0=a0, checks=checks)


def dispersion_effect(
    spec: DemandSpec, b: float, pop: PopulationSpec, branch: AgentBranch
) -> float:
    """
    Aggregate supply under ``pop`` minus the supply of a population that all
    knows demand at the mean point of ``pop``. Positive values mean dispersion
    amplifies supply.
    """
    spread = aggregate(spec, b, pop, branch).aggregate_a
    concentrated = aggregate(spec, b, point_mass(pop.expectation()), branch).aggregate_a
    return spread - concentrated
