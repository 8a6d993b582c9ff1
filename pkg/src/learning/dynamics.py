"""
This module contains the nearest-point learning process.

Agents start from a prior point μ with exact φ(μ) and φ_A(μ). Each period
they expand demand around the known point nearest to the supply they end up
producing, and the realized supply becomes a new known point.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from utils.compat import StrEnum

import numpy as np

from constants.tolerances import LEARNING_TMAX, LEARNING_TOL, SIGN_BAND
from demand.families import DemandSpec
from learning.mixture import mixture_equilibrium
from learning.supply import RootPolicy, point_info, supply_map
from oracle.residuals import EquationId, residual
from ree.solver import solve_ree
from utils.errors import ArgError, DomainError, SolverError

logger = logging.getLogger(__name__)


class RootUsed(StrEnum):
    PRIOR = "Prior"
    PLUS = "Plus"
    MINUS = "Minus"
    MIXTURE = "Mixture"


@dataclass(frozen=True)
class StepRecord:
    """
    One period of a learning trace.

    Attributes:
        t (int): Period, 0 for the prior.
        a_star (float): Expansion point used.
        a_next (float): Realized supply.
        forecast (float): Agents' price estimate at ``a_next``.
        true_price (float): φ(a_next).
        supply_residual (float | None): Residual of the supply equation at
            ``a_star`` (of the aggregate equation for a mixture), None for the
            prior.
        root_used (RootUsed): Which root produced ``a_next``.
        epsilon (float): a_next − a_star.
        a_star2 (float | None): Second expansion point of a mixture.
        psi (float | None): Share of agents on ``a_star`` in a mixture.
        note (str): Remarks.
    """

    t: int
    a_star: float
    a_next: float
    forecast: float
    true_price: float
    supply_residual: float | None
    root_used: RootUsed
    epsilon: float
    a_star2: float | None = None
    psi: float | None = None
    note: str = ""


@dataclass
class LearningTrace:
    """
    Outcome of ``simulate``.

    Attributes:
        a0 (float): REE quantity of the economy.
        steps (list[StepRecord]): Periods, prior first.
        converged (bool): Whether |A_t − φ(A_t)| reached the tolerance.
        final_gap (float): |A_T − A0| at the last period.
        halted (bool): Whether a solver error stopped the trace.
        halt_reason (str): The error message if halted.
    """

    a0: float
    steps: list[StepRecord] = field(default_factory=list)
    converged: bool = False
    final_gap: float = float("nan")
    halted: bool = False
    halt_reason: str = ""

    @property
    def supplies(self) -> list[float]:
        return [step.a_next for step in self.steps]


def _nearest(points: Sequence[float], a: float) -> list[int]:
    """
    Indices of the known points nearest to ``a`` (several on a tie).
    """
    distances = np.abs(np.asarray(points) - a)
    best = distances.min()
    return [int(i) for i in np.flatnonzero(distances - best <= SIGN_BAND)]


def _single_point_record(
    spec: DemandSpec, b: float, t: int, a_star: float, sign: int
) -> StepRecord:
    a_next = supply_map(spec, b, a_star, sign)
    phi, phi_a = point_info(spec, b, a_star)
    eps = a_next - a_star
    context = {"a_star": a_star, "phi_star": phi, "phi_a_star": phi_a}
    return StepRecord(
        t=t,
        a_star=a_star,
        a_next=a_next,
        forecast=phi + phi_a * eps,
        true_price=point_info(spec, b, a_next)[0],
        supply_residual=residual(EquationId.LEARNING_STEP, a_next, context),
        root_used=RootUsed.PLUS if sign > 0 else RootUsed.MINUS,
        epsilon=eps,
    )


def _mixture_record(
    spec: DemandSpec, b: float, t: int, a_star: float, a_star2: float, sign: int
) -> StepRecord:
    mixture = mixture_equilibrium(spec, b, a_star, a_star2, sign)
    a_next = mixture.a_bar
    phi, phi_a = point_info(spec, b, a_star)
    phi2, phi_a2 = point_info(spec, b, a_star2)
    forecast = mixture.psi * (phi + phi_a * (a_next - a_star)) + (1.0 - mixture.psi) * (
        phi2 + phi_a2 * (a_next - a_star2)
    )
    return StepRecord(
        t=t,
        a_star=a_star,
        a_next=a_next,
        forecast=forecast,
        true_price=point_info(spec, b, a_next)[0],
        supply_residual=mixture.residual,
        root_used=RootUsed.MIXTURE,
        epsilon=a_next - a_star,
        a_star2=a_star2,
        psi=mixture.psi,
        note="degenerate" if mixture.degenerate else "",
    )


def step(
    spec: DemandSpec,
    b: float,
    known_points: Sequence[float],
    root_policy: RootPolicy,
    t: int = 1,
    rng: np.random.Generator | None = None,
) -> tuple[float, StepRecord]:
    """
    One period of nearest-point learning.

    Starting from the most recent known point, supply is computed from the
    current expansion point and the point nearest to that supply becomes the
    next expansion point, until the two agree. A tie between two points, or a
    return to an expansion point already tried, means the selection cycles;
    the period is then settled by the mixture equilibrium of the two points.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        known_points (Sequence[float]): Points where φ and φ_A are known.
        root_policy (RootPolicy): Root of the supply quadratic to play.
        t (int, optional): Period index. Defaults to 1.
        rng (np.random.Generator | None, optional): Generator for the random
            policy.

    Returns:
        tuple[float, StepRecord]: The realized supply and its record.

    Raises:
        ComplexRootError: If the supply quadratic has no real root.
    """
    if not known_points:
        raise ArgError("learning needs at least one known point")
    sign = root_policy.sign(t, rng)
    points = list(dict.fromkeys(float(x) for x in known_points))
    current = points.index(float(known_points[-1]))
    tried = [current]
    for _ in range(len(points) + 1):
        a_star = points[current]
        a_next = supply_map(spec, b, a_star, sign)
        nearest = _nearest(points, a_next)
        if nearest == [current]:
            record = _single_point_record(spec, b, t, a_star, sign)
            return record.a_next, record
        if len(nearest) > 1:
            first, second = points[nearest[0]], points[nearest[1]]
            logger.debug("tie between %g and %g at t=%d", first, second, t)
            record = _mixture_record(spec, b, t, first, second, sign)
            return record.a_next, record
        if nearest[0] in tried:
            previous = points[nearest[0]]
            logger.debug("selection cycles between %g and %g", a_star, previous)
            record = _mixture_record(spec, b, t, previous, a_star, sign)
            return record.a_next, record
        current = nearest[0]
        tried.append(current)
    raise SolverError("nearest-point selection did not settle")


def simulate(
    spec: DemandSpec,
    b: float,
    prior_mu: float | Sequence[float],
    t_max: int = LEARNING_TMAX,
    root_policy: RootPolicy = RootPolicy.PLUS,
    tol: float = LEARNING_TOL,
    seed: int | None = None,
) -> LearningTrace:
    """
    Iterate ``step`` from a prior until supply is self-confirming.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        prior_mu (float | Sequence[float]): Prior point, or several.
        t_max (int, optional): Maximal number of periods. Defaults to 200.
        root_policy (RootPolicy, optional): Root to play. Defaults to plus.
        tol (float, optional): Convergence bound on |A_t − φ(A_t)|.
        seed (int | None, optional): Seed of the random root policy.

    Returns:
        LearningTrace: The trace; non-convergence is a flag, not an error.
    """
    priors = [float(prior_mu)] if np.isscalar(prior_mu) else [float(x) for x in prior_mu]
    lo, hi = spec.domain_hint
    for mu in priors:
        if not lo <= mu <= hi:
            raise DomainError(f"prior {mu} outside demand domain [{lo}, {hi}]")
    if t_max < 0:
        raise ArgError(f"t_max must be non-negative, got {t_max}")

    trace = LearningTrace(a0=solve_ree(spec, b).A0)
    rng = np.random.default_rng(seed)
    known = list(priors)
    for mu in priors:
        phi = point_info(spec, b, mu)[0]
        trace.steps.append(
            StepRecord(
                t=0,
                a_star=mu,
                a_next=mu,
                forecast=phi,
                true_price=phi,
                supply_residual=None,
                root_used=RootUsed.PRIOR,
                epsilon=0.0,
            )
        )

    def settled(a: float) -> bool:
        return abs(a - point_info(spec, b, a)[0]) <= tol

    trace.converged = settled(known[-1])
    for t in range(1, t_max + 1):
        if trace.converged:
            break
        try:
            a_next, record = step(spec, b, known, root_policy, t, rng)
            if not lo <= a_next <= hi:
                raise DomainError(
                    f"supply {a_next:g} outside demand domain [{lo}, {hi}]"
                )
        except SolverError as exc:
            logger.warning("learning halted at t=%d: %s", t, exc)
            trace.halted, trace.halt_reason = True, str(exc)
            break
        trace.steps.append(record)
        known.append(a_next)
        trace.converged = settled(a_next)

    trace.final_gap = abs(known[-1] - trace.a0)
    if trace.converged:
        logger.info("learning converged after %d periods", trace.steps[-1].t)
    elif not trace.halted:
        logger.warning("learning did not converge within %d periods", t_max)
    return trace
